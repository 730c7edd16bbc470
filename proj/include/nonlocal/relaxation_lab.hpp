#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nonlocal/envelopes.hpp"
#include "nonlocal/exact_sets.hpp"
#include "nonlocal/functionals.hpp"
#include "nonlocal/grid.hpp"
#include "nonlocal/set_ops.hpp"

namespace nonlocal {

struct MinBounds {
  double lower = 0.0;       // |Omega|^2 * min W over all nodes
  double upper = 0.0;       // |Omega|^2 * min W over the diagonal (constant fields)
  GridMin full_min;
  std::size_t diag_index = 0;
};

inline MinBounds min_bounds(const GridFunction& w, double omega = 1.0) {
  MinBounds out;
  out.full_min = grid_min(w);
  double diag = w.at(0, 0);
  for (std::size_t i = 1; i < w.grid.n; ++i)
    if (w.at(i, i) < diag) {
      diag = w.at(i, i);
      out.diag_index = i;
    }
  out.lower = omega * omega * out.full_min.value;
  out.upper = omega * omega * diag;
  return out;
}

struct MinimizeOptions {
  std::size_t refine_rounds = 2;
  std::size_t seeds = 8;
  double omega = 1.0;
  // When set, only value assignments whose mean lies within half a grid
  // spacing of the target are admissible.
  std::optional<double> mean;
};

struct MinimizationReport {
  double best_value = 0.0;
  PiecewiseConstantField best_field;
  double lower_bound = 0.0;
  double diagonal_upper_bound = 0.0;
  std::size_t pieces = 0;
  std::size_t evaluations = 0;
  std::size_t refine_rounds = 0;
  bool exhaustive = false;
  std::optional<double> mean_target;
  double mean_window = 0.0;
};

namespace detail {

// Objective for an equal-fraction assignment, accumulated in fixed order.
inline double multiset_objective(const Integrand& w, const std::vector<double>& vals,
                                 double omega, std::size_t& evaluations) {
  const std::size_t m = vals.size();
  std::vector<double> terms(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) terms[i * m + j] = w(vals[i], vals[j]);
  ++evaluations;
  const double frac = 1.0 / static_cast<double>(m);
  return omega * omega * frac * frac * pairwise_sum(terms);
}

// Canonical tie-break: smaller total magnitude first, then lexicographic on
// the sorted values.  Keeps witnesses reproducible on flat objectives.
struct Candidate {
  double obj = std::numeric_limits<double>::infinity();
  std::vector<double> vals;

  static double abs_sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::fabs(x);
    return s;
  }

  bool beats(const Candidate& other) const {
    if (vals.empty()) return false;
    if (other.vals.empty()) return true;
    if (obj != other.obj) return obj < other.obj;
    const double a = abs_sum(vals), b = abs_sum(other.vals);
    if (a != b) return a < b;
    return vals < other.vals;
  }
};

inline bool mean_admissible(const std::vector<double>& vals, const std::optional<double>& target,
                            double window) {
  if (!target) return true;
  double sum = 0.0;
  for (double v : vals) sum += v;
  const auto m = static_cast<double>(vals.size());
  return std::fabs(sum - m * *target) <= m * window + 1e-13 * (1.0 + std::fabs(m * *target));
}

inline void keep_top(std::vector<Candidate>& pool, Candidate cand, std::size_t cap) {
  pool.push_back(std::move(cand));
  std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    return a.beats(b);
  });
  if (pool.size() > cap) pool.resize(cap);
}

// Greedy local search over single steps and opposite pair steps of size
// `step`, strictly improving, within the value box and the mean window.
inline Candidate coordinate_descent(const Integrand& w, Candidate start, double step,
                                    const ScalarGrid& box, double omega,
                                    const std::optional<double>& mean, double window,
                                    std::size_t& evaluations) {
  Candidate cur = std::move(start);
  const std::size_t m = cur.vals.size();
  for (std::size_t round = 0; round < 500; ++round) {
    Candidate best_move;
    auto consider = [&](std::vector<double> vals) {
      for (double v : vals)
        if (!box.contains(v)) return;
      if (!mean_admissible(vals, mean, window)) return;
      std::sort(vals.begin(), vals.end());
      Candidate cand;
      cand.obj = multiset_objective(w, vals, omega, evaluations);
      cand.vals = std::move(vals);
      if (cand.obj < cur.obj && cand.beats(best_move)) best_move = std::move(cand);
    };
    for (std::size_t k = 0; k < m; ++k)
      for (double dir : {step, -step}) {
        std::vector<double> vals = cur.vals;
        vals[k] += dir;
        consider(std::move(vals));
      }
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t l = 0; l < m; ++l) {
        if (k == l) continue;
        std::vector<double> vals = cur.vals;
        vals[k] += step;
        vals[l] -= step;
        consider(std::move(vals));
      }
    if (best_move.vals.empty()) break;
    cur = std::move(best_move);
  }
  return cur;
}

}  // namespace detail

// Minimization of the double integral over fields with `pieces` equal
// fractions and values from the value grid: exhaustive sweep for up to three
// pieces, seeded coordinate descent beyond that, followed by descent rounds
// on successively halved steps.
inline MinimizationReport minimize_discrete(const Integrand& w, const ScalarGrid& value_grid,
                                            std::size_t pieces, MinimizeOptions opts = {}) {
  if (pieces == 0) throw std::invalid_argument("minimize_discrete: need at least one piece");
  const std::size_t nv = value_grid.n;
  const double h = value_grid.spacing();
  const double window = h / 2.0;

  MinimizationReport report;
  report.pieces = pieces;
  report.refine_rounds = opts.refine_rounds;
  report.mean_target = opts.mean;
  report.mean_window = window;
  report.exhaustive = pieces <= 3;

  std::size_t evaluations = 0;
  std::vector<detail::Candidate> pool;
  const std::size_t cap = std::max<std::size_t>(opts.seeds, 1);

  auto offer_vals = [&](std::vector<double> vals) {
    std::sort(vals.begin(), vals.end());
    if (!detail::mean_admissible(vals, opts.mean, window)) return;
    detail::Candidate cand;
    cand.obj = detail::multiset_objective(w, vals, opts.omega, evaluations);
    cand.vals = std::move(vals);
    detail::keep_top(pool, std::move(cand), cap);
  };

  if (pieces <= 3) {
    // The exhaustive sweep runs off a precomputed node pair table.
    const GridFunction* grid_backed = w.grid();
    std::vector<double> table;
    if (grid_backed != nullptr && grid_backed->grid == value_grid) {
      table = grid_backed->values;
    } else {
      table.resize(nv * nv);
      for (std::size_t a = 0; a < nv; ++a)
        for (std::size_t b = 0; b < nv; ++b)
          table[a * nv + b] = w(value_grid.coord(a), value_grid.coord(b));
    }
    evaluations += nv * nv;

    const std::size_t m = pieces;
    const double frac = 1.0 / static_cast<double>(m);
    const double scale = opts.omega * opts.omega * frac * frac;
    auto offer_idx = [&](const std::size_t* idx) {
      if (opts.mean) {
        double sum = 0.0;
        for (std::size_t k = 0; k < m; ++k) sum += value_grid.coord(idx[k]);
        const double want = static_cast<double>(m) * *opts.mean;
        if (std::fabs(sum - want) >
            static_cast<double>(m) * window + 1e-13 * (1.0 + std::fabs(want)))
          return;
      }
      std::array<double, 9> terms{};
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) terms[i * m + j] = table[idx[i] * nv + idx[j]];
      ++evaluations;
      const double obj = scale * pairwise_sum({terms.data(), m * m});
      if (pool.size() == cap && obj > pool.back().obj) return;
      detail::Candidate cand;
      cand.obj = obj;
      cand.vals.resize(m);
      for (std::size_t k = 0; k < m; ++k) cand.vals[k] = value_grid.coord(idx[k]);
      detail::keep_top(pool, std::move(cand), cap);
    };
    std::size_t idx[3] = {0, 0, 0};
    for (std::size_t a = 0; a < nv; ++a) {
      idx[0] = a;
      if (m == 1) {
        offer_idx(idx);
        continue;
      }
      for (std::size_t b = a; b < nv; ++b) {
        idx[1] = b;
        if (m == 2) {
          offer_idx(idx);
          continue;
        }
        for (std::size_t c = b; c < nv; ++c) {
          idx[2] = c;
          offer_idx(idx);
        }
      }
    }
  } else {
    for (std::size_t a = 0; a < nv; ++a)
      offer_vals(std::vector<double>(pieces, value_grid.coord(a)));
    // Duplicate optimal assignments of proper divisors; they realize the
    // same value distribution with more pieces.
    for (std::size_t d : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
      if (d >= pieces || pieces % d != 0) continue;
      MinimizeOptions sub = opts;
      auto part = minimize_discrete(w, value_grid, d, sub);
      evaluations += part.evaluations;
      std::vector<double> vals;
      for (double v : part.best_field.values)
        vals.insert(vals.end(), pieces / d, v);
      offer_vals(std::move(vals));
    }
    {
      MinimizeOptions sub = opts;
      auto part = minimize_discrete(w, value_grid, pieces - 1, sub);
      evaluations += part.evaluations;
      for (std::size_t a = 0; a < nv; ++a) {
        std::vector<double> vals = part.best_field.values;
        vals.push_back(value_grid.coord(a));
        offer_vals(std::move(vals));
      }
    }
  }

  detail::Candidate best;
  for (const auto& seed : pool) {
    detail::Candidate cur = seed;
    double step = h;
    cur = detail::coordinate_descent(w, std::move(cur), step, value_grid, opts.omega, opts.mean,
                                     window, evaluations);
    for (std::size_t round = 0; round < opts.refine_rounds; ++round) {
      step *= 0.5;
      cur = detail::coordinate_descent(w, std::move(cur), step, value_grid, opts.omega, opts.mean,
                                       window, evaluations);
    }
    if (cur.beats(best)) best = std::move(cur);
  }
  if (best.vals.empty()) throw std::invalid_argument("minimize_discrete: no admissible assignment");

  report.best_value = best.obj;
  report.evaluations = evaluations;
  report.best_field = PiecewiseConstantField(
      best.vals, std::vector<double>(pieces, 1.0 / static_cast<double>(pieces)), opts.omega);
  if (const GridFunction* g = w.grid()) {
    const MinBounds mb = min_bounds(*g, opts.omega);
    report.lower_bound = mb.lower;
    report.diagonal_upper_bound = mb.upper;
  } else {
    double full = std::numeric_limits<double>::infinity();
    double diag = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nv; ++i) {
      const double x = value_grid.coord(i);
      diag = std::min(diag, w(x, x));
      for (std::size_t j = 0; j < nv; ++j) full = std::min(full, w(x, value_grid.coord(j)));
    }
    report.lower_bound = opts.omega * opts.omega * full;
    report.diagonal_upper_bound = opts.omega * opts.omega * diag;
  }
  return report;
}

namespace detail {

inline std::vector<double> sorted_values(std::vector<double> a) {
  if (a.empty()) throw std::invalid_argument("zigzag: empty oscillation value set");
  for (double v : a)
    if (!std::isfinite(v)) throw std::invalid_argument("zigzag: non-finite oscillation value");
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

// Splits one piece (t, lambda) into 2j sub-pieces oscillating between the
// two neighbors of t in A, with weights chosen so every consecutive pair
// averages back to t.  Values already in A stay untouched.
inline void append_zigzag(double t, double lambda, const std::vector<double>& a, std::size_t j,
                          PiecewiseConstantField& out) {
  const double eps = 1e-12 * (1.0 + std::fabs(t));
  auto it = std::lower_bound(a.begin(), a.end(), t);
  if (it != a.end() && std::fabs(*it - t) <= eps) {
    out.values.push_back(*it);
    out.fractions.push_back(lambda);
    return;
  }
  if (it == a.begin() || it == a.end())
    throw std::invalid_argument("zigzag: target value " + std::to_string(t) +
                                " lies outside the hull of the oscillation set");
  const double lo = *(it - 1), hi = *it;
  const double mu = (hi - t) / (hi - lo);
  const double w_lo = mu * lambda / static_cast<double>(j);
  const double w_hi = (1.0 - mu) * lambda / static_cast<double>(j);
  for (std::size_t k = 0; k < j; ++k) {
    out.values.push_back(lo);
    out.fractions.push_back(w_lo);
    out.values.push_back(hi);
    out.fractions.push_back(w_hi);
  }
}

}  // namespace detail

// Oscillating refinement: every piece of v is split into 2j alternating
// sub-pieces with values in A and unchanged block averages.
inline PiecewiseConstantField zigzag_sequence(const PiecewiseConstantField& v,
                                              std::vector<double> a, std::size_t j) {
  v.validate();
  if (j == 0) throw std::invalid_argument("zigzag_sequence: refinement index must be positive");
  const std::vector<double> sorted = detail::sorted_values(std::move(a));
  PiecewiseConstantField out;
  out.omega_measure = v.omega_measure;
  for (std::size_t k = 0; k < v.pieces(); ++k)
    detail::append_zigzag(v.values[k], v.fractions[k], sorted, j, out);
  out.validate();
  return out;
}

struct RecoveryReport {
  PiecewiseConstantField field;
  double value = 0.0;     // I_W of the oscillating field
  double sc_value = 0.0;  // I of the separately convex envelope at v
  double error = 0.0;
  std::size_t refinement = 0;
};

// For W = dist_q(., A x A)^p the envelope integral at v is attained by
// zigzagging the pieces of v inside the hull of A: the refined fields keep
// I_W equal to the envelope value while converging weakly to v.
inline RecoveryReport recovery_sequence_cartesian(const PiecewiseConstantField& v,
                                                  std::vector<double> a, Norm q, double p,
                                                  std::size_t j) {
  v.validate();
  if (j == 0) throw std::invalid_argument("recovery_sequence_cartesian: refinement index must be positive");
  if (!(p >= 1.0)) throw std::invalid_argument("recovery_sequence_cartesian: need p >= 1");
  const std::vector<double> sorted = detail::sorted_values(std::move(a));
  const ExactSet k_set = ProductPoints{sorted};
  const ExactSet hull_set = ProductInterval{sorted.front(), sorted.back()};
  const double eps = 1e-12;

  RecoveryReport rep;
  rep.refinement = j;
  rep.field.omega_measure = v.omega_measure;
  for (std::size_t k = 0; k < v.pieces(); ++k) {
    const double t = v.values[k];
    if (t >= sorted.front() - eps && t <= sorted.back() + eps)
      detail::append_zigzag(std::min(std::max(t, sorted.front()), sorted.back()), v.fractions[k],
                            sorted, j, rep.field);
    else {
      rep.field.values.push_back(t);
      rep.field.fractions.push_back(v.fractions[k]);
    }
  }
  rep.field.validate();

  const Integrand w_rule([&k_set, q, p](double x, double y) {
    return std::pow(distance(k_set, x, y, q), p);
  });
  const Integrand w_sc_rule([&hull_set, q, p](double x, double y) {
    return std::pow(distance(hull_set, x, y, q), p);
  });
  rep.value = eval_double_integral(w_rule, rep.field);
  rep.sc_value = eval_double_integral(w_sc_rule, v);
  rep.error = std::fabs(rep.value - rep.sc_value);
  return rep;
}

enum class Verdict { holds, fails, not_applicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::not_applicable: return "not_applicable";
  }
  return "unknown";
}

struct MinhatReport {
  Verdict verdict = Verdict::not_applicable;
  double min_w = 0.0;
  double min_w_hat = 0.0;
  double min_w_hat_sc = 0.0;  // min over the diagonalized sc-envelope
  bool sc_converged = false;
  double tol = 0.0;
};

// Necessary condition for the relaxation to be the sc-envelope integral when
// the diagonal penalty is active (min W-hat > min W): the diagonalized
// sc-envelope must also carry a positive gap over min W.
inline MinhatReport check_minhat_condition(const GridFunction& w, double tol = -1.0) {
  MinhatReport rep;
  rep.tol = tol < 0.0 ? default_sc_tol(w) : tol;
  rep.min_w = grid_min(w).value;
  rep.min_w_hat = grid_min(diagonalize_function(w)).value;
  const ScEnvelope sc = separately_convex_envelope(w);
  rep.sc_converged = sc.converged;
  rep.min_w_hat_sc = grid_min(diagonalize_function(sc.value)).value;
  if (!(rep.min_w_hat > rep.min_w + rep.tol)) {
    rep.verdict = Verdict::not_applicable;
    return rep;
  }
  rep.verdict = rep.min_w_hat_sc > rep.min_w + rep.tol ? Verdict::holds : Verdict::fails;
  return rep;
}

struct NessReport {
  Verdict verdict = Verdict::not_applicable;
  double min_w = 0.0;
  double min_w_hat = 0.0;
  bool sc_converged = false;
  double level_eps = 0.0;
  GridSet lhs;          // diagonalized minimum level set of the sc-envelope
  GridSet rhs;          // separately convex hull of the diagonalized minimum level set of W
  GridSet rhs_pieces;   // union of square hulls of the maximal Cartesian pieces
  bool lhs_equals_rhs = false;
  bool lhs_equals_pieces = false;
  std::size_t diff_cells = 0;
  std::vector<std::pair<std::size_t, std::size_t>> sample_diff;
};

// Zero-diagonal necessary condition: with min W = min W-hat, relaxation to
// the sc-envelope integral forces the diagonalized minimum level set of the
// sc-envelope to coincide with the separately convex hull of the
// diagonalized minimum level set of W (equivalently, with the union of
// square hulls of the maximal Cartesian pieces).
inline NessReport check_ness_condition(const GridFunction& w, double tol = -1.0) {
  NessReport rep;
  const double use_tol = tol < 0.0 ? default_sc_tol(w) : tol;
  rep.min_w = grid_min(w).value;
  rep.min_w_hat = grid_min(diagonalize_function(w)).value;
  if (rep.min_w_hat > rep.min_w + use_tol) {
    rep.verdict = Verdict::not_applicable;
    return rep;
  }
  rep.level_eps = default_level_eps(rep.min_w);
  const ScEnvelope sc = separately_convex_envelope(w);
  rep.sc_converged = sc.converged;
  const GridSet zero_w = level_set(w, rep.min_w, rep.level_eps);
  const GridSet zero_sc = level_set(sc.value, rep.min_w, rep.level_eps);
  rep.lhs = diagonalize_set(zero_sc);
  rep.rhs = separately_convex_hull_set(diagonalize_set(zero_w));
  rep.rhs_pieces = relaxed_cartesian_union(zero_w);
  rep.lhs_equals_rhs = rep.lhs.mask == rep.rhs.mask;
  rep.lhs_equals_pieces = rep.lhs.mask == rep.rhs_pieces.mask;
  const std::size_t n = w.grid.n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (rep.lhs.test(i, j) != rep.rhs.test(i, j)) {
        ++rep.diff_cells;
        if (rep.sample_diff.size() < 8) rep.sample_diff.emplace_back(i, j);
      }
  rep.verdict = rep.lhs_equals_rhs ? Verdict::holds : Verdict::fails;
  return rep;
}

struct GapReport {
  double p = 1.0;
  double omega1_fraction = 0.5;
  std::size_t pieces_per_region = 1;
  double target = 0.0;  // envelope integral of the two-valued limit field
  double best_value = 0.0;
  double delta = 0.0;
  double e11 = 0.0, e22 = 0.0, e12 = 0.0;  // best_value = e11 + e22 + 2 e12
  std::vector<double> region1, region2;
  bool exhaustive = false;
  std::size_t evaluations = 0;
};

namespace detail {

struct GapObjective {
  double total = 0.0, e11 = 0.0, e22 = 0.0, e12 = 0.0;
};

template <class Rule>
GapObjective gap_objective(const Rule& w, const std::vector<double>& r1,
                           const std::vector<double>& r2, double f, std::size_t& evaluations) {
  const auto n1 = static_cast<double>(r1.size());
  const auto n2 = static_cast<double>(r2.size());
  std::vector<double> t11(r1.size() * r1.size()), t22(r2.size() * r2.size()),
      t12(r1.size() * r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i)
    for (std::size_t j = 0; j < r1.size(); ++j) t11[i * r1.size() + j] = w(r1[i], r1[j]);
  for (std::size_t i = 0; i < r2.size(); ++i)
    for (std::size_t j = 0; j < r2.size(); ++j) t22[i * r2.size() + j] = w(r2[i], r2[j]);
  for (std::size_t i = 0; i < r1.size(); ++i)
    for (std::size_t j = 0; j < r2.size(); ++j) t12[i * r2.size() + j] = w(r1[i], r2[j]);
  ++evaluations;
  GapObjective out;
  const double a = f / n1, b = (1.0 - f) / n2;
  out.e11 = a * a * pairwise_sum(t11);
  out.e22 = b * b * pairwise_sum(t22);
  out.e12 = a * b * pairwise_sum(t12);
  out.total = out.e11 + out.e22 + 2.0 * out.e12;
  return out;
}

// Multisets of `size` grid node indices whose value sum equals size*target
// exactly (up to roundoff); these are the admissible region assignments.
inline std::vector<std::vector<std::size_t>> exact_mean_multisets(const ScalarGrid& grid,
                                                                  std::size_t size,
                                                                  double target) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(size);
  const double want = static_cast<double>(size) * target;
  const double eps = 1e-9 * (1.0 + std::fabs(want));
  auto emit = [&](auto&& self, std::size_t depth, std::size_t from, double sum) -> void {
    if (depth == size) {
      if (std::fabs(sum - want) <= eps) out.push_back(cur);
      return;
    }
    for (std::size_t k = from; k < grid.n; ++k) {
      cur[depth] = k;
      self(self, depth + 1, k, sum + grid.coord(k));
    }
  };
  emit(emit, 0, 0, 0.0);
  return out;
}

}  // namespace detail

// Two-region oscillation experiment on the 1-norm unit sphere integrand:
// region 1 (fraction f) must average to 1, the rest to 0.  The reported
// target is the envelope integral of the limit field; `delta` is the excess
// of the best N-piece-per-region field over it.  Region means are enforced
// exactly, matching the fixed weak limit.
inline GapReport gap_experiment_diamond_boundary(double p, std::size_t pieces_per_region,
                                                 const ScalarGrid& value_grid, double f = 0.5,
                                                 std::size_t refine_rounds = 2) {
  if (pieces_per_region == 0 || pieces_per_region > 6)
    throw std::invalid_argument("gap_experiment_diamond_boundary: pieces_per_region must be 1..6");
  if (!(f > 0.0 && f < 1.0))
    throw std::invalid_argument("gap_experiment_diamond_boundary: region fraction must be in (0,1)");
  if (!(p >= 1.0))
    throw std::invalid_argument("gap_experiment_diamond_boundary: need p >= 1");

  const ExactSet sphere = norm_sphere_l1(1.0);
  auto w = [&sphere, p](double x, double y) {
    return std::pow(distance(sphere, x, y, Norm::l1), p);
  };

  GapReport rep;
  rep.p = p;
  rep.omega1_fraction = f;
  rep.pieces_per_region = pieces_per_region;
  rep.exhaustive = pieces_per_region <= 3;

  {
    const ExactSet ball = ConvexPolygon{{{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}}};
    const Integrand envelope_rule(
        [&ball, p](double x, double y) { return std::pow(distance(ball, x, y, Norm::l1), p); });
    rep.target = eval_double_integral(envelope_rule,
                                      PiecewiseConstantField({1.0, 0.0}, {f, 1.0 - f}));
  }

  std::size_t evaluations = 0;
  const std::size_t nn = pieces_per_region;
  std::vector<double> best1, best2;
  detail::GapObjective best{};
  bool have = false;
  auto tie_key = [](const std::vector<double>& a, const std::vector<double>& b) {
    return detail::Candidate::abs_sum(a) + detail::Candidate::abs_sum(b);
  };
  auto offer = [&](std::vector<double> r1, std::vector<double> r2) {
    std::sort(r1.begin(), r1.end());
    std::sort(r2.begin(), r2.end());
    const auto obj = detail::gap_objective(w, r1, r2, f, evaluations);
    const bool better =
        !have || obj.total < best.total ||
        (obj.total == best.total &&
         (tie_key(r1, r2) < tie_key(best1, best2) ||
          (tie_key(r1, r2) == tie_key(best1, best2) && std::tie(r1, r2) < std::tie(best1, best2))));
    if (better) {
      best = obj;
      best1 = std::move(r1);
      best2 = std::move(r2);
      have = true;
    }
  };

  if (nn <= 3) {
    const auto cands1 = detail::exact_mean_multisets(value_grid, nn, 1.0);
    const auto cands2 = detail::exact_mean_multisets(value_grid, nn, 0.0);
    if (cands1.empty() || cands2.empty())
      throw std::invalid_argument("gap_experiment_diamond_boundary: no admissible assignment on this value grid");
    const std::size_t nv = value_grid.n;
    std::vector<double> table(nv * nv);
    for (std::size_t a = 0; a < nv; ++a)
      for (std::size_t b = 0; b < nv; ++b)
        table[a * nv + b] = w(value_grid.coord(a), value_grid.coord(b));
    evaluations += nv * nv;
    auto internal_sum = [&](const std::vector<std::size_t>& idx) {
      std::array<double, 9> terms{};
      for (std::size_t i = 0; i < nn; ++i)
        for (std::size_t j = 0; j < nn; ++j) terms[i * nn + j] = table[idx[i] * nv + idx[j]];
      return pairwise_sum({terms.data(), nn * nn});
    };
    std::vector<double> int1(cands1.size()), int2(cands2.size());
    for (std::size_t k = 0; k < cands1.size(); ++k) int1[k] = internal_sum(cands1[k]);
    for (std::size_t k = 0; k < cands2.size(); ++k) int2[k] = internal_sum(cands2[k]);
    const double a = f / static_cast<double>(nn), b = (1.0 - f) / static_cast<double>(nn);
    double best_total = std::numeric_limits<double>::infinity();
    std::size_t best_k1 = 0, best_k2 = 0;
    for (std::size_t k1 = 0; k1 < cands1.size(); ++k1)
      for (std::size_t k2 = 0; k2 < cands2.size(); ++k2) {
        std::array<double, 9> terms{};
        for (std::size_t i = 0; i < nn; ++i)
          for (std::size_t j = 0; j < nn; ++j)
            terms[i * nn + j] = table[cands1[k1][i] * nv + cands2[k2][j]];
        ++evaluations;
        const double cross = pairwise_sum({terms.data(), nn * nn});
        const double total = a * a * int1[k1] + b * b * int2[k2] + 2.0 * (a * b * cross);
        // Earliest index pair wins ties; candidate enumeration is ordered,
        // so the witness is reproducible.
        if (total < best_total) {
          best_total = total;
          best_k1 = k1;
          best_k2 = k2;
        }
      }
    std::vector<double> r1(nn), r2(nn);
    for (std::size_t k = 0; k < nn; ++k) {
      r1[k] = value_grid.coord(cands1[best_k1][k]);
      r2[k] = value_grid.coord(cands2[best_k2][k]);
    }
    offer(std::move(r1), std::move(r2));
  } else {
    for (std::size_t d : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
      if (d >= nn || nn % d != 0) continue;
      GapReport part = gap_experiment_diamond_boundary(p, d, value_grid, f, refine_rounds);
      evaluations += part.evaluations;
      std::vector<double> r1, r2;
      for (double v : part.region1) r1.insert(r1.end(), nn / d, v);
      for (double v : part.region2) r2.insert(r2.end(), nn / d, v);
      offer(std::move(r1), std::move(r2));
    }
    offer(std::vector<double>(nn, 1.0), std::vector<double>(nn, 0.0));
  }

  // Mean-preserving refinement: opposite pair steps inside one region.
  double step = value_grid.spacing();
  for (std::size_t round = 0; round <= refine_rounds; ++round) {
    bool improved = true;
    std::size_t guard = 0;
    while (improved && guard++ < 500) {
      improved = false;
      auto try_region = [&](bool first) {
        const std::vector<double>& base = first ? best1 : best2;
        for (std::size_t k = 0; k < nn; ++k)
          for (std::size_t l = 0; l < nn; ++l) {
            if (k == l) continue;
            std::vector<double> vals = base;
            vals[k] += step;
            vals[l] -= step;
            bool ok = true;
            for (double v : vals)
              if (!value_grid.contains(v)) ok = false;
            if (!ok) continue;
            std::sort(vals.begin(), vals.end());
            const auto obj = first ? detail::gap_objective(w, vals, best2, f, evaluations)
                                   : detail::gap_objective(w, best1, vals, f, evaluations);
            if (obj.total < best.total) {
              best = obj;
              (first ? best1 : best2) = std::move(vals);
              improved = true;
            }
          }
      };
      try_region(true);
      try_region(false);
    }
    step *= 0.5;
  }

  rep.best_value = best.total;
  rep.e11 = best.e11;
  rep.e22 = best.e22;
  rep.e12 = best.e12;
  rep.delta = rep.best_value - rep.target;
  rep.region1 = std::move(best1);
  rep.region2 = std::move(best2);
  rep.evaluations = evaluations;
  return rep;
}

struct FourWellReport {
  double p = 2.0;
  ScalarGrid grid;
  double min_w = 0.0;
  double min_w_hat = 0.0;
  bool minima_exact = false;      // min W == 0 and min W-hat == 1, exact
  double max_outside_diff_sc = 0.0;
  double max_outside_diff_co = 0.0;
  bool outside_match = false;     // W, sc- and convex envelope agree off (-1,1)^2
  MinhatReport minhat;            // expected verdict: fails
  std::vector<double> discrete_minima;
  double positivity_margin = 0.0;  // smallest discrete minimum
  double sc_min_value = 0.0;       // discrete minimum of the sc-envelope
  std::vector<double> sc_min_field;
  std::size_t hat_formula_mismatch_cells = 0;  // vs dist_inf(., [-1,1]^2)^p + 1
  bool ok = false;
};

// Full diagnostic chain for the four-point well set {(+-1,0),(0,+-1)} with
// the 1-norm distance integrand.
inline FourWellReport verify_four_well(double p = 2.0,
                                       const ScalarGrid& grid = ScalarGrid(-3.0, 3.0, 193),
                                       std::size_t max_pieces = 4) {
  FourWellReport rep;
  rep.p = p;
  rep.grid = grid;
  const ExactSet wells =
      PointList{{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}};
  const GridFunction w = distance_integrand(grid, wells, Norm::l1, p);
  const GridFunction w_hat = diagonalize_function(w);
  rep.min_w = grid_min(w).value;
  rep.min_w_hat = grid_min(w_hat).value;
  rep.minima_exact = rep.min_w == 0.0 && rep.min_w_hat == 1.0;

  const ScEnvelope sc = separately_convex_envelope(w);
  const GridFunction co = convex_envelope(w);
  const double tol = default_sc_tol(w);
  const GridSet interior = untainted_mask(grid);
  for (std::size_t i = 0; i < grid.n; ++i)
    for (std::size_t j = 0; j < grid.n; ++j) {
      if (!interior.test(i, j)) continue;
      if (std::max(std::fabs(grid.coord(i)), std::fabs(grid.coord(j))) < 1.0) continue;
      rep.max_outside_diff_sc = std::max(rep.max_outside_diff_sc,
                                         std::fabs(w.at(i, j) - sc.value.at(i, j)));
      rep.max_outside_diff_co = std::max(rep.max_outside_diff_co,
                                         std::fabs(w.at(i, j) - co.at(i, j)));
    }
  rep.outside_match = rep.max_outside_diff_sc <= tol && rep.max_outside_diff_co <= tol;

  rep.minhat = check_minhat_condition(w);

  for (std::size_t pieces = 1; pieces <= max_pieces; ++pieces) {
    auto run = minimize_discrete(Integrand([&wells, p](double x, double y) {
                                   return std::pow(distance(wells, x, y, Norm::l1), p);
                                 }),
                                 grid, pieces);
    rep.discrete_minima.push_back(run.best_value);
  }
  rep.positivity_margin = *std::min_element(rep.discrete_minima.begin(),
                                            rep.discrete_minima.end());

  auto sc_run = minimize_discrete(Integrand(sc.value), grid, 1);
  rep.sc_min_value = sc_run.best_value;
  rep.sc_min_field = sc_run.best_field.values;

  const ExactSet box = ProductInterval{-1.0, 1.0};
  for (std::size_t i = 0; i < grid.n; ++i)
    for (std::size_t j = 0; j < grid.n; ++j) {
      const double closed =
          std::pow(distance(box, grid.coord(i), grid.coord(j), Norm::linf), p) + 1.0;
      if (std::fabs(w_hat.at(i, j) - closed) > tol) ++rep.hat_formula_mismatch_cells;
    }

  rep.ok = rep.minima_exact && rep.outside_match && rep.minhat.verdict == Verdict::fails &&
           rep.positivity_margin > 0.0 && std::fabs(rep.sc_min_value) <= tol &&
           sc.converged;
  return rep;
}

}  // namespace nonlocal
