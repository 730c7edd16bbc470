// Acceptance gate: one self-contained check per guaranteed behavior, one
// PASS/FAIL line each.  Exits nonzero if any check fails.  Tolerances are
// pinned here on purpose; loosening one is a contract change, not a tweak.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nonlocal/nonlocal.hpp"
#include "oracles.hpp"

namespace {

using namespace nonlocal;

constexpr double kEnvelopeErrorBound = 0.15;   // |co - analytic| at spacing 0.025
constexpr double kRefinementSlack = 1e-12;     // fine error may tie coarse up to this
constexpr double kRecoveryRelTol = 1e-12;      // |I_W(osc) - I_sc(v)| / (1 + |I_sc|)
constexpr double kSandwichRelTol = 1e-12;      // upper-bound side of the minimization sandwich

const PointList kWells{{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}};

PointList five_points() {
  PointList k = kWells;
  k.points.push_back({2.0, 2.0});
  return k;
}

std::vector<double> dyadic_fractions(std::mt19937& rng, std::size_t m) {
  // Sixteenths with positive integer counts; the sum is exactly one.
  std::vector<std::size_t> counts(m, 1);
  for (std::size_t extra = m; extra < 16; ++extra) ++counts[rng() % m];
  std::vector<double> out(m);
  for (std::size_t k = 0; k < m; ++k) out[k] = static_cast<double>(counts[k]) / 16.0;
  return out;
}

GridSet random_symmetric_mask(std::mt19937& rng, std::size_t n, double density) {
  GridSet e(ScalarGrid(0.0, static_cast<double>(n - 1), n));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      if (coin(rng) < density) {
        e.set(i, j);
        e.set(j, i);
      }
  return e;
}

std::vector<std::vector<std::size_t>> canonical_pieces(const std::vector<CartesianPiece>& ps) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(ps.size());
  for (const auto& p : ps) {
    auto m = p.members;
    std::sort(m.begin(), m.end());
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(),
            [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return a < b;
            });
  return out;
}

// ---------------------------------------------------------------------------

bool check_well_minima(std::string& detail) {
  const ScalarGrid g(-3.0, 3.0, 193);
  bool ok = true;
  for (double p : {1.0, 2.0}) {
    const GridFunction w = distance_integrand(g, kWells, Norm::l1, p);
    const GridFunction w_hat = diagonalize_function(w);
    ok = ok && grid_min(w).value == 0.0 && grid_min(w_hat).value == 1.0;
  }
  detail = "min W = 0 and min W-hat = 1, exact, p in {1,2}";
  return ok;
}

double envelope_error_against_hull(const PointList& k, double p, std::size_t n) {
  const ScalarGrid g(-3.0, 3.0, n);
  const GridFunction co = convex_envelope(distance_integrand(g, k, Norm::l1, p));
  const ConvexPolygon hull = convex_hull_of_points(k.points);
  const GridSet interior = untainted_mask(g);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!interior.test(i, j)) continue;
      const double exact = std::pow(distance(hull, g.coord(i), g.coord(j), Norm::l1), p);
      err = std::max(err, std::fabs(co.at(i, j) - exact));
    }
  return err;
}

bool check_envelope_distance(std::string& detail) {
  bool ok = true;
  std::ostringstream os;
  const char* names[] = {"four wells", "five points"};
  const PointList sets[] = {kWells, five_points()};
  for (int s = 0; s < 2; ++s) {
    const double fine = envelope_error_against_hull(sets[s], 2.0, 241);    // h = 0.025
    const double coarse = envelope_error_against_hull(sets[s], 2.0, 121);  // h = 0.05
    ok = ok && fine <= kEnvelopeErrorBound && fine <= coarse + kRefinementSlack;
    os << (s ? ", " : "") << names[s] << ": err " << fine << " (coarse " << coarse << ")";
  }
  detail = os.str();
  return ok;
}

bool check_sc_collapses_to_convex(std::string& detail) {
  bool ok = true;
  std::ostringstream os;
  for (const char* name : {"diamond-boundary", "cartesian"}) {
    const Scenario s = preset_scenario(name);
    const GridFunction w = scenario_integrand(s);
    const GridFunction co = convex_envelope(w);
    const ScEnvelope sc = separately_convex_envelope(w);
    const GridSet interior = untainted_mask(s.grid);
    double err = 0.0;
    for (std::size_t i = 0; i < s.grid.n; ++i)
      for (std::size_t j = 0; j < s.grid.n; ++j)
        if (interior.test(i, j))
          err = std::max(err, std::fabs(sc.value.at(i, j) - co.at(i, j)));
    ok = ok && sc.converged && err <= 2.0 * sc.tol;
    os << (std::string(name) == "cartesian" ? ", " : "") << name << ": |sc-co| " << err
       << " vs 2 tol " << 2.0 * sc.tol;
  }
  detail = os.str();
  return ok;
}

bool check_level_law(std::string& detail) {
  bool ok = true;
  std::size_t checked = 0;
  for (const std::string& name : preset_names()) {
    const GridFunction w = scenario_integrand(preset_scenario(name));
    const GridFunction w_hat = diagonalize_function(w);
    double lo = w.values[0], hi = w.values[0];
    for (double v : w.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (int k = 0; k < 20; ++k) {
      const double c = lo + (hi - lo) * static_cast<double>(k + 1) / 21.0;
      ok = ok && level_set(w_hat, c) == diagonalize_set(level_set(w, c));
      ++checked;
    }
  }
  detail = std::to_string(checked) + " level sets across all presets, cell-for-cell";
  return ok;
}

bool check_piece_enumeration(std::string& detail) {
  std::mt19937 rng(20260814);
  std::uniform_real_distribution<double> dens(0.1, 0.9);
  bool ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 14;
    const GridSet e = random_symmetric_mask(rng, n, dens(rng));
    const auto pieces = maximal_cartesian_subsets(e);
    ok = ok && canonical_pieces(pieces) == oracles::brute_force_pieces(e);
    ok = ok && oracles::square_union(e.grid, pieces) == diagonalize_set(e);
  }
  detail = "200 random symmetric masks up to 15x15, exact piece lists and square unions";
  return ok;
}

bool check_condition_verdicts(std::string& detail) {
  const auto integrand = [](const char* name) {
    return scenario_integrand(preset_scenario(name));
  };
  const MinhatReport minhat = check_minhat_condition(integrand("four-well"));
  const NessReport five = check_ness_condition(integrand("five-point"));
  const NessReport diamond = check_ness_condition(integrand("diamond-boundary"));
  const NessReport cart = check_ness_condition(integrand("cartesian"));
  const bool ok = minhat.verdict == Verdict::fails && five.verdict == Verdict::fails &&
                  diamond.verdict == Verdict::holds && cart.verdict == Verdict::holds;
  std::ostringstream os;
  os << "minhat(four-well)=" << to_string(minhat.verdict)
     << " ness(five-point)=" << to_string(five.verdict)
     << " ness(diamond)=" << to_string(diamond.verdict)
     << " ness(cartesian)=" << to_string(cart.verdict);
  detail = os.str();
  return ok;
}

bool check_recovery_identity(std::string& detail) {
  std::mt19937 rng(4812);
  std::uniform_real_distribution<double> val(-2.5, 2.5);
  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + trial % 4;
    std::vector<double> vals(m);
    for (double& v : vals) v = val(rng);
    const PiecewiseConstantField u(vals, dyadic_fractions(rng, m));
    const Norm q = trial % 3 == 0 ? Norm::l1 : (trial % 3 == 1 ? Norm::l2 : Norm::linf);
    const double p = trial % 2 == 0 ? 1.0 : 2.0;
    for (std::size_t j : {1u, 2u, 4u, 8u}) {
      const RecoveryReport rep = recovery_sequence_cartesian(u, {-1.0, 1.0}, q, p, j);
      const double rel = rep.error / (1.0 + std::fabs(rep.sc_value));
      worst = std::max(worst, rel);
      ok = ok && rel <= kRecoveryRelTol;
    }
  }
  std::ostringstream os;
  os << "50 targets x 4 refinements, worst relative error " << worst;
  detail = os.str();
  return ok;
}

bool check_two_region_gap(std::string& detail) {
  const ScalarGrid value_grid(-3.0, 3.0, 49);
  bool ok = true;
  double min_delta = std::numeric_limits<double>::infinity();
  for (double p : {1.0, 2.0})
    for (std::size_t n = 1; n <= 6; ++n) {
      const GapReport rep = gap_experiment_diamond_boundary(p, n, value_grid);
      ok = ok && rep.target == 0.25 && rep.delta > 0.0;
      if (n == 1 && p == 1.0) ok = ok && rep.best_value == 0.5;
      min_delta = std::min(min_delta, rep.delta);
    }
  std::ostringstream os;
  os << "target 0.25 exact, delta > 0 for N in 1..6 and p in {1,2}; min delta " << min_delta;
  detail = os.str();
  return ok;
}

bool check_minimization_sandwich(std::string& detail) {
  bool ok = true;
  for (const std::string& name : preset_names()) {
    const Scenario s = preset_scenario(name);
    const Integrand w(scenario_integrand(s));
    for (std::size_t n : {1u, 2u, 3u}) {
      const MinimizationReport rep = minimize_discrete(w, s.grid, n);
      const double slack = kSandwichRelTol * (1.0 + std::fabs(rep.diagonal_upper_bound));
      ok = ok && rep.lower_bound <= rep.best_value &&
           rep.best_value <= rep.diagonal_upper_bound + slack;
    }
  }

  const Scenario four = preset_scenario("four-well");
  const GridFunction w4 = scenario_integrand(four);
  const Integrand rule(w4);
  double delta0 = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= 6; ++n)
    delta0 = std::min(delta0, minimize_discrete(rule, four.grid, n).best_value);
  ok = ok && delta0 > 0.0;

  const ScEnvelope sc = separately_convex_envelope(w4);
  const MinimizationReport relaxed = minimize_discrete(Integrand(sc.value), four.grid, 1);
  ok = ok && relaxed.best_value == 0.0 && relaxed.best_field.values.size() == 1 &&
       relaxed.best_field.values[0] == 0.0;

  std::ostringstream os;
  os << "bounds hold on all presets for N in 1..3; four-well delta0 " << delta0
     << ", sc-envelope minimum " << relaxed.best_value << " at u = 0";
  detail = os.str();
  return ok;
}

bool check_indicator_relaxation(std::string& detail) {
  std::mt19937 rng(9271);
  bool ok = true;
  std::size_t agreements = 0;
  for (const std::string& name : preset_names()) {
    const Scenario s = preset_scenario(name);
    const GridSet zero = scenario_zero_set(s);
    const GridSet relaxed = relaxed_cartesian_union(zero);
    const SetRule rule(relaxed);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t m = 1 + rng() % 4;
      std::vector<double> vals(m);
      for (double& v : vals) {
        // Half the draws stay inside [-1,1] so both outcomes are exercised.
        const bool inner = rng() % 2 == 0;
        v = s.grid.coord(inner ? 64 + rng() % 65 : rng() % s.grid.n);
      }
      const PiecewiseConstantField u(vals, dyadic_fractions(rng, m));
      const bool a = eval_relaxed_indicator(zero, u).finite;
      const bool b = eval_indicator(rule, u).finite;
      ok = ok && a == b;
      agreements += a == b;
    }
    if (name == "diamond-boundary") {
      GridSet square(s.grid);
      for (std::size_t i = 0; i < s.grid.n; ++i)
        for (std::size_t j = 0; j < s.grid.n; ++j)
          if (std::fabs(s.grid.coord(i)) <= 0.5 && std::fabs(s.grid.coord(j)) <= 0.5)
            square.set(i, j);
      ok = ok && relaxed == square;
    }
  }
  detail = std::to_string(agreements) +
           "/500 indicator agreements; diamond relaxed set is [-1/2,1/2]^2";
  return ok;
}

}  // namespace

int main() {
  struct Item {
    const char* name;
    bool (*run)(std::string&);
  };
  const Item items[] = {
      {"four-well-minima", check_well_minima},
      {"convex-envelope-distance", check_envelope_distance},
      {"sc-collapses-to-convex", check_sc_collapses_to_convex},
      {"diagonalization-level-law", check_level_law},
      {"maximal-piece-enumeration", check_piece_enumeration},
      {"condition-verdicts", check_condition_verdicts},
      {"recovery-identity", check_recovery_identity},
      {"two-region-gap", check_two_region_gap},
      {"minimization-sandwich", check_minimization_sandwich},
      {"indicator-relaxation", check_indicator_relaxation},
  };

  int failures = 0;
  int index = 0;
  for (const Item& item : items) {
    ++index;
    std::string detail;
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = item.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %-28s %s  [%.1fs]\n", ok ? "PASS" : "FAIL", index, item.name,
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) std::printf("%d of 10 checks failed\n", failures);
  return failures == 0 ? 0 : 1;
}
