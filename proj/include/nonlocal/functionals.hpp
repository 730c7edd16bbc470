#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nonlocal/exact_sets.hpp"
#include "nonlocal/grid.hpp"
#include "nonlocal/parallel.hpp"
#include "nonlocal/set_ops.hpp"

namespace nonlocal {

// Integrand of the double integral: either an exact pair rule or a sampled
// grid (evaluated bilinearly, rejecting arguments outside the grid box).
class Integrand {
 public:
  Integrand(GridFunction w) : grid_(std::move(w)) {}
  Integrand(std::function<double(double, double)> rule) : rule_(std::move(rule)) {
    if (!rule_) throw std::invalid_argument("Integrand: empty rule");
  }

  double operator()(double xi, double zeta) const {
    return grid_ ? grid_->interpolate(xi, zeta) : rule_(xi, zeta);
  }

  const GridFunction* grid() const { return grid_ ? &*grid_ : nullptr; }

 private:
  std::optional<GridFunction> grid_;
  std::function<double(double, double)> rule_;
};

// I_W(u) = |Omega|^2 sum_{i,j} lambda_i lambda_j W(u_i, u_j) for piecewise
// constant u.  Terms are accumulated in row-major pair order through a fixed
// pairwise reduction tree, so the result is reproducible bit for bit.
inline double eval_double_integral(const Integrand& w, const PiecewiseConstantField& u) {
  u.validate();
  const std::size_t m = u.pieces();
  std::vector<double> terms(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      terms[i * m + j] = u.fractions[i] * u.fractions[j] * w(u.values[i], u.values[j]);
  return u.omega_measure * u.omega_measure * pairwise_sum(terms);
}

// Membership of a value pair in the constraint set, either as grid cells
// (nearest node, values outside the box excluded) or through the exact
// distance rule with a small slack.
class SetRule {
 public:
  SetRule(GridSet k) : grid_(std::move(k)) {}
  SetRule(ExactSet k, Norm q, double eps = -1.0)
      : exact_(std::move(k)), q_(q), eps_(eps) {}

  bool contains(double a, double b) const {
    if (grid_) {
      const ScalarGrid& g = grid_->grid;
      if (!g.contains(a) || !g.contains(b)) return false;
      return grid_->test(g.nearest(a), g.nearest(b));
    }
    const double eps = eps_ >= 0.0 ? eps_ : 1e-9 * (1.0 + std::fabs(a) + std::fabs(b));
    return distance(*exact_, a, b, q_) <= eps;
  }

  const GridSet* grid_set() const { return grid_ ? &*grid_ : nullptr; }

 private:
  std::optional<GridSet> grid_;
  std::optional<ExactSet> exact_;
  Norm q_ = Norm::l1;
  double eps_ = -1.0;
};

struct InclusionReport {
  bool ok = true;
  // Witness of the first failing pair, in piece indices and values.
  std::size_t piece_i = 0, piece_j = 0;
  double xi = 0.0, zeta = 0.0;
};

inline InclusionReport check_exact_inclusion(const SetRule& k, const PiecewiseConstantField& u) {
  u.validate();
  for (std::size_t i = 0; i < u.pieces(); ++i)
    for (std::size_t j = 0; j < u.pieces(); ++j)
      if (!k.contains(u.values[i], u.values[j]))
        return {false, i, j, u.values[i], u.values[j]};
  return {};
}

// Indicator value as a tagged marker: finite means 0, otherwise the list of
// violating piece pairs explains the +infinity.
struct IndicatorValue {
  bool finite = true;
  std::vector<std::pair<std::size_t, std::size_t>> violations;
};

inline IndicatorValue eval_indicator(const SetRule& k, const PiecewiseConstantField& u) {
  u.validate();
  IndicatorValue out;
  for (std::size_t i = 0; i < u.pieces(); ++i)
    for (std::size_t j = 0; j < u.pieces(); ++j)
      if (!k.contains(u.values[i], u.values[j])) {
        out.finite = false;
        out.violations.emplace_back(i, j);
      }
  return out;
}

struct RelaxedInclusionReport {
  bool ok = false;
  // Index into `pieces` of the first hull that contains every value.
  std::optional<std::size_t> witness;
  std::vector<CartesianPiece> pieces;
};

// Whether all values of u lie in [min A, max A] for some maximal Cartesian
// piece A of K.
inline RelaxedInclusionReport check_relaxed_inclusion(const GridSet& k,
                                                      const PiecewiseConstantField& u) {
  u.validate();
  RelaxedInclusionReport out;
  out.pieces = maximal_cartesian_subsets(k);
  for (std::size_t p = 0; p < out.pieces.size(); ++p) {
    const auto& piece = out.pieces[p];
    const double lo = k.grid.coord(piece.members.front());
    const double hi = k.grid.coord(piece.members.back());
    const double slack = 1e-12 * (1.0 + std::max(std::fabs(lo), std::fabs(hi)));
    bool all = true;
    for (double v : u.values)
      if (v < lo - slack || v > hi + slack) {
        all = false;
        break;
      }
    if (all) {
      out.ok = true;
      out.witness = p;
      break;
    }
  }
  return out;
}

inline IndicatorValue eval_relaxed_indicator(const GridSet& k, const PiecewiseConstantField& u) {
  IndicatorValue out;
  out.finite = check_relaxed_inclusion(k, u).ok;
  return out;
}

}  // namespace nonlocal
