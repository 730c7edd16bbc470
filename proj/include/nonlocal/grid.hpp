#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nonlocal/parallel.hpp"

namespace nonlocal {

// Uniform one-dimensional grid shared by both axes of the (xi, zeta) value
// plane.  All discretized objects below live on the induced n x n cell grid.
struct ScalarGrid {
  double lo = -3.0;
  double hi = 3.0;
  std::size_t n = 241;

  ScalarGrid() = default;

  ScalarGrid(double lo_, double hi_, std::size_t n_) : lo(lo_), hi(hi_), n(n_) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw std::invalid_argument("ScalarGrid: endpoints must be finite with lo < hi");
    if (n < 2) throw std::invalid_argument("ScalarGrid: need at least 2 points per axis");
  }

  double spacing() const { return (hi - lo) / static_cast<double>(n - 1); }

  // Node i as a convex combination of the endpoints.  Unlike lo + i*h this
  // reproduces dyadic nodes (0, +-1/2, +-1, ...) exactly in floating point,
  // which the exact-equality checks downstream rely on.
  double coord(std::size_t i) const {
    const double k = static_cast<double>(n - 1);
    const double t = static_cast<double>(i);
    return (lo * (k - t) + hi * t) / k;
  }

  bool contains(double x) const { return x >= lo && x <= hi; }

  // Index of the node closest to x (ties toward the lower index).
  std::size_t nearest(double x) const {
    const double pos = (x - lo) / spacing();
    if (pos <= 0.0) return 0;
    if (pos >= static_cast<double>(n - 1)) return n - 1;
    const auto below = static_cast<std::size_t>(pos);
    const std::size_t above = below + 1;
    return (x - coord(below) <= coord(above) - x) ? below : above;
  }

  bool operator==(const ScalarGrid&) const = default;
};

// Scalar function sampled at the grid nodes of the value plane, row-major
// with the xi index as the row.  `symmetric` asserts exact equality with the
// transpose; operations that preserve symmetry keep the flag.
struct GridFunction {
  ScalarGrid grid;
  std::vector<double> values;
  bool symmetric = false;

  GridFunction() = default;

  GridFunction(const ScalarGrid& g, double fill = 0.0)
      : grid(g), values(g.n * g.n, fill), symmetric(true) {}

  double& at(std::size_t i, std::size_t j) { return values[i * grid.n + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * grid.n + j]; }

  bool is_transpose_equal() const {
    for (std::size_t i = 0; i < grid.n; ++i)
      for (std::size_t j = i + 1; j < grid.n; ++j)
        if (at(i, j) != at(j, i)) return false;
    return true;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
  }

  // Bilinear interpolation inside the grid box; evaluation outside is a
  // contract violation and is rejected with the offending coordinate.
  double interpolate(double x, double y) const {
    if (!grid.contains(x) || !grid.contains(y))
      throw std::invalid_argument("GridFunction: point (" + std::to_string(x) + ", " +
                                  std::to_string(y) + ") lies outside the grid box [" +
                                  std::to_string(grid.lo) + ", " + std::to_string(grid.hi) + "]^2");
    const double h = grid.spacing();
    auto locate = [&](double v) {
      double pos = (v - grid.lo) / h;
      auto cell = static_cast<std::size_t>(pos);
      if (cell >= grid.n - 1) cell = grid.n - 2;
      double frac = (v - grid.coord(cell)) / h;
      if (frac < 0.0) frac = 0.0;
      if (frac > 1.0) frac = 1.0;
      return std::pair<std::size_t, double>{cell, frac};
    };
    const auto [i, fx] = locate(x);
    const auto [j, fy] = locate(y);
    const double v00 = at(i, j), v01 = at(i, j + 1);
    const double v10 = at(i + 1, j), v11 = at(i + 1, j + 1);
    return (1.0 - fx) * ((1.0 - fy) * v00 + fy * v01) + fx * ((1.0 - fy) * v10 + fy * v11);
  }
};

// Boolean mask over the same cell grid; used for level sets, diagonalized
// sets and hulls.
struct GridSet {
  ScalarGrid grid;
  std::vector<std::uint8_t> mask;

  GridSet() = default;

  explicit GridSet(const ScalarGrid& g, bool fill = false)
      : grid(g), mask(g.n * g.n, fill ? 1 : 0) {}

  bool test(std::size_t i, std::size_t j) const { return mask[i * grid.n + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v = true) { mask[i * grid.n + j] = v ? 1 : 0; }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto b : mask) c += b;
    return c;
  }

  bool empty() const { return count() == 0; }

  bool operator==(const GridSet&) const = default;
};

// A = sorted node indices of a maximal Cartesian piece A x A of a mask.
struct CartesianPiece {
  std::vector<std::size_t> members;
  bool maximal = true;

  bool operator==(const CartesianPiece&) const = default;
};

// Piecewise constant field on a domain of measure `omega_measure`: piece k
// takes value `values[k]` on a subset of measure fraction `fractions[k]`.
// Only the value distribution matters for the double integrals computed here.
struct PiecewiseConstantField {
  std::vector<double> values;
  std::vector<double> fractions;
  double omega_measure = 1.0;

  PiecewiseConstantField() = default;

  PiecewiseConstantField(std::vector<double> vals, std::vector<double> fracs,
                         double omega = 1.0)
      : values(std::move(vals)), fractions(std::move(fracs)), omega_measure(omega) {
    validate();
  }

  void validate() const {
    if (values.empty() || values.size() != fractions.size())
      throw std::invalid_argument("PiecewiseConstantField: need matching nonempty values/fractions");
    if (!(omega_measure > 0.0) || !std::isfinite(omega_measure))
      throw std::invalid_argument("PiecewiseConstantField: domain measure must be positive");
    double sum = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!std::isfinite(values[k]))
        throw std::invalid_argument("PiecewiseConstantField: value " + std::to_string(k) +
                                    " is not finite");
      if (!(fractions[k] > 0.0))
        throw std::invalid_argument("PiecewiseConstantField: fraction " + std::to_string(k) +
                                    " must be positive");
      sum += fractions[k];
    }
    if (std::fabs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("PiecewiseConstantField: fractions sum to " +
                                  std::to_string(sum) + ", expected 1");
  }

  std::size_t pieces() const { return values.size(); }

  double mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) m += fractions[k] * values[k];
    return m;
  }
};

// Samples f over the value plane.  Non-finite samples are rejected with the
// offending point; the symmetric flag is set iff f agrees with its transpose
// exactly on all node pairs.
inline GridFunction sample_function(const ScalarGrid& grid,
                                    const std::function<double(double, double)>& f) {
  GridFunction out(grid);
  const std::size_t n = grid.n;
  parallel_for(n, [&](std::size_t i) {
    const double x = grid.coord(i);
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = f(x, grid.coord(j));
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!std::isfinite(out.at(i, j)))
        throw std::invalid_argument("sample_function: non-finite value at (" +
                                    std::to_string(grid.coord(i)) + ", " +
                                    std::to_string(grid.coord(j)) + ")");
  out.symmetric = out.is_transpose_equal();
  return out;
}

inline double default_level_eps(double c) { return 1e-9 * (1.0 + std::fabs(c)); }

// Sublevel cells {W <= c} with an absolute slack eps (default scales with c).
inline GridSet level_set(const GridFunction& w, double c, double eps = -1.0) {
  if (!std::isfinite(c)) throw std::invalid_argument("level_set: level must be finite");
  if (eps < 0.0) eps = default_level_eps(c);
  GridSet out(w.grid);
  for (std::size_t k = 0; k < w.values.size(); ++k) out.mask[k] = w.values[k] <= c + eps ? 1 : 0;
  return out;
}

}  // namespace nonlocal
