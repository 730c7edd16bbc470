#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nonlocal/exact_sets.hpp"
#include "nonlocal/grid.hpp"
#include "nonlocal/parallel.hpp"
#include "nonlocal/set_ops.hpp"

namespace nonlocal {

// W = dist_q(., K)^p sampled over the value plane for an exactly represented K.
inline GridFunction distance_integrand(const ScalarGrid& grid, const ExactSet& k, Norm q,
                                       double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw std::invalid_argument("distance_integrand: exponent p must satisfy p >= 1");
  return sample_function(
      grid, [&](double x, double y) { return std::pow(distance(k, x, y, q), p); });
}

struct GridMin {
  double value = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
};

// Minimum over all nodes; first row-major argmin on ties.
inline GridMin grid_min(const GridFunction& w) {
  GridMin best{w.values[0], 0, 0};
  const std::size_t n = w.grid.n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (w.at(i, j) < best.value) best = {w.at(i, j), i, j};
  return best;
}

// Cells at 1-norm distance >= margin from the boundary of the grid box.
// Truncation distorts envelopes near the boundary, so analytic comparisons
// restrict to this interior mask.
inline GridSet untainted_mask(const ScalarGrid& grid, double margin = 1.0) {
  GridSet out(grid);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.coord(i);
    const bool xi_ok = std::min(x - grid.lo, grid.hi - x) >= margin;
    if (!xi_ok) continue;
    for (std::size_t j = 0; j < grid.n; ++j) {
      const double y = grid.coord(j);
      if (std::min(y - grid.lo, grid.hi - y) >= margin) out.set(i, j);
    }
  }
  return out;
}

namespace detail {

// Indices of the lower convex hull of (x_0, f_0), ..., (x_{m-1}, f_{m-1})
// for uniformly spaced x, left to right.  Points on a chord are dropped.
inline void lower_hull(const double* f, std::size_t m, std::vector<std::size_t>& hull) {
  hull.clear();
  for (std::size_t i = 0; i < m; ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull[hull.size() - 1];
      // Keep b only if it lies strictly below the chord from a to i.
      const double lhs = (f[b] - f[a]) * static_cast<double>(i - a);
      const double rhs = (f[i] - f[a]) * static_cast<double>(b - a);
      if (lhs < rhs) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
}

// One-dimensional discrete Legendre transform out[k] = max_i (s_k x_i - f_i)
// for ascending slopes s.  The argmax index climbs the lower hull
// monotonically, so one pass over hull vertices serves all slopes.
inline void legendre_1d(const std::vector<double>& xs, const double* f,
                        const std::vector<double>& slopes, std::vector<std::size_t>& hull,
                        double* out) {
  lower_hull(f, xs.size(), hull);
  std::size_t at = 0;
  for (std::size_t k = 0; k < slopes.size(); ++k) {
    const double s = slopes[k];
    while (at + 1 < hull.size() &&
           s * xs[hull[at + 1]] - f[hull[at + 1]] >= s * xs[hull[at]] - f[hull[at]])
      ++at;
    out[k] = s * xs[hull[at]] - f[hull[at]];
  }
}

// Replaces each line by its lower convex hull, interpolated back onto the
// nodes.  Returns the largest pointwise change.
inline double convexify_line(double* f, std::size_t stride, std::size_t m,
                             std::vector<std::size_t>& hull, std::vector<double>& scratch) {
  scratch.resize(m);
  for (std::size_t i = 0; i < m; ++i) scratch[i] = f[i * stride];
  lower_hull(scratch.data(), m, hull);
  double change = 0.0;
  for (std::size_t seg = 0; seg + 1 < hull.size(); ++seg) {
    const std::size_t a = hull[seg];
    const std::size_t b = hull[seg + 1];
    const double fa = scratch[a];
    const double slope = (scratch[b] - fa) / static_cast<double>(b - a);
    for (std::size_t i = a + 1; i < b; ++i) {
      const double v = fa + slope * static_cast<double>(i - a);
      if (v < f[i * stride]) {
        change = std::max(change, f[i * stride] - v);
        f[i * stride] = v;
      }
    }
  }
  return change;
}

// Dual slope lattice for one axis: multiples of stride*h covering the secant
// slope range of the data.  Aligning dual slopes with the lattice of chord
// slopes of grid data makes the biconjugate exact at nodes for piecewise
// linear/quadratic integrands; the stride only grows when the range would
// need more than ~4n points.
inline std::vector<double> dual_slopes(double h, double slope_bound, std::size_t n) {
  const auto m = static_cast<long long>(std::ceil(slope_bound / h)) + 1;
  const long long cap = 2 * static_cast<long long>(n) + 1;
  const long long stride = std::max<long long>(1, (m + cap - 1) / cap);
  const long long half = (m + stride - 1) / stride;
  std::vector<double> s;
  s.reserve(static_cast<std::size_t>(2 * half + 1));
  for (long long j = -half; j <= half; ++j)
    s.push_back(static_cast<double>(j) * static_cast<double>(stride) * h);
  return s;
}

}  // namespace detail

// Convex envelope on the grid via a double discrete Legendre transform.  The
// conjugate factorizes into nested one-dimensional transforms; the only
// approximation is the finite dual slope lattice, which is aligned with the
// chord slopes of the sampled data (see detail::dual_slopes).
inline GridFunction convex_envelope(const GridFunction& w) {
  const std::size_t n = w.grid.n;
  const double h = w.grid.spacing();
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = w.grid.coord(i);

  double col_bound = 0.0, row_bound = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j + 1 < n) row_bound = std::max(row_bound, std::fabs(w.at(i, j + 1) - w.at(i, j)));
      if (i + 1 < n) col_bound = std::max(col_bound, std::fabs(w.at(i + 1, j) - w.at(i, j)));
    }
  const std::vector<double> ss = detail::dual_slopes(h, col_bound / h, n);
  const std::vector<double> ts = detail::dual_slopes(h, row_bound / h, n);
  const std::size_t ns = ss.size(), nt = ts.size();

  // conj_zeta[i][t] = max_j (t zeta_j - W(i, j))
  std::vector<double> conj_zeta(n * nt);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::size_t> hull;
    detail::legendre_1d(xs, w.values.data() + i * n, ts, hull, conj_zeta.data() + i * nt);
  });

  // conj[s][t] = max_i (s xi_i + conj_zeta[i][t])
  std::vector<double> conj(ns * nt);
  parallel_for(nt, [&](std::size_t t) {
    std::vector<double> line(n);
    std::vector<double> out(ns);
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < n; ++i) line[i] = -conj_zeta[i * nt + t];
    detail::legendre_1d(xs, line.data(), ss, hull, out.data());
    for (std::size_t s = 0; s < ns; ++s) conj[s * nt + t] = out[s];
  });

  // back[s][j] = max_t (zeta_j t - conj[s][t])
  std::vector<double> back(ns * n);
  parallel_for(ns, [&](std::size_t s) {
    std::vector<std::size_t> hull;
    detail::legendre_1d(ts, conj.data() + s * nt, xs, hull, back.data() + s * n);
  });

  GridFunction out(w.grid);
  parallel_for(n, [&](std::size_t j) {
    std::vector<double> line(ns);
    std::vector<double> vals(n);
    std::vector<std::size_t> hull;
    for (std::size_t s = 0; s < ns; ++s) line[s] = -back[s * n + j];
    detail::legendre_1d(ss, line.data(), xs, hull, vals.data());
    for (std::size_t i = 0; i < n; ++i) out.at(i, j) = vals[i];
  });

  if (w.symmetric) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = std::max(out.at(i, j), out.at(j, i));
        out.at(i, j) = v;
        out.at(j, i) = v;
      }
  }
  // The transform never overshoots W beyond roundoff; clamp to keep the
  // minorant property exact.
  for (std::size_t k = 0; k < out.values.size(); ++k)
    out.values[k] = std::min(out.values[k], w.values[k]);
  out.symmetric = w.symmetric;
  return out;
}

struct ScEnvelope {
  GridFunction value;
  bool converged = false;
  std::size_t sweeps = 0;
  double last_change = 0.0;
  double tol = 0.0;
};

inline double default_sc_tol(const GridFunction& w) { return 1e-9 * (1.0 + w.max_abs()); }

// Separately convex envelope: alternate one-dimensional convexification of
// all rows and all columns until the sweep changes nothing above tol.  The
// iterates decrease monotonically from W and stay above the convex envelope;
// the fixed point is the largest function below W convex along every grid
// line.  Symmetric inputs are re-symmetrized after each sweep (max of the
// iterate and its transpose) so the flag survives exactly.
inline ScEnvelope separately_convex_envelope(const GridFunction& w, double tol = -1.0,
                                             std::size_t max_iter = 0) {
  const std::size_t n = w.grid.n;
  if (tol < 0.0) tol = default_sc_tol(w);
  if (max_iter == 0) max_iter = 10 * n;

  ScEnvelope res;
  res.value = w;
  res.tol = tol;
  GridFunction& v = res.value;
  std::vector<double> row_change(n), col_change(n);

  for (std::size_t sweep = 0; sweep < max_iter; ++sweep) {
    parallel_for(n, [&](std::size_t i) {
      std::vector<std::size_t> hull;
      std::vector<double> scratch;
      row_change[i] = detail::convexify_line(v.values.data() + i * n, 1, n, hull, scratch);
    });
    parallel_for(n, [&](std::size_t j) {
      std::vector<std::size_t> hull;
      std::vector<double> scratch;
      col_change[j] = detail::convexify_line(v.values.data() + j, n, n, hull, scratch);
    });
    double change = 0.0;
    for (std::size_t k = 0; k < n; ++k) change = std::max({change, row_change[k], col_change[k]});
    if (w.symmetric) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double m = std::max(v.at(i, j), v.at(j, i));
          change = std::max({change, m - v.at(i, j), m - v.at(j, i)});
          v.at(i, j) = m;
          v.at(j, i) = m;
        }
    }
    res.sweeps = sweep + 1;
    res.last_change = change;
    if (change <= tol) {
      res.converged = true;
      break;
    }
  }
  v.symmetric = w.symmetric;
  return res;
}

struct SlcEnvelope {
  GridFunction value;
  bool saturated = false;
  std::vector<double> levels;
};

// Separately level convex envelope: each cell gets the smallest listed level
// whose sublevel set's separately convex hull contains it.  Cells above the
// top level are assigned the top level and flagged.  The result is clamped
// by W so the pointwise bound W >= V holds exactly.
inline SlcEnvelope separately_level_convex_envelope(const GridFunction& w,
                                                    std::vector<double> levels = {}) {
  SlcEnvelope res;
  if (levels.empty()) {
    const auto [min_it, max_it] = std::minmax_element(w.values.begin(), w.values.end());
    const double lo = *min_it, hi = *max_it;
    const std::size_t count = 512;
    levels.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(count - 1);
      levels[k] = lo + t * (hi - lo);
    }
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.empty()) throw std::invalid_argument("separately_level_convex_envelope: no levels");

  const std::size_t cells = w.values.size();
  res.value = GridFunction(w.grid);
  std::vector<std::uint8_t> assigned(cells, 0);
  std::size_t remaining = cells;
  for (double c : levels) {
    if (remaining == 0) break;
    const GridSet hull = separately_convex_hull_set(level_set(w, c));
    for (std::size_t k = 0; k < cells; ++k)
      if (!assigned[k] && hull.mask[k]) {
        assigned[k] = 1;
        res.value.values[k] = c;
        --remaining;
      }
  }
  if (remaining > 0) {
    res.saturated = true;
    for (std::size_t k = 0; k < cells; ++k)
      if (!assigned[k]) res.value.values[k] = levels.back();
  }
  for (std::size_t k = 0; k < cells; ++k)
    res.value.values[k] = std::min(res.value.values[k], w.values[k]);
  res.value.symmetric = w.symmetric && res.value.is_transpose_equal();
  res.levels = std::move(levels);
  return res;
}

// Diagonal lift: smallest c with (xi, zeta), (xi, xi), (zeta, zeta) all in
// the sublevel set at c, i.e. the pointwise max of the value and the two
// diagonal values.  Level sets of the result are exactly the diagonalized
// level sets of W.
inline GridFunction diagonalize_function(const GridFunction& w) {
  const std::size_t n = w.grid.n;
  GridFunction out(w.grid);
  for (std::size_t i = 0; i < n; ++i) {
    const double dii = w.at(i, i);
    for (std::size_t j = 0; j < n; ++j)
      out.at(i, j) = std::max({w.at(i, j), dii, w.at(j, j)});
  }
  out.symmetric = w.symmetric || out.is_transpose_equal();
  return out;
}

}  // namespace nonlocal
