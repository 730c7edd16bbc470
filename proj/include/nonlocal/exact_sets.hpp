#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

namespace nonlocal {

enum class Norm { l1, l2, linf };

inline double norm_of(Norm q, double dx, double dy) {
  dx = std::fabs(dx);
  dy = std::fabs(dy);
  switch (q) {
    case Norm::l1: return dx + dy;
    case Norm::l2: return std::hypot(dx, dy);
    case Norm::linf: return std::max(dx, dy);
  }
  return dx + dy;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct Segment {
  Point a;
  Point b;
};

// Closed sets in the value plane with exact distance evaluation.  These back
// the distance integrands and the analytic comparisons; everything here is
// closed-form, no grid involved.
struct PointList { std::vector<Point> points; };
struct SegmentList { std::vector<Segment> segments; };
// A x A for a finite value list A.
struct ProductPoints { std::vector<double> values; };
// [lo, hi]^2, the square hull of a product set.
struct ProductInterval { double lo = 0.0, hi = 0.0; };
// Convex polygon given by CCW vertices; distance 0 inside.
struct ConvexPolygon { std::vector<Point> vertices; };

using ExactSet = std::variant<PointList, SegmentList, ProductPoints, ProductInterval, ConvexPolygon>;

namespace detail {

// Distance from p to the segment in the q-norm.  t -> |p - a - t(b-a)|_q is
// convex piecewise linear (piecewise quadratic for l2), so the minimum over
// [0,1] is attained at an endpoint, at a kink of a coordinate term, or where
// the two coordinate terms cross; evaluating all candidates is exact.
inline double segment_distance(const Segment& s, double px, double py, Norm q) {
  const double dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
  const double ux = px - s.a.x, uy = py - s.a.y;
  double ts[6];
  std::size_t nt = 0;
  ts[nt++] = 0.0;
  ts[nt++] = 1.0;
  const double len2 = dx * dx + dy * dy;
  if (q == Norm::l2) {
    if (len2 > 0.0) ts[nt++] = (ux * dx + uy * dy) / len2;
  } else {
    if (dx != 0.0) ts[nt++] = ux / dx;
    if (dy != 0.0) ts[nt++] = uy / dy;
    if (q == Norm::linf) {
      if (dx - dy != 0.0) ts[nt++] = (ux - uy) / (dx - dy);
      if (dx + dy != 0.0) ts[nt++] = (ux + uy) / (dx + dy);
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nt; ++k) {
    const double t = std::clamp(ts[k], 0.0, 1.0);
    best = std::min(best, norm_of(q, ux - t * dx, uy - t * dy));
  }
  return best;
}

inline double point_set_distance_1d(const std::vector<double>& a, double x) {
  double best = std::numeric_limits<double>::infinity();
  for (double v : a) best = std::min(best, std::fabs(x - v));
  return best;
}

inline double interval_distance_1d(double lo, double hi, double x) {
  return std::max({lo - x, x - hi, 0.0});
}

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace detail

inline bool polygon_contains(const ConvexPolygon& poly, double px, double py) {
  const auto& v = poly.vertices;
  if (v.empty()) return false;
  if (v.size() == 1) return v[0].x == px && v[0].y == py;
  if (v.size() == 2) {
    // Degenerate hull: a segment.
    return detail::cross(v[0], v[1], {px, py}) == 0.0 &&
           px >= std::min(v[0].x, v[1].x) && px <= std::max(v[0].x, v[1].x) &&
           py >= std::min(v[0].y, v[1].y) && py <= std::max(v[0].y, v[1].y);
  }
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Point& a = v[k];
    const Point& b = v[(k + 1) % v.size()];
    if (detail::cross(a, b, {px, py}) < 0.0) return false;
  }
  return true;
}

inline double distance(const ExactSet& set, double px, double py, Norm q) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        double best = std::numeric_limits<double>::infinity();
        if constexpr (std::is_same_v<T, PointList>) {
          if (s.points.empty()) throw std::invalid_argument("distance: empty point list");
          for (const Point& p : s.points) best = std::min(best, norm_of(q, px - p.x, py - p.y));
        } else if constexpr (std::is_same_v<T, SegmentList>) {
          if (s.segments.empty()) throw std::invalid_argument("distance: empty segment list");
          for (const Segment& seg : s.segments)
            best = std::min(best, detail::segment_distance(seg, px, py, q));
        } else if constexpr (std::is_same_v<T, ProductPoints>) {
          if (s.values.empty()) throw std::invalid_argument("distance: empty product set");
          // The q-norm is separable over a product, so the per-axis nearest
          // members already give the exact distance.
          best = norm_of(q, detail::point_set_distance_1d(s.values, px),
                         detail::point_set_distance_1d(s.values, py));
        } else if constexpr (std::is_same_v<T, ProductInterval>) {
          best = norm_of(q, detail::interval_distance_1d(s.lo, s.hi, px),
                         detail::interval_distance_1d(s.lo, s.hi, py));
        } else {
          static_assert(std::is_same_v<T, ConvexPolygon>);
          if (s.vertices.empty()) throw std::invalid_argument("distance: empty polygon");
          if (polygon_contains(s, px, py)) return 0.0;
          for (std::size_t k = 0; k < s.vertices.size(); ++k)
            best = std::min(best, detail::segment_distance(
                                      {s.vertices[k], s.vertices[(k + 1) % s.vertices.size()]}, px, py, q));
        }
        return best;
      },
      set);
}

// Boundary of the 1-norm ball of the given radius, as four segments.
inline SegmentList norm_sphere_l1(double radius, double cx = 0.0, double cy = 0.0) {
  if (!(radius > 0.0)) throw std::invalid_argument("norm_sphere_l1: radius must be positive");
  const Point e{cx + radius, cy}, n{cx, cy + radius}, w{cx - radius, cy}, s{cx, cy - radius};
  return SegmentList{{{e, n}, {n, w}, {w, s}, {s, e}}};
}

// CCW convex hull (monotone chain); collinear points are dropped.
inline ConvexPolygon convex_hull_of_points(std::vector<Point> pts) {
  if (pts.empty()) throw std::invalid_argument("convex_hull_of_points: empty input");
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return ConvexPolygon{pts};
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower_end = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower_end && detail::cross(hull[k - 2], hull[k - 1], *it) <= 0.0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return ConvexPolygon{hull};
}

}  // namespace nonlocal
