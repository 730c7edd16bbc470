#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nonlocal/grid.hpp"

namespace nonlocal {

// Diagonal trace: keep (xi, zeta) only when (xi, xi) and (zeta, zeta) also
// belong to the set.
inline GridSet diagonalize_set(const GridSet& e) {
  const std::size_t n = e.grid.n;
  GridSet out(e.grid);
  for (std::size_t i = 0; i < n; ++i) {
    if (!e.test(i, i)) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (e.test(j, j) && e.test(i, j)) out.set(i, j);
  }
  return out;
}

namespace detail {

// Fixed-width bitset used by the clique search below.
struct BitRow {
  std::vector<std::uint64_t> w;

  explicit BitRow(std::size_t bits = 0) : w((bits + 63) / 64, 0) {}

  void set(std::size_t i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
  bool test(std::size_t i) const { return (w[i >> 6] >> (i & 63)) & 1; }

  bool empty() const {
    for (auto x : w)
      if (x) return false;
    return true;
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto x : w) c += static_cast<std::size_t>(__builtin_popcountll(x));
    return c;
  }

  static BitRow and_of(const BitRow& a, const BitRow& b) {
    BitRow r;
    r.w.resize(a.w.size());
    for (std::size_t k = 0; k < a.w.size(); ++k) r.w[k] = a.w[k] & b.w[k];
    return r;
  }

  static BitRow and_not(const BitRow& a, const BitRow& b) {
    BitRow r;
    r.w.resize(a.w.size());
    for (std::size_t k = 0; k < a.w.size(); ++k) r.w[k] = a.w[k] & ~b.w[k];
    return r;
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t k = 0; k < w.size(); ++k) {
      std::uint64_t x = w[k];
      while (x) {
        const auto b = static_cast<std::size_t>(__builtin_ctzll(x));
        fn(k * 64 + b);
        x &= x - 1;
      }
    }
  }
};

struct CliqueSearch {
  std::size_t n = 0;
  std::vector<BitRow> adj;
  std::vector<std::vector<std::size_t>> found;

  void expand(std::vector<std::size_t>& r, BitRow p, BitRow x) {
    if (p.empty() && x.empty()) {
      found.push_back(r);
      return;
    }
    // Tomita pivot: the vertex of P u X covering most of P.
    std::size_t pivot = n;
    std::size_t best = 0;
    bool have = false;
    auto consider = [&](std::size_t u) {
      const std::size_t c = BitRow::and_of(p, adj[u]).count();
      if (!have || c > best) {
        have = true;
        best = c;
        pivot = u;
      }
    };
    p.for_each(consider);
    x.for_each(consider);
    BitRow cand = BitRow::and_not(p, adj[pivot]);
    cand.for_each([&](std::size_t v) {
      r.push_back(v);
      expand(r, BitRow::and_of(p, adj[v]), BitRow::and_of(x, adj[v]));
      r.pop_back();
      p.w[v >> 6] &= ~(std::uint64_t{1} << (v & 63));
      x.set(v);
    });
  }
};

}  // namespace detail

// All maximal A with A x A contained in the mask (both orientations of each
// pair, diagonal included).  These are the maximal cliques of the graph on
// loop-carrying nodes, enumerated Bron-Kerbosch style with pivoting over a
// degeneracy order.  Output is sorted by size descending, then by members.
inline std::vector<CartesianPiece> maximal_cartesian_subsets(const GridSet& e) {
  const std::size_t n = e.grid.n;
  std::vector<std::size_t> verts;
  for (std::size_t i = 0; i < n; ++i)
    if (e.test(i, i)) verts.push_back(i);
  const std::size_t m = verts.size();
  std::vector<CartesianPiece> pieces;
  if (m == 0) return pieces;

  detail::CliqueSearch search;
  search.n = m;
  search.adj.assign(m, detail::BitRow(m));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      if (e.test(verts[a], verts[b]) && e.test(verts[b], verts[a])) {
        search.adj[a].set(b);
        search.adj[b].set(a);
      }

  // Degeneracy order: repeatedly remove a minimum-degree vertex (smallest
  // index on ties), so the outer loop keeps candidate sets small.
  std::vector<std::size_t> order(m);
  {
    std::vector<std::size_t> deg(m, 0);
    std::vector<bool> removed(m, false);
    for (std::size_t a = 0; a < m; ++a) deg[a] = search.adj[a].count();
    for (std::size_t step = 0; step < m; ++step) {
      std::size_t pick = m;
      for (std::size_t a = 0; a < m; ++a)
        if (!removed[a] && (pick == m || deg[a] < deg[pick])) pick = a;
      order[step] = pick;
      removed[pick] = true;
      search.adj[pick].for_each([&](std::size_t b) {
        if (!removed[b] && deg[b] > 0) --deg[b];
      });
    }
  }
  std::vector<std::size_t> rank(m);
  for (std::size_t k = 0; k < m; ++k) rank[order[k]] = k;

  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t v = order[k];
    detail::BitRow p(m), x(m);
    search.adj[v].for_each([&](std::size_t u) {
      if (rank[u] > k)
        p.set(u);
      else
        x.set(u);
    });
    std::vector<std::size_t> r{v};
    search.expand(r, p, x);
  }

  pieces.reserve(search.found.size());
  for (auto& clique : search.found) {
    CartesianPiece piece;
    piece.members.reserve(clique.size());
    for (std::size_t a : clique) piece.members.push_back(verts[a]);
    std::sort(piece.members.begin(), piece.members.end());
    pieces.push_back(std::move(piece));
  }
  std::sort(pieces.begin(), pieces.end(), [](const CartesianPiece& a, const CartesianPiece& b) {
    if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
    return a.members < b.members;
  });
  return pieces;
}

// Fixed point of alternating row/column segment fills: marked cells sharing a
// line with another marked cell fill everything between them.
inline GridSet separately_convex_hull_set(const GridSet& e) {
  const std::size_t n = e.grid.n;
  GridSet out = e;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t first = n, last = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (out.test(i, j)) {
          if (first == n) first = j;
          last = j;
        }
      for (std::size_t j = first; first < n && j <= last; ++j)
        if (!out.test(i, j)) {
          out.set(i, j);
          changed = true;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t first = n, last = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (out.test(i, j)) {
          if (first == n) first = i;
          last = i;
        }
      for (std::size_t i = first; first < n && i <= last; ++i)
        if (!out.test(i, j)) {
          out.set(i, j);
          changed = true;
        }
    }
  }
  return out;
}

// Cells whose centers lie in the convex hull of the marked cell centers.
// Everything runs on integer node indices, so boundary cells are classified
// exactly: a center on a hull edge counts as inside.
inline GridSet convex_hull_set(const GridSet& e) {
  const std::size_t n = e.grid.n;
  struct IPoint {
    long long x, y;
  };
  std::vector<IPoint> pts;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (e.test(i, j)) pts.push_back({static_cast<long long>(i), static_cast<long long>(j)});
  if (pts.empty()) throw std::invalid_argument("convex_hull_set: empty mask");

  auto cross = [](const IPoint& o, const IPoint& a, const IPoint& b) -> long long {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::sort(pts.begin(), pts.end(), [](const IPoint& a, const IPoint& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  std::vector<IPoint> hull;
  if (pts.size() == 1) {
    hull = pts;
  } else {
    hull.resize(2 * pts.size());
    std::size_t k = 0;
    for (const IPoint& p : pts) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
      hull[k++] = p;
    }
    const std::size_t lower_end = k + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
      while (k >= lower_end && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
      hull[k++] = *it;
    }
    hull.resize(k - 1);
  }

  GridSet out(e.grid);
  if (hull.size() == 1) {
    out.set(static_cast<std::size_t>(hull[0].x), static_cast<std::size_t>(hull[0].y));
    return out;
  }
  if (hull.size() == 2) {
    // All input cells are collinear; keep exactly the centers on the segment.
    const IPoint a = hull[0], b = hull[1];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const IPoint p{static_cast<long long>(i), static_cast<long long>(j)};
        if (cross(a, b, p) != 0) continue;
        if (p.x < std::min(a.x, b.x) || p.x > std::max(a.x, b.x)) continue;
        if (p.y < std::min(a.y, b.y) || p.y > std::max(a.y, b.y)) continue;
        out.set(i, j);
      }
    return out;
  }
  long long min_x = std::numeric_limits<long long>::max(), max_x = 0;
  long long min_y = std::numeric_limits<long long>::max(), max_y = 0;
  for (const IPoint& p : hull) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  for (long long i = min_x; i <= max_x; ++i)
    for (long long j = min_y; j <= max_y; ++j) {
      const IPoint p{i, j};
      bool inside = true;
      for (std::size_t k = 0; k < hull.size() && inside; ++k)
        inside = cross(hull[k], hull[(k + 1) % hull.size()], p) >= 0;
      if (inside) out.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  return out;
}

// Union of [min A, max A]^2 over the given Cartesian pieces, in index space.
inline GridSet relaxed_cartesian_union(const ScalarGrid& grid,
                                       const std::vector<CartesianPiece>& pieces) {
  GridSet out(grid);
  for (const CartesianPiece& piece : pieces) {
    if (piece.members.empty()) continue;
    const std::size_t a = piece.members.front();
    const std::size_t b = piece.members.back();
    for (std::size_t i = a; i <= b; ++i)
      for (std::size_t j = a; j <= b; ++j) out.set(i, j);
  }
  return out;
}

inline GridSet relaxed_cartesian_union(const GridSet& e) {
  return relaxed_cartesian_union(e.grid, maximal_cartesian_subsets(e));
}

}  // namespace nonlocal
