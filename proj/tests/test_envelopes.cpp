#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nonlocal/envelopes.hpp"
#include "oracles.hpp"

using namespace nonlocal;

namespace {

const PointList kFourWells{{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}};

GridFunction four_well(const ScalarGrid& g, double p = 2.0) {
  return distance_integrand(g, kFourWells, Norm::l1, p);
}

GridFunction five_point(const ScalarGrid& g) {
  PointList k = kFourWells;
  k.points.push_back({2.0, 2.0});
  return distance_integrand(g, k, Norm::l1, 2.0);
}

// Largest violation of discrete convexity along rows, columns and both
// diagonals: positive when some second difference is negative.
double convexity_violation(const GridFunction& f) {
  const std::size_t n = f.grid.n;
  double worst = 0.0;
  auto probe = [&](double a, double b, double c) { worst = std::max(worst, 2.0 * b - a - c); };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j + 2 < n; ++j) {
      probe(f.at(i, j), f.at(i, j + 1), f.at(i, j + 2));
      probe(f.at(j, i), f.at(j + 1, i), f.at(j + 2, i));
    }
  for (std::size_t i = 0; i + 2 < n; ++i)
    for (std::size_t j = 0; j + 2 < n; ++j) {
      probe(f.at(i, j), f.at(i + 1, j + 1), f.at(i + 2, j + 2));
      probe(f.at(i, j + 2), f.at(i + 1, j + 1), f.at(i + 2, j));
    }
  return worst;
}

}  // namespace

TEST_CASE("four-well integrand has the expected sampled values") {
  ScalarGrid g(-3.0, 3.0, 193);
  const GridFunction w = four_well(g);
  const std::size_t c = g.nearest(0.0);
  CHECK(w.at(c, c) == 1.0);                              // dist to (+-1,0) is 1
  CHECK(w.at(g.nearest(2.0), g.nearest(2.0)) == 9.0);    // nearest well (1,0)
  CHECK(w.at(g.nearest(1.0), c) == 0.0);
  CHECK(w.symmetric);
}

TEST_CASE("distance integrand rejects exponents below one") {
  ScalarGrid g(-1.0, 1.0, 5);
  CHECK_THROWS_AS(distance_integrand(g, kFourWells, Norm::l1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(distance_integrand(g, kFourWells, Norm::l1,
                                     std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("convex envelope reproduces already convex samples") {
  ScalarGrid g(-3.0, 3.0, 97);
  const GridFunction sq = sample_function(g, [](double x, double y) {
    const double s = x + y;
    return s * s;
  });
  const GridFunction co_sq = convex_envelope(sq);
  double worst = 0.0;
  for (std::size_t k = 0; k < sq.values.size(); ++k)
    worst = std::max(worst, std::fabs(co_sq.values[k] - sq.values[k]));
  CHECK(worst <= 1e-10);

  const GridFunction av = sample_function(g, [](double x, double y) { return std::fabs(x + y); });
  const GridFunction co_av = convex_envelope(av);
  worst = 0.0;
  for (std::size_t k = 0; k < av.values.size(); ++k)
    worst = std::max(worst, std::fabs(co_av.values[k] - av.values[k]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("convex envelope of the four-well function at anchor nodes") {
  ScalarGrid g(-3.0, 3.0, 193);
  const GridFunction w = four_well(g);
  const GridFunction co = convex_envelope(w);

  // Minorant property is exact by the final clamp.
  for (std::size_t k = 0; k < w.values.size(); ++k) CHECK(co.values[k] <= w.values[k]);

  // At the origin the chord between the wells pins the envelope to zero; at
  // (2,0) the supporting slope lies on the dual lattice, so the value is the
  // analytic one.  Both are exact up to accumulated roundoff.
  const std::size_t c = g.nearest(0.0);
  CHECK(std::fabs(co.at(c, c)) <= 1e-9);
  CHECK(std::fabs(co.at(g.nearest(2.0), c) - 1.0) <= 1e-9);

  CHECK(convexity_violation(co) <= 1e-9);
  CHECK(co.symmetric);
}

TEST_CASE("separately convex envelope decreases, converges and stays put") {
  ScalarGrid g(-3.0, 3.0, 97);
  const GridFunction w = four_well(g);
  const ScEnvelope sc = separately_convex_envelope(w);
  REQUIRE(sc.converged);
  CHECK(sc.last_change <= sc.tol);

  for (std::size_t k = 0; k < w.values.size(); ++k) CHECK(sc.value.values[k] <= w.values[k]);

  // The wells pin the whole row y=0 to zero between x=-1 and x=1.
  const std::size_t c = g.nearest(0.0);
  CHECK(sc.value.at(c, c) == 0.0);

  // Re-running from the fixpoint changes nothing beyond the tolerance.
  const ScEnvelope again = separately_convex_envelope(sc.value, sc.tol);
  REQUIRE(again.converged);
  double drift = 0.0;
  for (std::size_t k = 0; k < w.values.size(); ++k)
    drift = std::max(drift, std::fabs(again.value.values[k] - sc.value.values[k]));
  CHECK(drift <= sc.tol);
  CHECK(sc.value.symmetric);
}

TEST_CASE("envelope ordering chain on the five-point well set") {
  ScalarGrid g(-3.0, 3.0, 65);
  const GridFunction w = five_point(g);
  const GridFunction co = convex_envelope(w);
  const ScEnvelope sc = separately_convex_envelope(w);
  REQUIRE(sc.converged);
  std::vector<double> levels(40);
  const double top = w.max_abs();
  for (std::size_t k = 0; k < levels.size(); ++k)
    levels[k] = top * static_cast<double>(k) / static_cast<double>(levels.size() - 1);
  const SlcEnvelope slc = separately_level_convex_envelope(w, levels);

  const double slack = 1e-6 * (1.0 + top);
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    CHECK(slc.value.values[k] <= w.values[k]);
    CHECK(slc.value.values[k] >= sc.value.values[k] - slack);
    // Every convex minorant is below the separately convex envelope.
    CHECK(sc.value.values[k] >= co.values[k] - 1e-12);
  }
}

TEST_CASE("diagonal lift commutes with sublevel sets") {
  ScalarGrid g(-3.0, 3.0, 49);
  const GridFunction w = five_point(g);
  const GridFunction w_hat = diagonalize_function(w);

  std::mt19937 rng(77);
  std::uniform_real_distribution<double> pick(-0.5, w.max_abs() + 0.5);
  for (int t = 0; t < 20; ++t) {
    const double c = t < 4 ? static_cast<double>(t) : pick(rng);
    CHECK(level_set(w_hat, c) == diagonalize_set(level_set(w, c)));
  }

  // Also for a rough random function, where ties and asymmetry are common.
  GridFunction noisy(g);
  std::uniform_int_distribution<int> coin(0, 4);
  for (double& v : noisy.values) v = static_cast<double>(coin(rng));
  const GridFunction noisy_hat = diagonalize_function(noisy);
  for (int t = 0; t < 6; ++t) {
    const double c = static_cast<double>(t) - 0.5;
    CHECK(level_set(noisy_hat, c) == diagonalize_set(level_set(noisy, c)));
  }
}

TEST_CASE("level envelope of an integer step function closes each level") {
  ScalarGrid g(0.0, 8.0, 9);
  GridFunction w(g, 3.0);
  // Two zero blocks and a one-valued bridge, everything else at 3.
  for (std::size_t i = 0; i <= 2; ++i)
    for (std::size_t j = 0; j <= 2; ++j) w.at(i, j) = 0.0;
  for (std::size_t i = 6; i <= 8; ++i)
    for (std::size_t j = 6; j <= 8; ++j) w.at(i, j) = 0.0;
  w.at(2, 6) = 1.0;
  w.at(6, 2) = 2.0;

  const SlcEnvelope res = separately_level_convex_envelope(w, {0.0, 1.0, 2.0, 3.0});
  CHECK_FALSE(res.saturated);
  CHECK(res.levels == std::vector<double>{0.0, 1.0, 2.0, 3.0});
  for (std::size_t k = 0; k < w.values.size(); ++k) CHECK(res.value.values[k] <= w.values[k]);
  for (double c : res.levels) {
    const GridSet s = level_set(res.value, c);
    CHECK(separately_convex_hull_set(s) == s);
  }
}

TEST_CASE("interior mask away from the box boundary") {
  ScalarGrid g(-3.0, 3.0, 13);
  const GridSet inner = untainted_mask(g);
  CHECK(inner.count() == 81);
  CHECK(inner.test(2, 2));
  CHECK_FALSE(inner.test(1, 6));
}
