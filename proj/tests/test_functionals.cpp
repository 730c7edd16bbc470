#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nonlocal/envelopes.hpp"
#include "nonlocal/functionals.hpp"
#include "oracles.hpp"

using namespace nonlocal;

namespace {

double corner_rule(double x, double y) {
  const ExactSet k = ProductPoints{{-1.0, 1.0}};
  const double d = distance(k, x, y, Norm::l1);
  return d * d;
}

}  // namespace

TEST_CASE("double integral of hand-checked two-piece fields") {
  const Integrand w(corner_rule);

  // Both values in the corner set: every pair vanishes.
  CHECK(eval_double_integral(w, {{1.0, -1.0}, {0.5, 0.5}}) == 0.0);

  // Constant zero field: dist((0,0), corners) = 2 in the 1-norm.
  CHECK(eval_double_integral(w, {{0.0}, {1.0}}) == 4.0);
  CHECK(eval_double_integral(w, {{0.0}, {1.0}, 2.0}) == 16.0);

  // Mixed pairs: W(1,1)=0, W(1,0)=W(0,1)=1, W(0,0)=4.
  CHECK(eval_double_integral(w, {{1.0, 0.0}, {0.5, 0.5}}) == 0.25 * (0.0 + 1.0 + 1.0 + 4.0));
}

TEST_CASE("grid-backed integrand agrees with its rule at node values") {
  ScalarGrid g(-2.0, 2.0, 17);
  const Integrand rule(corner_rule);
  const Integrand grid(sample_function(g, corner_rule));
  REQUIRE(grid.grid() != nullptr);
  CHECK(rule.grid() == nullptr);

  const PiecewiseConstantField u({1.0, -0.5, 0.25, 2.0}, {0.25, 0.25, 0.25, 0.25});
  const double a = eval_double_integral(rule, u);
  const double b = eval_double_integral(grid, u);
  CHECK(std::fabs(a - b) <= 1e-12 * (1.0 + std::fabs(a)));

  // Off-grid arguments are a usage error for sampled integrands.
  CHECK_THROWS_AS(grid(5.0, 0.0), std::invalid_argument);
}

TEST_CASE("double integral matches the naive accumulation on random fields") {
  std::mt19937 rng(404);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 2 + rng() % 50;
    std::vector<double> vals(m), fracs(m);
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      vals[k] = val(rng);
      fracs[k] = 0.05 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      sum += fracs[k];
    }
    for (double& f : fracs) f /= sum;
    // validate() tolerates 1e-12 drift; renormalizing once is enough here.
    const PiecewiseConstantField u(vals, fracs, 1.5);
    const Integrand w(corner_rule);
    const double fast = eval_double_integral(w, u);
    const double slow = oracles::naive_double_integral(w, u);
    CHECK(std::fabs(fast - slow) <= 1e-13 * (1.0 + std::fabs(slow)));
    // Identical calls produce identical bits.
    CHECK(eval_double_integral(w, u) == fast);
  }
}

TEST_CASE("double integral rejects malformed fields") {
  const Integrand w(corner_rule);
  PiecewiseConstantField u;
  u.values = {1.0, 2.0};
  u.fractions = {0.5, 0.4};
  CHECK_THROWS_WITH(eval_double_integral(w, u),
                    Catch::Matchers::ContainsSubstring("fractions sum"));
  CHECK_THROWS_AS(Integrand(std::function<double(double, double)>{}), std::invalid_argument);
}

TEST_CASE("exact inclusion reports the first violating pair") {
  const SetRule k(ProductPoints{{-1.0, 1.0}}, Norm::l1);

  CHECK(check_exact_inclusion(k, {{1.0, -1.0}, {0.5, 0.5}}).ok);

  const auto bad = check_exact_inclusion(k, {{1.0, 0.5}, {0.5, 0.5}});
  REQUIRE_FALSE(bad.ok);
  CHECK(bad.piece_i == 0);
  CHECK(bad.piece_j == 1);
  CHECK(bad.xi == 1.0);
  CHECK(bad.zeta == 0.5);

  const auto ind = eval_indicator(k, {{1.0, 0.5}, {0.5, 0.5}});
  CHECK_FALSE(ind.finite);
  CHECK(ind.violations.size() == 3);  // (0,1), (1,0), (1,1)

  CHECK(eval_indicator(k, {{-1.0, 1.0, 1.0}, {0.25, 0.5, 0.25}}).finite);
}

TEST_CASE("grid-backed membership snaps to nearest nodes") {
  ScalarGrid g(-3.0, 3.0, 193);
  const PointList wells{{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}};
  const GridSet zero = level_set(distance_integrand(g, wells, Norm::l1, 2.0), 0.0);
  REQUIRE(zero.count() == 4);

  const SetRule k(zero);
  CHECK(k.contains(1.0, 0.0));
  CHECK(k.contains(1.002, -0.003));  // rounds to the same node pair
  CHECK_FALSE(k.contains(0.0, 0.0));
  CHECK_FALSE(k.contains(4.0, 0.0));  // outside the box
}

TEST_CASE("relaxed inclusion on the diamond boundary set") {
  ScalarGrid g(-3.0, 3.0, 193);
  const GridSet sphere =
      level_set(distance_integrand(g, norm_sphere_l1(1.0), Norm::l1, 1.0), 0.0);

  // The only loop values are +-1/2, and all four of their pairs stay on the
  // boundary, so there is exactly one maximal piece.
  const auto rep = check_relaxed_inclusion(sphere, {{0.5, -0.5, 0.25}, {0.4, 0.4, 0.2}});
  REQUIRE(rep.pieces.size() == 1);
  CHECK(rep.pieces[0].members == std::vector<std::size_t>{g.nearest(-0.5), g.nearest(0.5)});
  CHECK(rep.ok);
  REQUIRE(rep.witness.has_value());
  CHECK(*rep.witness == 0);

  CHECK_FALSE(check_relaxed_inclusion(sphere, {{0.5, 0.6}, {0.5, 0.5}}).ok);
  CHECK_FALSE(eval_relaxed_indicator(sphere, {{0.5, 0.6}, {0.5, 0.5}}).finite);
  CHECK(eval_relaxed_indicator(sphere, {{0.5, -0.5, 0.25}, {0.4, 0.4, 0.2}}).finite);
}

TEST_CASE("exact inclusion implies relaxed inclusion for node fields") {
  std::mt19937 rng(405);
  ScalarGrid g(0.0, 9.0, 10);
  for (int trial = 0; trial < 40; ++trial) {
    GridSet e(g);
    std::bernoulli_distribution bit(0.4);
    for (std::size_t i = 0; i < g.n; ++i)
      for (std::size_t j = i; j < g.n; ++j) {
        if (!bit(rng)) continue;
        e.set(i, j, true);
        e.set(j, i, true);
      }
    if (e.empty()) e.set(3, 3, true);

    const std::size_t m = 1 + rng() % 4;
    std::vector<double> vals(m);
    for (double& v : vals) v = g.coord(rng() % g.n);
    PiecewiseConstantField u(vals, std::vector<double>(m, 1.0 / static_cast<double>(m)));

    if (check_exact_inclusion(SetRule(e), u).ok) CHECK(check_relaxed_inclusion(e, u).ok);
  }
}
