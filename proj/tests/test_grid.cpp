#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nonlocal/grid.hpp"

using namespace nonlocal;

TEST_CASE("grid coordinates hit simple fractions exactly") {
  const ScalarGrid g(-3.0, 3.0, 193);  // spacing 1/32
  CHECK(g.spacing() == 0.03125);
  CHECK(g.coord(0) == -3.0);
  CHECK(g.coord(192) == 3.0);
  CHECK(g.coord(96) == 0.0);
  CHECK(g.coord(128) == 1.0);
  CHECK(g.coord(112) == 0.5);

  const ScalarGrid wide(-3.0, 3.0, 241);  // spacing 0.025
  CHECK(wide.coord(120) == 0.0);
  CHECK(wide.coord(160) == 1.0);
  CHECK(wide.coord(80) == -1.0);
}

TEST_CASE("nearest rounds to the closer node, lower index on ties") {
  const ScalarGrid g(0.0, 1.0, 3);
  CHECK(g.nearest(0.2) == 0);
  CHECK(g.nearest(0.3) == 1);
  CHECK(g.nearest(0.25) == 0);
  CHECK(g.nearest(0.75) == 1);
  CHECK(g.nearest(1.0) == 2);
}

TEST_CASE("grid construction rejects bad parameters") {
  CHECK_THROWS_AS(ScalarGrid(1.0, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(ScalarGrid(2.0, -2.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(ScalarGrid(0.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(ScalarGrid(0.0, std::numeric_limits<double>::infinity(), 5),
                  std::invalid_argument);
}

TEST_CASE("bilinear interpolation reproduces bilinear functions") {
  const ScalarGrid g(-2.0, 2.0, 17);
  const GridFunction w = sample_function(g, [](double x, double y) {
    return 2.0 * x - 3.0 * y + x * y + 0.25;
  });
  for (double x : {-1.93, -0.4, 0.0, 0.77, 1.999})
    for (double y : {-1.5, -0.03, 1.21}) {
      const double expect = 2.0 * x - 3.0 * y + x * y + 0.25;
      CHECK(w.interpolate(x, y) == Catch::Approx(expect).margin(1e-12));
    }
}

TEST_CASE("interpolation outside the box names the offending point") {
  const ScalarGrid g(-1.0, 1.0, 5);
  const GridFunction w = sample_function(g, [](double x, double y) { return x + y; });
  CHECK_THROWS_WITH(w.interpolate(1.5, 0.0), Catch::Matchers::ContainsSubstring("1.5"));
}

TEST_CASE("sampling detects symmetry and rejects non-finite values") {
  const ScalarGrid g(-1.0, 1.0, 9);
  const GridFunction sym = sample_function(g, [](double x, double y) { return x * x + y * y; });
  CHECK(sym.symmetric);
  const GridFunction asym = sample_function(g, [](double x, double y) { return x + 2.0 * y; });
  CHECK_FALSE(asym.symmetric);
  CHECK_THROWS_AS(sample_function(g,
                                  [](double x, double y) {
                                    return x == 0.5 && y == 0.5
                                               ? std::numeric_limits<double>::quiet_NaN()
                                               : 0.0;
                                  }),
                  std::invalid_argument);
}

TEST_CASE("piecewise constant fields validate their weights") {
  CHECK_THROWS_AS(PiecewiseConstantField({1.0}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseConstantField({1.0, 2.0}, {0.5, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseConstantField({1.0, 2.0}, {0.5}), std::invalid_argument);
  const PiecewiseConstantField u({1.0, -1.0}, {0.75, 0.25});
  CHECK(u.mean() == 0.5);
}

TEST_CASE("level sets use a scaled tolerance") {
  const ScalarGrid g(-1.0, 1.0, 5);
  const GridFunction w = sample_function(g, [](double x, double y) { return x * x + y * y; });
  const GridSet zero = level_set(w, 0.0);
  CHECK(zero.count() == 1);
  CHECK(zero.test(2, 2));
  const GridSet half = level_set(w, 0.25);
  // x^2 + y^2 <= 1/4: the axis neighbors at distance 1/2 sit exactly on the level.
  CHECK(half.count() == 5);
  CHECK_THROWS_AS(level_set(w, std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
}
