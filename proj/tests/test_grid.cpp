#include <cmath>
#include <limits>

#include "doctest.h"
#include "parcon/grid.hpp"
#include "support/testutil.hpp"

using namespace parcon;

TEST_CASE("interval grid geometry") {
  const SpatialGrid g = SpatialGrid::interval(9, 2.0);
  CHECK(g.dim == 1);
  CHECK(g.interior(0) == 7);
  CHECK(g.interior_count() == 7);
  CHECK(g.spacing(0) == doctest::Approx(0.25));
  CHECK(g.cell_volume() == doctest::Approx(0.25));
  CHECK(g.point(0).x == doctest::Approx(0.25));
  CHECK(g.point(6).x == doctest::Approx(1.75));
}

TEST_CASE("rectangle grid is row-major with x fastest") {
  const SpatialGrid g = SpatialGrid::rectangle(5, 4, 1.0, 3.0);
  CHECK(g.interior_count() == 3 * 2);
  CHECK(g.cell_volume() == doctest::Approx(0.25 * 1.0));
  CHECK(g.index(2, 1) == 5);
  const Point p = g.point(g.index(2, 1));
  CHECK(p.x == doctest::Approx(3.0 * 0.25));
  CHECK(p.y == doctest::Approx(2.0 * 1.0));
}

TEST_CASE("grid construction rejects degenerate shapes") {
  CHECK_THROWS_AS(SpatialGrid::interval(2), DimensionMismatch);
  CHECK_THROWS_AS(SpatialGrid::interval(5, 0.0), DimensionMismatch);
  CHECK_THROWS_AS(SpatialGrid::rectangle(3, 2), DimensionMismatch);
  CHECK_THROWS_AS(GridFunction(0, 4), DimensionMismatch);
  CHECK_THROWS_AS(GridFunction(4, 0), DimensionMismatch);
}

TEST_CASE("time grid levels") {
  const TimeGrid t{2.0, 8};
  CHECK(t.dt() == doctest::Approx(0.25));
  CHECK(t.time(0) == 0.0);
  CHECK(t.time(8) == doctest::Approx(2.0));
}

TEST_CASE("grid function storage and shape checks") {
  const Grids grids{SpatialGrid::interval(5), TimeGrid{1.0, 3}};
  GridFunction f(grids, 2.5);
  CHECK(f.matches(grids));
  CHECK(f.interior_count() == 3);
  CHECK(f.steps() == 3);
  CHECK(f.levels() == 4);
  f(1, 2) = -7.0;
  CHECK(f.level(2)[1] == -7.0);
  CHECK(f.level(0)[1] == 2.5);
  f.fill(0.0);
  CHECK(max_abs(f) == 0.0);

  const Grids other{SpatialGrid::interval(7), TimeGrid{1.0, 3}};
  CHECK_FALSE(f.matches(other));
  CHECK_THROWS_AS(lp_norm(other, f, 2.0), DimensionMismatch);
}

TEST_CASE("cylinder quadrature: constant fields and the level-0 convention") {
  const Grids grids{SpatialGrid::interval(33), TimeGrid{1.0, 16}};
  GridFunction f(grids, 3.0);

  // Interior-node quadrature: the implicit zero boundary shaves one cell per
  // end, so the measured volume is (interior/(nodes-1)) * length * horizon.
  const double vol = grids.space.interior_count() * grids.space.cell_volume() *
                     grids.time.steps * grids.time.dt();
  CHECK(lp_norm(grids, f, 2.0) == doctest::Approx(3.0 * std::sqrt(vol)).epsilon(1e-12));
  CHECK(lp_norm(grids, f, 1.0) == doctest::Approx(3.0 * vol).epsilon(1e-12));

  // Level 0 carries no weight in finite-p norms and pairings, but the sup
  // norm scans it.
  GridFunction g = f;
  for (double& v : g.level(0)) v = 1e6;
  CHECK(lp_norm(grids, g, 2.0) == doctest::Approx(lp_norm(grids, f, 2.0)));
  CHECK(inner_product_q(grids, g, f) == doctest::Approx(inner_product_q(grids, f, f)));
  CHECK(lp_norm(grids, g, std::numeric_limits<double>::infinity()) == doctest::Approx(1e6));
  CHECK(max_abs(g) == doctest::Approx(1e6));
}

TEST_CASE("inner product matches the direct sum and is bilinear") {
  const Grids grids{SpatialGrid::interval(9), TimeGrid{0.5, 4}};
  const GridFunction f = testsup::random_field(grids, 1);
  const GridFunction g = testsup::random_field(grids, 2);

  const double w = grids.space.cell_volume() * grids.time.dt();
  double direct = 0.0;
  for (int k = 1; k <= grids.time.steps; ++k)
    for (int i = 0; i < grids.space.interior_count(); ++i) direct += w * f(i, k) * g(i, k);
  CHECK(inner_product_q(grids, f, g) == doctest::Approx(direct).epsilon(1e-13));

  GridFunction h(grids);
  lin_comb(2.0, f, -3.0, g, h);
  const double lhs = inner_product_q(grids, h, g);
  const double rhs = 2.0 * inner_product_q(grids, f, g) - 3.0 * inner_product_q(grids, g, g);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

  // Cauchy-Schwarz with the matching norms.
  CHECK(std::abs(inner_product_q(grids, f, g)) <=
        lp_norm(grids, f, 2.0) * lp_norm(grids, g, 2.0) + 1e-12);
}

TEST_CASE("holder exponent ladder on a normalized field") {
  const Grids grids{SpatialGrid::interval(17), TimeGrid{1.0, 8}};
  const GridFunction f = testsup::random_field(grids, 3);
  const double vol = grids.space.interior_count() * grids.space.cell_volume() *
                     grids.time.steps * grids.time.dt();
  // On a probability-normalized domain ||f||_p grows with p; rescale by
  // vol^{1/p} to compare raw quadrature norms.
  const double n2 = lp_norm(grids, f, 2.0) / std::pow(vol, 0.5);
  const double n4 = lp_norm(grids, f, 4.0) / std::pow(vol, 0.25);
  const double n10 = lp_norm(grids, f, 10.0) / std::pow(vol, 0.1);
  CHECK(n2 <= n4 * (1.0 + 1e-12));
  CHECK(n4 <= n10 * (1.0 + 1e-12));
  CHECK(n10 <= max_abs(f) * (1.0 + 1e-12));
}

TEST_CASE("spatial norms and pairings") {
  const SpatialGrid g = SpatialGrid::interval(5, 1.0);
  std::vector<double> a{1.0, -2.0, 3.0};
  std::vector<double> b{0.5, 0.5, 0.5};
  CHECK(lp_norm_spatial(g, a, 1.0) == doctest::Approx(0.25 * 6.0));
  CHECK(lp_norm_spatial(g, a, std::numeric_limits<double>::infinity()) == doctest::Approx(3.0));
  CHECK(inner_product_spatial(g, a, b) == doctest::Approx(0.25 * (0.5 - 1.0 + 1.5)));
}

TEST_CASE("lin_comb resizes its output") {
  const Grids grids{SpatialGrid::interval(7), TimeGrid{1.0, 3}};
  const GridFunction f(grids, 1.0);
  const GridFunction g(grids, 2.0);
  GridFunction out;   // default-constructed, wrong shape
  lin_comb(3.0, f, 0.5, g, out);
  CHECK(out.matches(grids));
  CHECK(out(0, 0) == doctest::Approx(4.0));
  CHECK(out(4, 3) == doctest::Approx(4.0));
}
