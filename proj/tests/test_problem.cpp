#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "parcon/problem.hpp"
#include "support/instances.hpp"
#include "support/testutil.hpp"

using namespace parcon;

namespace {

bool mentions(const std::vector<std::string>& msgs, const std::string& needle) {
  return std::any_of(msgs.begin(), msgs.end(), [&](const std::string& m) {
    return m.find(needle) != std::string::npos;
  });
}

ProblemSpec valid_1d() {
  ProblemSpec s = testsup::lq_spec(1.0);
  s.control_lower = -5.0;
  s.control_upper = 5.0;
  s.state_bound.gamma = 1.0;
  return s;
}

}  // namespace

TEST_CASE("diffusion eigenvalue bound") {
  CHECK(DiffusionMatrix::isotropic(2.0).lambda_min(1) == doctest::Approx(2.0));
  // In one dimension only a11 acts.
  CHECK(DiffusionMatrix{0.5, 9.0, 9.0}.lambda_min(1) == doctest::Approx(0.5));
  // Symmetric 2x2: eigenvalues of [[2,1],[1,2]] are 1 and 3.
  CHECK(DiffusionMatrix{2.0, 1.0, 2.0}.lambda_min(2) == doctest::Approx(1.0));
  CHECK(DiffusionMatrix{1.0, 2.0, 1.0}.lambda_min(2) == doctest::Approx(-1.0));
}

TEST_CASE("validate accepts the stock instances") {
  const Grids g1{SpatialGrid::interval(17), TimeGrid{1.0, 8}};
  CHECK(validate(valid_1d(), g1).empty());
  CHECK(validate(testsup::testbed_spec(), g1).empty());
  CHECK(validate(testsup::bilateral_spec(), g1).empty());
  CHECK(validate(testsup::cubic_spec(), g1).empty());
}

TEST_CASE("validate is pure and repeatable") {
  const Grids g{SpatialGrid::interval(9), TimeGrid{1.0, 4}};
  ProblemSpec s = valid_1d();
  s.tikhonov = 0.0;
  const auto first = validate(s, g);
  const auto second = validate(s, g);
  CHECK(first == second);
  CHECK(mentions(first, "control cost weight"));
}

TEST_CASE("validate flags each standing assumption") {
  const Grids g1{SpatialGrid::interval(9), TimeGrid{1.0, 4}};
  const Grids g2{SpatialGrid::rectangle(5, 5), TimeGrid{1.0, 4}};

  SUBCASE("dimension mismatch") {
    ProblemSpec s = valid_1d();
    s.dim = 2;
    CHECK(mentions(validate(s, g1), "does not match"));
  }
  SUBCASE("unbounded controls rejected in dimension 2") {
    ProblemSpec s = valid_1d();
    s.dim = 2;
    s.control_lower = -kUnbounded;
    s.control_upper = kUnbounded;
    const auto msgs = validate(s, g2);
    CHECK(mentions(msgs, "finite control bounds"));
  }
  SUBCASE("infinite one-sided control bounds pass in dimension 1") {
    ProblemSpec s = valid_1d();
    s.control_lower = -kUnbounded;
    s.control_upper = kUnbounded;
    CHECK(validate(s, g1).empty());
  }
  SUBCASE("ellipticity") {
    ProblemSpec s = valid_1d();
    s.diffusion = {1.0, 0.0, 1.0};
    s.dim = 1;
    s.diffusion.a11 = -0.5;
    CHECK(mentions(validate(s, g1), "ellipticity"));
  }
  SUBCASE("norm exponent floors by dimension") {
    ProblemSpec s = valid_1d();
    s.exponent_p = 1.5;
    CHECK(mentions(validate(s, g1), "exponent"));

    ProblemSpec s2 = valid_1d();
    s2.dim = 2;
    s2.exponent_p = 2.0;   // needs > 2 in dimension 2
    CHECK(mentions(validate(s2, g2), "exponent"));
    s2.exponent_p = 3.0;
    CHECK_FALSE(mentions(validate(s2, g2), "exponent"));
  }
  SUBCASE("state bound signs") {
    ProblemSpec s = valid_1d();
    s.state_bound.gamma = 0.0;
    CHECK(mentions(validate(s, g1), "ceiling"));

    ProblemSpec s2 = valid_1d();
    s2.state_bound.mode = StateConstraint::Mode::Bilateral;
    s2.state_bound.gamma_min = 0.1;
    s2.state_bound.gamma_max = 0.5;
    CHECK(mentions(validate(s2, g1), "straddle"));
  }
  SUBCASE("initial state must start strictly inside the bounds") {
    ProblemSpec s = valid_1d();
    s.initial_state = [](const Point&) { return 1.0; };   // sits on the ceiling
    CHECK(mentions(validate(s, g1), "initial state"));
  }
  SUBCASE("missing callbacks") {
    ProblemSpec s = valid_1d();
    s.reaction.dyy = nullptr;
    s.initial_state = nullptr;
    const auto msgs = validate(s, g1);
    CHECK(mentions(msgs, "reaction"));
    CHECK(mentions(msgs, "initial state"));
  }
  SUBCASE("declared monotone floor is sampled") {
    ProblemSpec s = valid_1d();
    s.reaction.value = [](const Point&, double, double y) { return -2.0 * y; };
    s.reaction.dy = [](const Point&, double, double) { return -2.0; };
    s.reaction.dyy = [](const Point&, double, double) { return 0.0; };
    s.reaction.monotone_floor = 0.0;   // claims monotone, is not
    CHECK(mentions(validate(s, g1), "monotone floor"));
    s.reaction.monotone_floor = -2.0;  // honest declaration passes
    CHECK_FALSE(mentions(validate(s, g1), "monotone floor"));
  }
}

TEST_CASE("nonlinearity presets expose consistent derivatives") {
  const Point p{0.5, 0.0};
  SUBCASE("cubic") {
    const Nonlinearity f = NonlinearityPreset::cubic_odd(2.0).make();
    CHECK(f.value(p, 0.0, 1.5) == doctest::Approx(2.0 * 1.5 * 1.5 * 1.5));
    CHECK(f.dy(p, 0.0, 1.5) == doctest::Approx(6.0 * 1.5 * 1.5));
    CHECK(f.dyy(p, 0.0, 1.5) == doctest::Approx(12.0 * 1.5));
    CHECK(f.monotone_floor == 0.0);
  }
  SUBCASE("exponential with weight") {
    const Nonlinearity f =
        NonlinearityPreset::exp_weighted([](const Point& q, double t) { return q.x + t; }).make();
    CHECK(f.value(p, 1.0, 0.5) == doctest::Approx(1.5 * std::exp(0.5)));
    CHECK(f.dy(p, 1.0, 0.5) == doctest::Approx(f.value(p, 1.0, 0.5)));
    CHECK(f.dyy(p, 1.0, 0.5) == doctest::Approx(f.value(p, 1.0, 0.5)));
  }
  SUBCASE("finite differences confirm the analytic derivatives") {
    const Nonlinearity f = NonlinearityPreset::cubic_odd(1.0).make();
    const double y = 0.8, s = 1e-6;
    const double fd = (f.value(p, 0.0, y + s) - f.value(p, 0.0, y - s)) / (2.0 * s);
    CHECK(fd == doctest::Approx(f.dy(p, 0.0, y)).epsilon(1e-8));
  }
}

TEST_CASE("tracking cost and its derivatives") {
  const RunningCost c = tracking_cost([](const Point& p, double t) { return p.x + t; }, 3.0);
  const Point p{0.25, 0.0};
  CHECK(c.value(p, 0.5, 2.0) == doctest::Approx(0.5 * 3.0 * 1.25 * 1.25));
  CHECK(c.dy(p, 0.5, 2.0) == doctest::Approx(3.0 * 1.25));
  CHECK(c.dyy(p, 0.5, 2.0) == doctest::Approx(3.0));
  const RunningCost z = zero_cost();
  CHECK(z.value(p, 0.1, 7.0) == 0.0);
  CHECK(z.dy(p, 0.1, 7.0) == 0.0);
}

TEST_CASE("admissibility of control and state pairs") {
  const Grids g{SpatialGrid::interval(9), TimeGrid{1.0, 4}};
  ProblemSpec s = valid_1d();   // controls in [-5, 5], ceiling 1

  GridFunction u(g, 0.0);
  GridFunction y(g, 0.5);
  CHECK(admissible(s, g, u, y, 0.0));

  SUBCASE("control bound breach") {
    u(3, 2) = 5.5;
    CHECK_FALSE(admissible(s, g, u, y, 0.0));
    CHECK(admissible(s, g, u, y, 0.5));   // tolerance is monotone
    CHECK(admissible(s, g, u, y, 1.0));
  }
  SUBCASE("ceiling breach") {
    y(1, 1) = 1.2;
    CHECK_FALSE(admissible(s, g, u, y, 0.1));
    CHECK(admissible(s, g, u, y, 0.2 + 1e-12));
  }
  SUBCASE("bilateral floor breach") {
    s.state_bound.mode = StateConstraint::Mode::Bilateral;
    s.state_bound.gamma_min = -0.25;
    s.state_bound.gamma_max = 1.0;
    y(2, 3) = -0.3;
    CHECK_FALSE(admissible(s, g, u, y, 0.0));
    CHECK(admissible(s, g, u, y, 0.1));
  }
  SUBCASE("shape mismatch throws") {
    const Grids fine{SpatialGrid::interval(17), TimeGrid{1.0, 4}};
    CHECK_THROWS_AS(admissible(s, fine, u, y, 0.0), DimensionMismatch);
  }
}

TEST_CASE("control projection clamps nodally and is idempotent") {
  const Grids g{SpatialGrid::interval(5), TimeGrid{1.0, 2}};
  ProblemSpec s = valid_1d();
  s.control_lower = -1.0;
  s.control_upper = 2.0;

  GridFunction w(g);
  w(0, 0) = -3.0;
  w(1, 1) = 0.5;
  w(2, 2) = 9.0;
  const GridFunction p = projected_copy(s, w);
  CHECK(p(0, 0) == doctest::Approx(-1.0));
  CHECK(p(1, 1) == doctest::Approx(0.5));
  CHECK(p(2, 2) == doctest::Approx(2.0));

  GridFunction q = p;
  project_control(s, q);
  CHECK(testsup::max_diff(p, q) == 0.0);

  SUBCASE("infinite bounds pass values through") {
    s.control_lower = -kUnbounded;
    s.control_upper = kUnbounded;
    GridFunction r = w;
    project_control(s, r);
    CHECK(testsup::max_diff(r, w) == 0.0);
  }
}
