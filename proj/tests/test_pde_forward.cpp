#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "parcon/pde_forward.hpp"
#include "support/dense.hpp"
#include "support/instances.hpp"
#include "support/testutil.hpp"

using namespace parcon;
using testsup::kPi;

namespace {

ProblemSpec base_spec(Nonlinearity f) {
  ProblemSpec s;
  s.dim = 1;
  s.diffusion = DiffusionMatrix::isotropic(1.0);
  s.reaction = std::move(f);
  s.cost = zero_cost();
  s.tikhonov = 1.0;
  s.initial_state = [](const Point&) { return 0.0; };
  s.state_bound.gamma = kUnbounded;
  return s;
}

}  // namespace

TEST_CASE("zero data stays exactly zero") {
  const Grids g{SpatialGrid::interval(17), TimeGrid{1.0, 8}};
  for (auto preset : {NonlinearityPreset::zero(), NonlinearityPreset::linear_rate(0.5),
                      NonlinearityPreset::cubic_odd(1.0)}) {
    const ProblemSpec s = base_spec(preset.make());
    const State st = solve_state(s, g, GridFunction(g), testsup::tight_opts());
    CHECK(max_abs(st.y) == 0.0);
    CHECK(st.newton_iterations.size() == 8);
  }
}

TEST_CASE("initial level is the sampled initial state, exactly") {
  const Grids g{SpatialGrid::interval(9), TimeGrid{1.0, 2}};
  ProblemSpec s = base_spec(NonlinearityPreset::zero().make());
  s.initial_state = [](const Point& p) { return std::cos(3.0 * p.x); };
  const State st = solve_state(s, g, GridFunction(g));
  for (int i = 0; i < g.space.interior_count(); ++i)
    CHECK(st.y(i, 0) == std::cos(3.0 * g.space.point(i).x));
}

TEST_CASE("dense oracle agreement at small size") {
  const Grids g{SpatialGrid::interval(7), TimeGrid{1.0, 5}};

  SUBCASE("pure diffusion") {
    ProblemSpec s = base_spec(NonlinearityPreset::zero().make());
    s.initial_state = [](const Point& p) { return p.x * (1.0 - p.x); };
    const GridFunction u = testsup::random_field(g, 11);
    const State st = solve_state(s, g, u, testsup::tight_opts());
    const GridFunction oracle = testsup::dense_forward(s, g, u, 0.0);
    CHECK(testsup::max_diff(st.y, oracle) <= 1e-12);
  }
  SUBCASE("linear reaction and convection") {
    ProblemSpec s = base_spec(NonlinearityPreset::linear_rate(0.7).make());
    s.convection[0] = [](const Point& p, double) { return 0.5 + p.x; };
    s.initial_state = [](const Point& p) { return std::sin(kPi * p.x); };
    SolverOpts o = testsup::tight_opts();
    const GridFunction u = testsup::random_field(g, 12);
    const State st = solve_state(s, g, u, o);
    const GridFunction oracle = testsup::dense_forward(s, g, u, 0.7);
    CHECK(testsup::max_diff(st.y, oracle) <= 1e-12);
  }
}

TEST_CASE("manufactured solution converges at first order in time, second in space") {
  testsup::Manufactured mms;
  // The wider interval halves the solution frequency, which keeps both sweeps
  // inside their asymptotic regimes at these resolutions.
  mms.length = 2.0;

  // dt tied to h^2 keeps the temporal error subordinate on the spatial sweep.
  std::vector<double> hs, errs;
  for (int level = 0; level < 3; ++level) {
    const int nodes = 16 * (1 << level) + 1;
    const int steps = 8 * (1 << (2 * level));
    const Grids g{SpatialGrid::interval(nodes, mms.length), TimeGrid{1.0, steps}};
    hs.push_back(g.space.spacing(0));
    errs.push_back(mms.solve_error(g));
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
  CHECK(testsup::fit_slope(hs, errs) >= 1.9);

  // Temporal sweep against a fixed spatial grid whose truncation error sits
  // well below the coarsest dt contribution.
  std::vector<double> dts, terrs;
  for (int steps : {16, 32, 64}) {
    const Grids g{SpatialGrid::interval(65, mms.length), TimeGrid{1.0, steps}};
    dts.push_back(g.time.dt());
    terrs.push_back(mms.solve_error(g));
  }
  CHECK(testsup::fit_slope(dts, terrs) >= 0.9);
}

TEST_CASE("odd cubic absorption decays a nonnegative profile") {
  const Grids g{SpatialGrid::interval(33), TimeGrid{1.0, 16}};
  ProblemSpec s = base_spec(NonlinearityPreset::cubic_odd(1.0).make());
  s.initial_state = [](const Point& p) { return std::sin(kPi * p.x); };
  const State st = solve_state(s, g, GridFunction(g), testsup::tight_opts());

  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= g.time.steps; ++k) {
    double mx = 0.0, mn = 0.0;
    for (int i = 0; i < g.space.interior_count(); ++i) {
      mx = std::max(mx, st.y(i, k));
      mn = std::min(mn, st.y(i, k));
    }
    CHECK(mn >= -1e-14);      // nonnegativity is preserved
    CHECK(mx <= prev + 1e-14);   // sup norm never grows
    prev = mx;
  }
}

TEST_CASE("comparison principle: a larger source gives a larger state") {
  const Grids g{SpatialGrid::interval(17), TimeGrid{1.0, 8}};
  const ProblemSpec s = base_spec(NonlinearityPreset::cubic_odd(0.5).make());
  const GridFunction u = testsup::make_field(
      g, [](const Point& p, double t) { return (1.0 + t) * p.x * (1.0 - p.x); });
  GridFunction u2;
  lin_comb(2.0, u, 0.0, u, u2);

  const State y1 = solve_state(s, g, u, testsup::tight_opts());
  const State y2 = solve_state(s, g, u2, testsup::tight_opts());
  for (std::size_t j = 0; j < y1.y.data().size(); ++j)
    CHECK(y2.y.data()[j] >= y1.y.data()[j] - 1e-12);
}

TEST_CASE("control-to-state map is nonexpansive over the horizon") {
  // With a monotone reaction the sup-norm difference of two states is at
  // most horizon times the sup-norm difference of the controls.
  const Grids g{SpatialGrid::interval(17), TimeGrid{1.0, 8}};
  const ProblemSpec s = base_spec(NonlinearityPreset::cubic_odd(1.0).make());
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const GridFunction u1 = testsup::random_field(g, 100 + trial);
    const GridFunction u2 = testsup::random_field(g, 200 + trial);
    const State y1 = solve_state(s, g, u1, testsup::tight_opts());
    const State y2 = solve_state(s, g, u2, testsup::tight_opts());
    GridFunction dy, du;
    lin_comb(1.0, y1.y, -1.0, y2.y, dy);
    lin_comb(1.0, u1, -1.0, u2, du);
    worst = std::max(worst, max_abs(dy) / max_abs(du));
  }
  CHECK(worst <= g.time.horizon * (1.0 + 1e-10));
  CHECK(worst > 0.0);
}

TEST_CASE("accepted residuals respect the solver tolerance") {
  const Grids g{SpatialGrid::interval(17), TimeGrid{1.0, 8}};
  const ProblemSpec s = base_spec(NonlinearityPreset::cubic_odd(1.0).make());
  SolverOpts o = testsup::tight_opts();
  const State st = solve_state(s, g, testsup::random_field(g, 5), o);
  CHECK(st.max_residual <= 1e-10);   // quadratic Newton lands far below the target
  for (int it : st.newton_iterations) CHECK(it >= 1);
}

TEST_CASE("input validation") {
  const Grids g{SpatialGrid::interval(9), TimeGrid{1.0, 4}};
  const ProblemSpec s = base_spec(NonlinearityPreset::zero().make());

  SUBCASE("shape mismatch") {
    const Grids fine{SpatialGrid::interval(17), TimeGrid{1.0, 4}};
    CHECK_THROWS_AS(solve_state(s, g, GridFunction(fine)), DimensionMismatch);
  }
  SUBCASE("non-finite control") {
    GridFunction u(g);
    u(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(solve_state(s, g, u), std::invalid_argument);
  }
}

TEST_CASE("newton budget exhaustion reports the failing step") {
  const Grids g{SpatialGrid::interval(9), TimeGrid{1.0, 4}};
  ProblemSpec s = base_spec(NonlinearityPreset::cubic_odd(1.0).make());
  s.initial_state = [](const Point& p) { return 5.0 * std::sin(kPi * p.x); };
  SolverOpts o;
  o.max_newton = 1;   // one iteration cannot close a cubic step
  o.newton_tol = 1e-14;
  bool threw = false;
  try {
    solve_state(s, g, GridFunction(g, 10.0), o);
  } catch (const NewtonDiverged& e) {
    threw = true;
    CHECK(e.time_step >= 1);
    CHECK(e.residual > 0.0);
  }
  CHECK(threw);
}

TEST_CASE("step-size guard rejects dt against a strongly negative reaction slope") {
  const Grids g{SpatialGrid::interval(9), TimeGrid{1.0, 4}};   // dt = 0.25
  ProblemSpec s = base_spec(NonlinearityPreset::linear_rate(-10.0).make());
  CHECK_THROWS_AS(solve_state(s, g, GridFunction(g)), LinearSolveFailure);

  // The same reaction with a compatible dt marches fine.
  const Grids fine{SpatialGrid::interval(9), TimeGrid{1.0, 64}};
  CHECK_NOTHROW(solve_state(s, fine, GridFunction(fine)));
}
