#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "parcon/pde_adjoint.hpp"
#include "support/dense.hpp"
#include "support/instances.hpp"
#include "support/testutil.hpp"

using namespace parcon;
using testsup::kPi;

namespace {

MeasurePair random_measure(const Grids& grids, std::uint64_t seed,
                           MeasurePair::Sign sign = MeasurePair::Sign::Nonnegative) {
  MeasurePair mu = MeasurePair::zero(grids, sign);
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double& m : mu.mass_q) m = unit(eng);
  for (double& m : mu.mass_terminal) m = unit(eng);
  if (sign == MeasurePair::Sign::Signed) {
    std::bernoulli_distribution flip(0.5);
    for (double& m : mu.mass_q)
      if (flip(eng)) m = -m;
    for (double& m : mu.mass_terminal)
      if (flip(eng)) m = -m;
  }
  return mu;
}

}  // namespace

TEST_CASE("measure bookkeeping: totals, accessors, pairing") {
  const Grids g{SpatialGrid::interval(5), TimeGrid{1.0, 3}};
  MeasurePair mu = MeasurePair::zero(g, MeasurePair::Sign::Signed);
  CHECK(mu.interior == 3);
  CHECK(mu.steps == 3);
  CHECK(mu.matches(g));
  CHECK(mu.total_variation() == 0.0);

  mu.q(0, 1) = 0.25;
  mu.q(2, 3) = -0.5;
  mu.mass_terminal[1] = 2.0;
  CHECK(mu.mass_q[0] == 0.25);
  CHECK(mu.mass_q[2 * 3 + 2] == -0.5);
  CHECK(mu.total_variation() == doctest::Approx(2.75));
  CHECK(mu.min_mass() == doctest::Approx(-0.5));

  GridFunction field(g);
  field(0, 1) = 3.0;
  field(2, 3) = 1.0;
  field(1, 3) = 10.0;  // terminal slice lives on the last level
  // masses weight nodal values directly, no quadrature factors
  CHECK(mu.pair(field) == doctest::Approx(0.25 * 3.0 - 0.5 * 1.0 + 2.0 * 10.0));

  const Grids other{SpatialGrid::interval(7), TimeGrid{1.0, 3}};
  CHECK_FALSE(mu.matches(other));
}

TEST_CASE("zero cost and zero measure produce a zero adjoint") {
  ProblemSpec spec = testsup::lq_spec(1.0);
  spec.cost = zero_cost();
  const Grids g{SpatialGrid::interval(17), TimeGrid{1.0, 8}};
  const GridFunction u = testsup::random_field(g, 3);
  const State base = solve_state(spec, g, u, testsup::tight_opts());
  const Adjoint adj = solve_adjoint(spec, g, base, MeasurePair::zero(g));
  CHECK(max_abs(adj.phi) == 0.0);
  CHECK(adj.includes_cost_gradient);
  CHECK(adj.source.total_variation() == 0.0);
}

TEST_CASE("a unit point mass is paired exactly by the adjoint") {
  ProblemSpec spec = testsup::cubic_spec();
  const Grids g{SpatialGrid::interval(17), TimeGrid{1.0, 8}};
  const GridFunction u = testsup::make_field(
      g, [](const Point& p, double t) { return std::cos(kPi * p.x) + t; });
  const State base = solve_state(spec, g, u, testsup::tight_opts());

  AdjointOpts aopts;
  aopts.include_cost_gradient = false;  // isolate the measure pairing
  aopts.pde = testsup::tight_opts();

  SUBCASE("terminal mass") {
    MeasurePair mu = MeasurePair::zero(g);
    const int istar = 7;
    mu.mass_terminal[istar] = 1.0;
    const Adjoint adj = solve_adjoint(spec, g, base, mu, aopts);
    for (std::uint64_t s : {11u, 12u, 13u}) {
      const GridFunction v = testsup::random_field(g, s);
      const LinearizedState z = solve_linearized(spec, g, base, v, testsup::tight_opts());
      const double lhs = inner_product_q(g, adj.phi, v);
      const double rhs = z.z(istar, g.time.steps);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }

  SUBCASE("cylinder mass") {
    MeasurePair mu = MeasurePair::zero(g);
    const int istar = 4, kstar = 3;
    mu.q(istar, kstar) = 1.0;
    const Adjoint adj = solve_adjoint(spec, g, base, mu, aopts);
    const GridFunction v = testsup::random_field(g, 17);
    const LinearizedState z = solve_linearized(spec, g, base, v, testsup::tight_opts());
    CHECK(std::abs(inner_product_q(g, adj.phi, v) - z.z(istar, kstar)) <= 1e-12);
  }
}

TEST_CASE("adjoint is linear in the measure") {
  ProblemSpec spec = testsup::lq_spec(1.0);
  spec.cost = zero_cost();
  const Grids g{SpatialGrid::interval(17), TimeGrid{1.0, 8}};
  const State base = solve_state(spec, g, testsup::random_field(g, 5), testsup::tight_opts());

  const MeasurePair mu1 = random_measure(g, 21, MeasurePair::Sign::Signed);
  const MeasurePair mu2 = random_measure(g, 22, MeasurePair::Sign::Signed);
  MeasurePair combo = MeasurePair::zero(g, MeasurePair::Sign::Signed);
  for (std::size_t j = 0; j < combo.mass_q.size(); ++j)
    combo.mass_q[j] = 2.0 * mu1.mass_q[j] - 3.0 * mu2.mass_q[j];
  for (std::size_t j = 0; j < combo.mass_terminal.size(); ++j)
    combo.mass_terminal[j] = 2.0 * mu1.mass_terminal[j] - 3.0 * mu2.mass_terminal[j];

  const Adjoint a1 = solve_adjoint(spec, g, base, mu1);
  const Adjoint a2 = solve_adjoint(spec, g, base, mu2);
  const Adjoint ac = solve_adjoint(spec, g, base, combo);
  GridFunction expect;
  lin_comb(2.0, a1.phi, -3.0, a2.phi, expect);
  // cost-gradient source enters every solve once, so subtract it twice
  const Adjoint a0 = solve_adjoint(spec, g, base, MeasurePair::zero(g));
  lin_comb(1.0, expect, -1.0 * (2.0 - 3.0 - 1.0), a0.phi, expect);
  CHECK(testsup::max_diff(ac.phi, expect) <= 1e-11);
}

TEST_CASE("nonnegative-mode measures with negative mass are rejected") {
  ProblemSpec spec = testsup::lq_spec(1.0);
  const Grids g{SpatialGrid::interval(9), TimeGrid{1.0, 4}};
  const State base = solve_state(spec, g, GridFunction(g), testsup::tight_opts());

  MeasurePair mu = MeasurePair::zero(g);
  mu.q(1, 2) = -0.1;
  CHECK_THROWS_AS(solve_adjoint(spec, g, base, mu), SignViolation);

  mu.sign_mode = MeasurePair::Sign::Signed;
  CHECK_NOTHROW(solve_adjoint(spec, g, base, mu));
}

TEST_CASE("nonnegative measures give a nonnegative pure-measure adjoint") {
  // Transposed step matrices are M-matrices here (no convection, monotone
  // reaction), so inverse positivity carries masses to a signwise adjoint.
  ProblemSpec spec = testsup::lq_spec(1.0);
  spec.cost = zero_cost();
  spec.reaction = NonlinearityPreset::linear_rate(1.0).make();
  const Grids g{SpatialGrid::interval(7), TimeGrid{1.0, 5}};
  const State base = solve_state(spec, g, testsup::random_field(g, 9), testsup::tight_opts());

  const MeasurePair mu = random_measure(g, 33);
  AdjointOpts aopts;
  aopts.pde = testsup::tight_opts();
  const Adjoint adj = solve_adjoint(spec, g, base, mu, aopts);
  double min_phi = 0.0;
  for (double p : adj.phi.data()) min_phi = std::min(min_phi, p);
  CHECK(min_phi >= -1e-14);
}

TEST_CASE("dense oracle agreement including measure sources") {
  const double rate = 0.6;
  ProblemSpec spec = testsup::lq_spec(1.0);
  spec.reaction = NonlinearityPreset::linear_rate(rate).make();
  const Grids g{SpatialGrid::interval(7), TimeGrid{1.0, 5}};
  const GridFunction u = testsup::random_field(g, 41);
  const State base = solve_state(spec, g, u, testsup::tight_opts());
  const MeasurePair mu = random_measure(g, 42);

  AdjointOpts aopts;
  aopts.pde = testsup::tight_opts();
  const Adjoint adj = solve_adjoint(spec, g, base, mu, aopts);

  // Rebuild the combined source as densities for the dense recursion.
  const double vol = g.space.cell_volume();
  const double dt = g.time.dt();
  GridFunction source(g);
  for (int k = 1; k <= g.time.steps; ++k) {
    const double t = g.time.time(k);
    for (int i = 0; i < g.space.interior_count(); ++i) {
      source(i, k) = spec.cost.dy(g.space.point(i), t, base.y(i, k)) +
                     mu.q(i, k) / (vol * dt);
    }
  }
  std::vector<double> terminal(mu.mass_terminal);
  for (double& m : terminal) m /= vol;

  const GridFunction oracle = testsup::dense_adjoint(spec, g, source, terminal, rate);
  CHECK(testsup::max_diff(adj.phi, oracle) <= 1e-12);
}

TEST_CASE("transposition residual is at solver-noise level for every preset") {
  struct Preset {
    NonlinearityPreset p;
    const char* name;
  };
  const Preset presets[] = {
      {NonlinearityPreset::zero(), "zero"},
      {NonlinearityPreset::linear_rate(0.8), "linear"},
      {NonlinearityPreset::cubic_odd(1.0), "cubic"},
      {NonlinearityPreset::exp_weighted([](const Point& p, double) { return 0.3 + 0.2 * p.x; }),
       "exp"},
  };
  const Grids g{SpatialGrid::interval(17), TimeGrid{1.0, 16}};
  for (const auto& [preset, name] : presets) {
    CAPTURE(name);
    ProblemSpec spec = testsup::lq_spec(1.0);
    spec.reaction = preset.make();
    const GridFunction u = testsup::make_field(
        g, [](const Point& p, double t) { return std::sin(kPi * p.x) * (1.0 - t); });
    const State base = solve_state(spec, g, u, testsup::tight_opts());
    const MeasurePair mu = random_measure(g, 55);
    AdjointOpts aopts;
    aopts.pde = testsup::tight_opts();
    const Adjoint adj = solve_adjoint(spec, g, base, mu, aopts);
    CHECK(transposition_residual(spec, g, base, adj, 8, 77, testsup::tight_opts()) <= 1e-10);
  }
}

TEST_CASE("measure stability probe") {
  ProblemSpec spec = testsup::lq_spec(1.0);
  const Grids g{SpatialGrid::interval(17), TimeGrid{1.0, 8}};
  const State base = solve_state(spec, g, GridFunction(g), testsup::tight_opts());

  SUBCASE("zero measure is vacuous") {
    const MeasureStabilityReport r =
        check_measure_stability(spec, g, base, MeasurePair::zero(g), testsup::tight_opts());
    CHECK(r.vacuous);
    CHECK_FALSE(r.stable);
  }

  SUBCASE("an interior point mass is stable under refinement") {
    MeasurePair mu = MeasurePair::zero(g);
    mu.q(7, 4) = 1.0;
    mu.mass_terminal[7] = 0.5;
    const MeasureStabilityReport r =
        check_measure_stability(spec, g, base, mu, testsup::tight_opts());
    CHECK_FALSE(r.vacuous);
    CHECK(r.coarse_ratio > 0.0);
    CHECK(r.fine_ratio > 0.0);
    CHECK(r.stable);
  }
}
