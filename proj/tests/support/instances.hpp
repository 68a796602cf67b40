#pragma once

// Shared problem instances. The constants here are frozen: acceptance runs
// and module tests both read them, so a change here is a change to what the
// suite certifies.

#include <cmath>
#include <functional>

#include "parcon/calculus.hpp"
#include "parcon/optimizer.hpp"
#include "parcon/pde_adjoint.hpp"
#include "parcon/problem.hpp"
#include "support/testutil.hpp"

namespace testsup {

/// Linear-quadratic base: unit diffusion on (0,1), no reaction, tracking
/// cost against amp*sin(pi x). Everything else is set by the callers.
inline parcon::ProblemSpec lq_spec(double nu, double amp = 2.0, double weight = 1.0) {
  parcon::ProblemSpec s;
  s.dim = 1;
  s.diffusion = parcon::DiffusionMatrix::isotropic(1.0);
  s.reaction = parcon::NonlinearityPreset::zero().make();
  s.cost = parcon::tracking_cost(
      [amp](const parcon::Point& p, double) { return amp * std::sin(kPi * p.x); }, weight);
  s.tikhonov = nu;
  s.initial_state = [](const parcon::Point&) { return 0.0; };
  s.state_bound.gamma = parcon::kUnbounded;
  return s;
}

/// State-constrained testbed: the tracking target pulls the state well above
/// the ceiling through the middle of the interval, so the optimum rides the
/// constraint on an interior region and the multiplier concentrates there.
/// The control weight 0.1 keeps the penalized subproblems well enough
/// conditioned that the inner solver still converges at the final weights.
inline parcon::ProblemSpec testbed_spec() {
  parcon::ProblemSpec s = lq_spec(0.1, 3.0);
  s.control_lower = -50.0;
  s.control_upper = 50.0;
  s.state_bound.mode = parcon::StateConstraint::Mode::UpperOnly;
  s.state_bound.gamma = 0.1;
  return s;
}

/// Bilateral variant: the target's sign alternates in time, so the state
/// presses the ceiling early and the floor through the middle of the horizon
/// and the two Jordan parts of the multiplier live on disjoint time bands.
inline parcon::ProblemSpec bilateral_spec() {
  parcon::ProblemSpec s = lq_spec(0.1);
  s.cost = parcon::tracking_cost(
      [](const parcon::Point& p, double t) {
        return 3.0 * std::sin(kPi * p.x) * std::cos(2.0 * kPi * t);
      },
      1.0);
  s.control_lower = -50.0;
  s.control_upper = 50.0;
  s.state_bound.mode = parcon::StateConstraint::Mode::Bilateral;
  s.state_bound.gamma_min = -0.1;
  s.state_bound.gamma_max = 0.1;
  return s;
}

/// Concave-in-state instance: strongly negative tracking weight with a small
/// control cost, so smooth directions make the quadratic form negative.
inline parcon::ProblemSpec indefinite_spec() {
  parcon::ProblemSpec s = lq_spec(1e-2, 1.0, -4.0);
  s.control_lower = -50.0;
  s.control_upper = 50.0;
  return s;
}

/// Smooth genuinely nonlinear instance for derivative and curvature probes:
/// odd cubic reaction, time-decaying target.
inline parcon::ProblemSpec cubic_spec() {
  parcon::ProblemSpec s;
  s.dim = 1;
  s.diffusion = parcon::DiffusionMatrix::isotropic(1.0);
  s.reaction = parcon::NonlinearityPreset::cubic_odd(1.0).make();
  s.cost = parcon::tracking_cost(
      [](const parcon::Point& p, double t) { return 2.0 * std::exp(-t) * std::sin(kPi * p.x); },
      1.0);
  s.tikhonov = 0.1;
  s.control_lower = -10.0;
  s.control_upper = 10.0;
  s.initial_state = [](const parcon::Point& p) { return std::sin(kPi * p.x); };
  s.state_bound.gamma = parcon::kUnbounded;
  return s;
}

/// Exact solution pair of the built-in manufactured problem on (0, L):
/// state exp(-t) sin(pi x / L) under f(y) = y, where the reaction cancels
/// the time derivative and the control carries the diffusion term alone.
struct Manufactured {
  double length = 1.0;

  double state(double x, double t) const {
    return std::exp(-t) * std::sin(kPi * x / length);
  }
  double control(double x, double t) const {
    const double c = kPi / length;
    return c * c * state(x, t);
  }

  parcon::ProblemSpec spec() const {
    parcon::ProblemSpec s;
    s.dim = 1;
    s.diffusion = parcon::DiffusionMatrix::isotropic(1.0);
    s.reaction = parcon::NonlinearityPreset::linear_rate(1.0).make();
    s.cost = parcon::zero_cost();
    s.tikhonov = 1.0;
    const double len = length;
    s.initial_state = [len](const parcon::Point& p) { return std::sin(kPi * p.x / len); };
    s.state_bound.gamma = parcon::kUnbounded;
    return s;
  }

  /// Sup-norm error of the discrete state against the exact one when driven
  /// by the exact control sampled nodally.
  double solve_error(const parcon::Grids& grids) const {
    const parcon::ProblemSpec s = spec();
    const parcon::GridFunction u = make_field(
        grids, [this](const parcon::Point& p, double t) { return control(p.x, t); });
    const parcon::State st = parcon::solve_state(s, grids, u, tight_opts());
    double err = 0.0;
    for (int k = 0; k <= grids.time.steps; ++k) {
      const double t = grids.time.time(k);
      for (int i = 0; i < grids.space.interior_count(); ++i)
        err = std::max(err, std::abs(st.y(i, k) - state(grids.space.point(i).x, t)));
    }
    return err;
  }
};

/// Candidate triplet assembled from (u, mu): state and cost-sourced adjoint
/// recomputed with tight solver settings.
inline parcon::KktTriplet make_triplet(const parcon::ProblemSpec& spec,
                                       const parcon::Grids& grids, parcon::GridFunction u,
                                       parcon::MeasurePair mu) {
  parcon::KktTriplet t;
  t.u = std::move(u);
  t.state = parcon::solve_state(spec, grids, t.u, tight_opts());
  parcon::AdjointOpts ao;
  ao.pde = tight_opts();
  t.adjoint = parcon::solve_adjoint(spec, grids, t.state, mu, ao);
  t.mu = std::move(mu);
  t.converged = true;
  return t;
}

/// Optimizer settings for the state-constrained testbeds. The feasibility
/// target 1e-6 needs penalty weights around 1e8, and the inner problem's
/// conditioning grows with the weight, so the late stages need a much larger
/// iteration budget than the default.
inline parcon::OptimizerOpts testbed_opts() {
  parcon::OptimizerOpts o;
  o.max_stages = 10;
  o.max_inner = 60000;
  return o;
}

}  // namespace testsup
