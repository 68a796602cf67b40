#pragma once

#include <vector>

#include "parcon/grid.hpp"
#include "parcon/problem.hpp"

namespace parcon {

/// Tolerances for the nonlinear marching solver. newton_tol bounds the
/// max-norm residual of the dt-scaled step equation.
struct SolverOpts {
  double newton_tol = 1e-10;
  int max_newton = 50;
  int max_halvings = 30;
  double linear_tol = 1e-12;
  int max_linear_iterations = 20000;
  bool warn_peclet = true;
};

/// Solution of the state equation plus per-step solver diagnostics.
struct State {
  GridFunction y;
  std::vector<int> newton_iterations;   // per time step, 1..steps
  double max_residual = 0.0;            // worst accepted step residual
};

/// Marches the semilinear parabolic state equation with implicit Euler and a
/// damped (step-halving) Newton solve per step, warm-started from the
/// previous level. Level 0 is the sampled initial state, exactly.
State solve_state(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
                  const SolverOpts& opts = {});

/// Initial state sampled at interior nodes.
SpatialField eval_initial_state(const ProblemSpec& spec, const Grids& grids);

}  // namespace parcon
