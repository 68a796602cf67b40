#pragma once

#include <cstdint>

#include "parcon/pde_forward.hpp"

namespace parcon {

struct LinearizedState {
  GridFunction z;
};

struct SecondOrderState {
  GridFunction w;
};

/// Frozen-coefficient implicit Euler for the linearized equation about a
/// converged base state: each step solves the exact Jacobian of the discrete
/// forward step, so this is the exact derivative of the discrete control-to-
/// state map. Starts from zero.
LinearizedState solve_linearized(const ProblemSpec& spec, const Grids& grids,
                                 const State& base, const GridFunction& v,
                                 const SolverOpts& opts = {});

/// Second derivative of the discrete map in directions (z1, z2): same step
/// matrices, right-hand side -f_yy(y) z1 z2, zero start. Symmetric in its
/// direction arguments by construction.
SecondOrderState solve_second(const ProblemSpec& spec, const Grids& grids,
                              const State& base, const LinearizedState& z1,
                              const LinearizedState& z2, const SolverOpts& opts = {});

/// Norm-ratio stability probe of the linearized map over random directions:
/// ||z||_L10 / ||v||_L2 and ||z||_inf / ||v||_Lp must stay bounded under the
/// smoothing the parabolic solve provides.
struct LinearizedBoundsReport {
  int trials = 0;
  double min_ratio_l10 = 0.0, max_ratio_l10 = 0.0;
  double min_ratio_linf = 0.0, max_ratio_linf = 0.0;
  bool stable = false;   // all ratios finite and max/min spread below 1e3
};

LinearizedBoundsReport check_linearized_bounds(const ProblemSpec& spec, const Grids& grids,
                                               const State& base, int trials,
                                               std::uint64_t seed,
                                               const SolverOpts& opts = {});

}  // namespace parcon
