#pragma once

#include <vector>

#include "parcon/calculus.hpp"

namespace parcon {

/// Knobs for the penalty path and its inner first-order solver. The nested
/// state-solver tolerance is tightened on construction: line-search decisions
/// compare objective values, so solver noise must sit well below the
/// decrease increments being accepted.
struct OptimizerOpts {
  OptimizerOpts() {
    pde.newton_tol = 1e-12;
    // The path solver runs hundreds of state solves; a per-solve mesh-Peclet
    // warning would repeat verbatim, so it stays off here. One-shot callers
    // keep the default warning.
    pde.warn_peclet = false;
  }

  double lambda0 = 1.0;           // first penalty weight
  double sigma = 10.0;            // per-stage growth factor
  int max_stages = 8;
  double inner_tol = 1e-8;        // sup-norm projected stationarity target
  int max_inner = 2000;
  double feasibility_tol = 1e-6;  // sup-norm state violation that ends the path
  double armijo_c = 1e-4;
  int max_backtracks = 60;
  SolverOpts pde;
};

/// Sup over cylinder levels 1..steps of the distance the state sticks out of
/// its admissible band. Zero when the ceiling (and floor) are infinite.
double state_violation(const ProblemSpec& spec, const GridFunction& y);

/// Quadratic penalty for the ceiling excess: (lambda/2) times the squared L2
/// excess over the cylinder plus the squared spatial L2 excess at the final
/// time. Bilateral bounds penalize both sides.
double penalty_value(const ProblemSpec& spec, const Grids& grids, const GridFunction& y,
                     double lambda);

/// Multiplier estimate along the penalty path: the exact gradient of
/// penalty_value in the state, stored as nodal masses. Cylinder masses are
/// lambda * excess * cell_volume * dt, terminal masses lambda * excess *
/// cell_volume; bilateral bounds make the density signed (negative on the
/// floor's excess).
MeasurePair estimate_multiplier(const ProblemSpec& spec, const Grids& grids,
                                const GridFunction& y, double lambda);

struct StageDiag {
  double lambda = 0.0;
  int inner_iterations = 0;
  double stationarity = 0.0;      // ||u - proj(-phi/nu)||_inf at exit
  double max_violation = 0.0;     // state_violation at exit
  double objective = 0.0;         // penalty excluded
  double penalty = 0.0;
  bool inner_converged = false;
};

struct PenalizedResult {
  GridFunction u;
  State state;
  Adjoint adjoint;   // sourced by the multiplier estimate at this lambda
  StageDiag diag;
};

/// Minimizes objective + penalty over the control box by projected gradient
/// with Barzilai-Borwein steps, safeguarded by a monotone Armijo backtrack on
/// the projection arc. The acceptance test carries an absolute noise floor of
/// 1e-12 * (1 + |F|) so state-solver noise cannot deadlock the search.
/// Time level 0 of the control carries no quadrature weight; it is pinned to
/// the projection of zero, the stationary value there.
PenalizedResult solve_penalized(const ProblemSpec& spec, const Grids& grids, double lambda,
                                const GridFunction& u0, const OptimizerOpts& opts = {});

struct KktTriplet {
  GridFunction u;
  State state;
  Adjoint adjoint;   // includes the running-cost gradient source
  MeasurePair mu;
  std::vector<StageDiag> history;
  bool converged = false;
};

/// Penalty path continuation: solves the penalized problem along
/// lambda0 * sigma^j, warm-starting each stage from the previous control,
/// until the state violation falls under feasibility_tol. Throws PathStalled
/// when the violation fails to shrink by at least 10 percent across two
/// consecutive stages; returns converged = false when the stage budget runs
/// out while still progressing.
KktTriplet solve_ocp(const ProblemSpec& spec, const Grids& grids,
                     const GridFunction& u0, const OptimizerOpts& opts = {});
KktTriplet solve_ocp(const ProblemSpec& spec, const Grids& grids,
                     const OptimizerOpts& opts = {});

}  // namespace parcon
