#pragma once

#include <cstdint>
#include <vector>

#include "parcon/pde_forward.hpp"
#include "parcon/pde_sensitivity.hpp"

namespace parcon {

/// Discrete measure on the cylinder and its terminal slice: point masses at
/// (interior node, time level 1..steps) plus point masses at interior nodes
/// of the terminal time. Masses are plain totals (already integrated), so the
/// pairing with a field is a mass-weighted sum of nodal values; total
/// variation is the sum of absolute masses, independent of the grid.
struct MeasurePair {
  enum class Sign { Nonnegative, Signed };

  Sign sign_mode = Sign::Nonnegative;
  int interior = 0;
  int steps = 0;
  std::vector<double> mass_q;          // (k-1)*interior + i, levels 1..steps
  std::vector<double> mass_terminal;   // interior nodes at the final time

  static MeasurePair zero(const Grids& grids, Sign sign = Sign::Nonnegative);

  double& q(int i, int k) { return mass_q[static_cast<std::size_t>(k - 1) * interior + i]; }
  double q(int i, int k) const { return mass_q[static_cast<std::size_t>(k - 1) * interior + i]; }

  bool matches(const Grids& grids) const;
  double total_variation() const;
  double min_mass() const;

  /// Pairing sum(field * mass) over cylinder and terminal masses.
  double pair(const GridFunction& field) const;
};

struct AdjointOpts {
  bool include_cost_gradient = true;   // carry the running-cost derivative source
  SolverOpts pde;
};

/// Adjoint state together with the measure that sourced it.
struct Adjoint {
  GridFunction phi;
  MeasurePair source;
  bool includes_cost_gradient = true;
};

/// Backward implicit Euler with the transposed step matrices of the forward
/// linearization. Cylinder masses enter step k as mass/(cell_volume*dt) on
/// the right-hand side; terminal masses seed the backward march as
/// mass/cell_volume ahead of the final implicit step. Level 0 is zero (it
/// carries no quadrature weight). Throws SignViolation when a measure
/// declared nonnegative carries negative mass.
Adjoint solve_adjoint(const ProblemSpec& spec, const Grids& grids, const State& base,
                      const MeasurePair& mu, const AdjointOpts& opts = {});

/// Max over random directions v of the normalized defect in the duality
/// identity  <phi, v>_Q = <L_y, z_v>_Q + sum z_v dmu_Q + sum z_v(T) dmu_T.
/// This is the definition the adjoint discretization is built to satisfy, so
/// the defect is solver noise only.
double transposition_residual(const ProblemSpec& spec, const Grids& grids, const State& base,
                              const Adjoint& adj, int trials, std::uint64_t seed,
                              const SolverOpts& opts = {});

/// Two-level stability probe of the measure-to-adjoint map: the ratio
/// ||phi||_{L^{5/4}} / TV(mu) is compared between the given grids and one
/// nested refinement (masses re-injected at coincident fine nodes, the base
/// state interpolated). Pure-measure solve (cost gradient suppressed).
struct MeasureStabilityReport {
  bool vacuous = false;        // TV(mu) = 0: nothing to compare
  double coarse_ratio = 0.0;
  double fine_ratio = 0.0;
  double drift = 0.0;          // |fine - coarse| / coarse
  bool stable = false;         // drift below 0.5
};

MeasureStabilityReport check_measure_stability(const ProblemSpec& spec, const Grids& grids,
                                               const State& base, const MeasurePair& mu,
                                               const SolverOpts& opts = {});

}  // namespace parcon
