#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "parcon/optimizer.hpp"

namespace parcon {

/// Tolerances for the first- and second-order condition checks. The nested
/// state-solver tolerance is tightened the same way the optimizer's is, so
/// recomputed fields agree with optimizer output down to solver noise.
struct ConditionTolerances {
  ConditionTolerances() {
    pde.newton_tol = 1e-12;
    pde.warn_peclet = false;
  }

  double eps_act = 1e-6;            // active-set identification band
  double state_tol = 1e-8;          // recomputed-vs-supplied state, sup norm
  double adjoint_tol = 1e-8;        // recomputed-vs-supplied adjoint, sup norm
  double stationarity_tol = 1e-8;   // projection-formula residual, sup norm
  double feasibility_tol = 1e-6;    // state-bound violation of the recomputed state
  double support_share = 1e-6;      // off-active-set mass allowed, share of TV
  double sign_share = 0.0;          // wrong-signed mass allowed, share of TV
  SolverOpts pde;
};

/// First-order audit of a candidate triplet (u, y, phi, mu). The state and
/// adjoint are recomputed from (u, mu); the supplied fields are compared
/// against them, and stationarity, feasibility, support and sign conditions
/// are measured on the recomputed fields.
struct KktReport {
  double state_residual = 0.0;
  double adjoint_residual = 0.0;
  double stationarity = 0.0;              // ||u - proj(-phi/nu)||_inf
  double feasibility = 0.0;               // sup distance out of the state band
  double support_violation = 0.0;         // mass parked off its active set
  double support_violation_upper = 0.0;   // ceiling part
  double support_violation_lower = 0.0;   // floor part (bilateral)
  double sign_violation = 0.0;            // negative (or wrong-bound) mass
  double total_variation = 0.0;
  std::optional<double> slater_margin;    // filled by callers of check_slater

  bool state_ok = false;
  bool adjoint_ok = false;
  bool stationarity_ok = false;
  bool feasible_ok = false;
  bool support_ok = false;
  bool sign_ok = false;
  bool pass = false;                      // conjunction of the six flags
};

KktReport check_kkt(const ProblemSpec& spec, const Grids& grids, const KktTriplet& triplet,
                    const ConditionTolerances& tol = {});

/// Margin of the linearized interiority condition: the min over all nodes and
/// levels of the distance from y_ubar + z_{u0 - ubar} to the state bounds.
/// Positive means the discrete linearized Slater condition holds for u0.
double check_slater(const ProblemSpec& spec, const Grids& grids, const GridFunction& u_bar,
                    const GridFunction& u0, const SolverOpts& opts = {});

/// Slacks of one direction against the extended critical cone. Each slack is
/// nonnegative exactly when its condition holds; membership allows a relative
/// rounding slack of 1e-9 so the tau = 0 cone stays decidable in floating
/// point. Conditions against empty active sets report +infinity.
struct ConeMembership {
  double tau = 0.0;
  double exponent_p = 2.0;
  double norm_lp = 0.0;
  double slack_gradient = 0.0;     // tau*||v||_p - dL/du(v)
  double slack_sign = 0.0;         // -(worst sign violation on active control nodes)
  double slack_state_upper = 0.0;  // tau*||v||_p - sup z_v on the ceiling-active set
  double slack_state_lower = 0.0;  // tau*||v||_p + inf z_v on the floor-active set
  double slack_measure = 0.0;      // pairing condition against mu
  bool member = false;
};

ConeMembership cone_membership(const ProblemSpec& spec, const Grids& grids,
                               const KktTriplet& triplet, const GridFunction& v,
                               double tau, const ConditionTolerances& tol = {});

/// Sampling knobs shared by sample_cone, check_ssc and the growth probe.
struct SampleOpts {
  ConditionTolerances tol;
  int max_attempt_factor = 100;    // attempt budget = factor * requested count
  int threads = 0;                 // direction evaluations; 0 picks a hardware default
};

/// Cone directions accepted by rejection sampling: deterministic probes
/// (constants, checkerboards, impulses) first, then spatially smoothed
/// Gaussian fields, each sign-processed on the active control sets and
/// rescaled to unit L^p norm before the membership filter.
struct ConeSample {
  std::vector<GridFunction> directions;
  std::vector<ConeMembership> memberships;
  int attempts = 0;
  double acceptance_rate = 0.0;
};

ConeSample sample_cone(const ProblemSpec& spec, const Grids& grids,
                       const KktTriplet& triplet, double tau, int n, std::uint64_t seed,
                       const SampleOpts& opts = {});

struct DirectionSample {
  int id = 0;
  double quadform = 0.0;
  double norm_l2_sq = 0.0;
  double ratio = 0.0;
};

/// Second-order probe: the Lagrangian quadratic form evaluated over sampled
/// cone members. A negative min_ratio certifies the coercivity condition
/// fails for this (tau, grid); a positive one estimates the coercivity
/// constant over the sample. nu_limit_diagnostic is the ratio on the
/// processed space-time checkerboard, the roughest direction the grid
/// carries; parabolic smoothing drives it toward the control cost weight.
struct SscReport {
  double tau = 0.0;
  double exponent_p = 2.0;
  int n_samples = 0;
  int rejected_directions = 0;
  std::vector<DirectionSample> samples;
  double min_ratio = 0.0;
  double nu_limit_diagnostic = 0.0;
  bool kkt_pass = true;    // first-order precheck outcome (warning only)
  bool positive = false;   // min_ratio > 0
};

SscReport check_ssc(const ProblemSpec& spec, const Grids& grids, const KktTriplet& triplet,
                    double tau, int n, std::uint64_t seed, const SampleOpts& opts = {});

/// Empirical quadratic growth around a verified control: admissible random
/// perturbations at prescribed L2 radii, filtered for state feasibility,
/// reporting min 2*(J(u) - J(u_bar)) / ||u - u_bar||_2^2 per radius and the
/// overall empirical growth constant.
struct GrowthReport {
  std::vector<double> radii;
  std::vector<int> feasible_counts;
  std::vector<double> min_ratios;   // NaN where no feasible sample survived
  double kappa = 0.0;               // min over every feasible sample
  bool nonnegative = false;
  double feasibility_filter = 0.0;  // violation bound used for filtering
};

GrowthReport quadratic_growth_probe(const ProblemSpec& spec, const Grids& grids,
                                    const KktTriplet& triplet, std::vector<double> radii,
                                    int n_per_radius, std::uint64_t seed,
                                    const SampleOpts& opts = {});

}  // namespace parcon
