#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "parcon/pde_adjoint.hpp"

namespace parcon {

/// Tracking-plus-control objective evaluated through a fresh state solve.
/// Pass out_state to keep the solve.
double eval_j(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
              const SolverOpts& opts = {}, State* out_state = nullptr);

/// Objective value reusing an already-solved state for this control.
double eval_j_with(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
                   const State& st);

/// Exact gradient of the discrete objective: phi + nu*u nodally, phi the
/// measure-free adjoint along the state at u. Level 0 of phi is zero, so the
/// gradient there is nu*u(0); that level carries no quadrature weight.
GridFunction grad_j(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
                    const SolverOpts& opts = {}, State* out_state = nullptr,
                    Adjoint* out_adjoint = nullptr);

/// Lagrangian value J(u) + sum (y - ceiling) dmu, the constraint offset taken
/// per Jordan part under bilateral bounds (positive masses against the
/// ceiling, negative against the floor).
double lagrangian(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
                  const MeasurePair& mu, const SolverOpts& opts = {},
                  State* out_state = nullptr);

/// Exact gradient of the Lagrangian in u: phi_mu + nu*u with the measure-
/// sourced adjoint.
GridFunction grad_lagrangian(const ProblemSpec& spec, const Grids& grids,
                             const GridFunction& u, const MeasurePair& mu,
                             const SolverOpts& opts = {}, State* out_state = nullptr,
                             Adjoint* out_adjoint = nullptr);

struct QuadFormSample {
  double value = 0.0;     // second derivative of the Lagrangian in direction v
  double norm_l2 = 0.0;
  double norm_lp = 0.0;
};

/// Evaluates the Lagrangian's second-order quadratic form about a fixed
/// (u, mu): the state and measure-sourced adjoint are solved once, each
/// direction then costs one linearized solve. The form is
///   integral (L_yy - f_yy * phi) z_v^2 + nu ||v||_2^2.
class QuadFormEvaluator {
public:
  QuadFormEvaluator(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
                    const MeasurePair& mu, const SolverOpts& opts = {});

  const State& state() const { return state_; }
  const Adjoint& adjoint() const { return adjoint_; }

  QuadFormSample eval(const GridFunction& v) const;

  /// Same value when the linearized state of v is already available.
  QuadFormSample eval_with(const GridFunction& v, const LinearizedState& zv) const;

  /// Cross term by polarization: (q(v1+v2) - q(v1-v2)) / 4.
  double cross(const GridFunction& v1, const GridFunction& v2) const;

private:
  const ProblemSpec& spec_;
  Grids grids_;
  SolverOpts opts_;
  State state_;
  Adjoint adjoint_;
  GridFunction weight_;   // (L_yy - f_yy * phi) along the base state
};

/// One-call wrapper around QuadFormEvaluator.
QuadFormSample hess_quadform(const ProblemSpec& spec, const Grids& grids,
                             const GridFunction& u, const MeasurePair& mu,
                             const GridFunction& v, const SolverOpts& opts = {});

/// Empirical continuity of the quadratic form in the control: perturbs u_bar
/// to prescribed state distances rho, then reports for each rho the sup over
/// directions of |q_at_perturbed - q_at_u_bar| / ||v||_2^2. The sup should
/// shrink with rho; monotone_within_slack allows 10 percent backsliding.
struct HessianContinuityReport {
  std::vector<double> rho;
  std::vector<double> sup_diff;
  bool monotone_within_slack = false;
};

HessianContinuityReport hessian_continuity_probe(const ProblemSpec& spec, const Grids& grids,
                                                 const GridFunction& u_bar,
                                                 const MeasurePair& mu, int perturbations,
                                                 int directions, std::uint64_t seed,
                                                 const SolverOpts& opts = {});

}  // namespace parcon
