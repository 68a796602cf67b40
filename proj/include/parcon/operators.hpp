#pragma once

#include <span>
#include <vector>

#include "parcon/linalg.hpp"
#include "parcon/problem.hpp"

namespace parcon {

/// Implicit-Euler step matrix M = I + dt*(A_h + diag(c)) frozen at one time
/// level: A_h is the centered finite-difference elliptic operator (3-point in
/// one dimension, 5-point plus the 4-corner cross term when a12 != 0) with
/// implicit zero Dirichlet values; c is a nodal potential passed per call
/// (typically the reaction derivative at the current state). Convection is
/// sampled at interior nodes on construction, so apply() is callback-free.
///
/// The transpose apply/solve is the literal matrix transpose; pairing the
/// forward and transposed solves is what makes the discrete adjoint exact.
class StepOperator {
public:
  StepOperator(const ProblemSpec& spec, const Grids& grids, double t);

  /// out = M in, with diag potential c (empty span means c = 0).
  void apply(std::span<const double> in, std::span<double> out, bool transpose = false,
             std::span<const double> potential = {}) const;

  /// Direct (dim 1) or Krylov (dim 2) solve of M x = rhs, transposed on
  /// request. x carries the initial guess for the Krylov path.
  void solve(std::span<const double> rhs, std::span<double> x, bool transpose,
             double tol, int max_iterations, std::span<const double> potential = {}) const;

  /// True when convection is absent; the step matrix is then symmetric and
  /// conjugate gradients apply.
  bool symmetric() const { return !has_convection_; }

  void assemble_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                            std::vector<double>& upper, bool transpose,
                            std::span<const double> potential = {}) const;

  int size() const { return n_; }
  double dt() const { return dt_; }
  double max_convection() const;

private:
  void check_potential(std::span<const double> potential) const;

  int dim_;
  int nx_ = 0, ny_ = 0;
  double hx_ = 0.0, hy_ = 0.0;
  double dt_;
  DiffusionMatrix a_;
  bool has_convection_ = false;
  std::vector<double> bx_, by_;   // sampled convection, interior nodes
  int n_ = 0;
};

}  // namespace parcon
