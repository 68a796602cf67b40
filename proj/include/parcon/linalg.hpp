#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "parcon/errors.hpp"

namespace parcon {

/// Tridiagonal solve (Thomas). lower[0] and upper[n-1] are ignored.
/// Overwrites x with the solution of T x = rhs.
void thomas_solve(std::span<const double> lower, std::span<const double> diag,
                  std::span<const double> upper, std::span<const double> rhs,
                  std::span<double> x);

struct KrylovResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

using ApplyFn = std::function<void(std::span<const double>, std::span<double>)>;

/// Conjugate gradients for symmetric positive definite systems. x carries the
/// initial guess on entry. Stops at relative residual <= tol.
KrylovResult conjugate_gradient(const ApplyFn& apply, std::span<const double> rhs,
                                std::span<double> x, double tol, int max_iterations);

/// BiCGStab for the nonsymmetric step systems (convection present).
KrylovResult bicgstab(const ApplyFn& apply, std::span<const double> rhs,
                      std::span<double> x, double tol, int max_iterations);

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace parcon
