#include "parcon/linalg.hpp"

#include <algorithm>

namespace parcon {

void thomas_solve(std::span<const double> lower, std::span<const double> diag,
                  std::span<const double> upper, std::span<const double> rhs,
                  std::span<double> x) {
  const std::size_t n = diag.size();
  if (n == 0 || lower.size() != n || upper.size() != n || rhs.size() != n || x.size() != n)
    throw DimensionMismatch("thomas_solve: band sizes disagree");

  static thread_local std::vector<double> cp, dp;
  cp.assign(n, 0.0);
  dp.assign(n, 0.0);

  double piv = diag[0];
  if (piv == 0.0) throw LinearSolveFailure("thomas_solve: zero pivot at row 0");
  cp[0] = upper[0] / piv;
  dp[0] = rhs[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = diag[i] - lower[i] * cp[i - 1];
    if (piv == 0.0) throw LinearSolveFailure("thomas_solve: zero pivot");
    cp[i] = upper[i] / piv;
    dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / piv;
  }
  x[n - 1] = dp[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
}

KrylovResult conjugate_gradient(const ApplyFn& apply, std::span<const double> rhs,
                                std::span<double> x, double tol, int max_iterations) {
  const std::size_t n = rhs.size();
  std::vector<double> r(n), p(n), ap(n);

  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
  std::copy(r.begin(), r.end(), p.begin());

  const double bnorm = std::max(norm2(rhs), 1e-300);
  double rs = dot(r, r);
  KrylovResult res;
  res.rel_residual = std::sqrt(rs) / bnorm;
  if (res.rel_residual <= tol) {
    res.converged = true;
    return res;
  }

  for (int it = 0; it < max_iterations; ++it) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (pap <= 0.0)
      throw LinearSolveFailure("conjugate_gradient: operator is not positive definite");
    const double alpha = rs / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rs_new = dot(r, r);
    res.iterations = it + 1;
    res.rel_residual = std::sqrt(rs_new) / bnorm;
    if (res.rel_residual <= tol) {
      res.converged = true;
      return res;
    }
    const double beta = rs_new / rs;
    rs = rs_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  return res;
}

KrylovResult bicgstab(const ApplyFn& apply, std::span<const double> rhs,
                      std::span<double> x, double tol, int max_iterations) {
  const std::size_t n = rhs.size();
  std::vector<double> r(n), r0(n), p(n), v(n), s(n), t(n);

  apply(x, v);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - v[i];
  std::copy(r.begin(), r.end(), r0.begin());
  std::copy(r.begin(), r.end(), p.begin());

  const double bnorm = std::max(norm2(rhs), 1e-300);
  KrylovResult res;
  res.rel_residual = norm2(r) / bnorm;
  if (res.rel_residual <= tol) {
    res.converged = true;
    return res;
  }

  double rho = dot(r0, r);
  for (int it = 0; it < max_iterations; ++it) {
    apply(p, v);
    const double r0v = dot(r0, v);
    if (r0v == 0.0) throw LinearSolveFailure("bicgstab: breakdown (r0, v)");
    const double alpha = rho / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm2(s) / bnorm <= tol) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
      res.iterations = it + 1;
      res.rel_residual = norm2(s) / bnorm;
      res.converged = true;
      return res;
    }
    apply(s, t);
    const double tt = dot(t, t);
    if (tt == 0.0) throw LinearSolveFailure("bicgstab: breakdown (t, t)");
    const double omega = dot(t, s) / tt;
    if (omega == 0.0) throw LinearSolveFailure("bicgstab: stagnation (omega = 0)");
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i] + omega * s[i];
      r[i] = s[i] - omega * t[i];
    }
    res.iterations = it + 1;
    res.rel_residual = norm2(r) / bnorm;
    if (res.rel_residual <= tol) {
      res.converged = true;
      return res;
    }
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0) throw LinearSolveFailure("bicgstab: breakdown (r0, r)");
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
  }
  return res;
}

}  // namespace parcon
