#include "parcon/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace parcon {

StepOperator::StepOperator(const ProblemSpec& spec, const Grids& grids, double t)
    : dim_(spec.dim), dt_(grids.time.dt()), a_(spec.diffusion) {
  nx_ = grids.space.interior(0);
  ny_ = dim_ == 2 ? grids.space.interior(1) : 1;
  hx_ = grids.space.spacing(0);
  hy_ = dim_ == 2 ? grids.space.spacing(1) : 1.0;
  n_ = grids.space.interior_count();

  has_convection_ = spec.has_convection();
  if (has_convection_) {
    bx_.resize(n_);
    if (dim_ == 2) by_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      const Point p = grids.space.point(i);
      bx_[i] = spec.convection_at(0, p, t);
      if (dim_ == 2) by_[i] = spec.convection_at(1, p, t);
    }
  }
}

double StepOperator::max_convection() const {
  double m = 0.0;
  for (double v : bx_) m = std::max(m, std::abs(v));
  for (double v : by_) m = std::max(m, std::abs(v));
  return m;
}

void StepOperator::check_potential(std::span<const double> potential) const {
  if (!potential.empty() && static_cast<int>(potential.size()) != n_)
    throw DimensionMismatch("StepOperator: potential size does not match grid");
}

void StepOperator::apply(std::span<const double> in, std::span<double> out,
                         bool transpose, std::span<const double> potential) const {
  if (static_cast<int>(in.size()) != n_ || static_cast<int>(out.size()) != n_)
    throw DimensionMismatch("StepOperator::apply: vector size mismatch");
  check_potential(potential);

  const double ix2 = 1.0 / (hx_ * hx_);
  const double iy2 = dim_ == 2 ? 1.0 / (hy_ * hy_) : 0.0;
  const double cxc = dim_ == 2 ? -a_.a12 / (2.0 * hx_ * hy_) : 0.0;

  if (dim_ == 1) {
    for (int i = 0; i < nx_; ++i) {
      const double w = i > 0 ? in[i - 1] : 0.0;
      const double e = i + 1 < nx_ ? in[i + 1] : 0.0;
      double acc = a_.a11 * (2.0 * in[i] - w - e) * ix2;
      if (has_convection_) {
        if (!transpose) {
          acc += bx_[i] * (e - w) / (2.0 * hx_);
        } else {
          const double be = i + 1 < nx_ ? bx_[i + 1] * in[i + 1] : 0.0;
          const double bw = i > 0 ? bx_[i - 1] * in[i - 1] : 0.0;
          acc += (bw - be) / (2.0 * hx_);
        }
      }
      if (!potential.empty()) acc += potential[i] * in[i];
      out[i] = in[i] + dt_ * acc;
    }
    return;
  }

  for (int jy = 0; jy < ny_; ++jy) {
    for (int jx = 0; jx < nx_; ++jx) {
      const int i = jy * nx_ + jx;
      const double w = jx > 0 ? in[i - 1] : 0.0;
      const double e = jx + 1 < nx_ ? in[i + 1] : 0.0;
      const double s = jy > 0 ? in[i - nx_] : 0.0;
      const double nn = jy + 1 < ny_ ? in[i + nx_] : 0.0;
      double acc = a_.a11 * (2.0 * in[i] - w - e) * ix2 +
                   a_.a22 * (2.0 * in[i] - s - nn) * iy2;
      if (a_.a12 != 0.0) {
        const double ne = (jx + 1 < nx_ && jy + 1 < ny_) ? in[i + nx_ + 1] : 0.0;
        const double nw = (jx > 0 && jy + 1 < ny_) ? in[i + nx_ - 1] : 0.0;
        const double se = (jx + 1 < nx_ && jy > 0) ? in[i - nx_ + 1] : 0.0;
        const double sw = (jx > 0 && jy > 0) ? in[i - nx_ - 1] : 0.0;
        acc += cxc * (ne - se - nw + sw);
      }
      if (has_convection_) {
        if (!transpose) {
          acc += bx_[i] * (e - w) / (2.0 * hx_) + by_[i] * (nn - s) / (2.0 * hy_);
        } else {
          const double bxe = jx + 1 < nx_ ? bx_[i + 1] * in[i + 1] : 0.0;
          const double bxw = jx > 0 ? bx_[i - 1] * in[i - 1] : 0.0;
          const double byn = jy + 1 < ny_ ? by_[i + nx_] * in[i + nx_] : 0.0;
          const double bys = jy > 0 ? by_[i - nx_] * in[i - nx_] : 0.0;
          acc += (bxw - bxe) / (2.0 * hx_) + (bys - byn) / (2.0 * hy_);
        }
      }
      if (!potential.empty()) acc += potential[i] * in[i];
      out[i] = in[i] + dt_ * acc;
    }
  }
}

void StepOperator::assemble_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                                        std::vector<double>& upper, bool transpose,
                                        std::span<const double> potential) const {
  if (dim_ != 1)
    throw DimensionMismatch("assemble_tridiagonal: only available in dimension 1");
  check_potential(potential);
  lower.assign(n_, 0.0);
  diag.assign(n_, 0.0);
  upper.assign(n_, 0.0);
  const double ix2 = 1.0 / (hx_ * hx_);
  for (int i = 0; i < n_; ++i) {
    diag[i] = 1.0 + dt_ * (2.0 * a_.a11 * ix2 + (potential.empty() ? 0.0 : potential[i]));
    double up = -a_.a11 * ix2;
    double lo = -a_.a11 * ix2;
    if (has_convection_) {
      if (!transpose) {
        up += bx_[i] / (2.0 * hx_);
        lo -= bx_[i] / (2.0 * hx_);
      } else {
        // Transposed rows couple through the neighbors' convection samples.
        if (i + 1 < n_) up -= bx_[i + 1] / (2.0 * hx_);
        if (i > 0) lo += bx_[i - 1] / (2.0 * hx_);
      }
    }
    if (i + 1 < n_) upper[i] = dt_ * up;
    if (i > 0) lower[i] = dt_ * lo;
  }
}

void StepOperator::solve(std::span<const double> rhs, std::span<double> x, bool transpose,
                         double tol, int max_iterations,
                         std::span<const double> potential) const {
  if (dim_ == 1) {
    static thread_local std::vector<double> lo, di, up;
    assemble_tridiagonal(lo, di, up, transpose, potential);
    thomas_solve(lo, di, up, rhs, x);
    return;
  }
  ApplyFn op = [this, transpose, potential](std::span<const double> in, std::span<double> out) {
    apply(in, out, transpose, potential);
  };
  KrylovResult r = symmetric() ? conjugate_gradient(op, rhs, x, tol, max_iterations)
                               : bicgstab(op, rhs, x, tol, max_iterations);
  if (!r.converged)
    throw LinearSolveFailure("step solve did not reach tolerance: relative residual " +
                             std::to_string(r.rel_residual));
}

}  // namespace parcon
