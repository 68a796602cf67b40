#include "parcon/pde_forward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "parcon/operators.hpp"

namespace parcon {

namespace {

double linf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// The step matrix stays uniformly positive definite as long as
// 1 + dt*min(0, monotone_floor) keeps a margin; reject dt otherwise.
void step_size_guard(const ProblemSpec& spec, const Grids& grids) {
  const double floor = 1.0 + grids.time.dt() * std::min(0.0, spec.reaction.monotone_floor);
  if (floor <= 1e-2) {
    std::ostringstream ss;
    ss << "time step " << grids.time.dt() << " is too large for monotone floor "
       << spec.reaction.monotone_floor << "; the implicit step matrix may lose definiteness"
       << " (need dt < " << 0.99 / -std::min(-1e-300, spec.reaction.monotone_floor) << ")";
    throw LinearSolveFailure(ss.str());
  }
}

void peclet_warning(const ProblemSpec& spec, const Grids& grids, const StepOperator& op) {
  const double lam = spec.diffusion.lambda_min(spec.dim);
  const double h = std::max(grids.space.spacing(0),
                            spec.dim == 2 ? grids.space.spacing(1) : 0.0);
  const double pe = op.max_convection() * h / (2.0 * lam);
  if (pe > 1.0)
    std::fprintf(stderr,
                 "warning: cell Peclet number %.3g exceeds 1; centered convection may "
                 "oscillate on this grid\n",
                 pe);
}

}  // namespace

SpatialField eval_initial_state(const ProblemSpec& spec, const Grids& grids) {
  if (!spec.initial_state)
    throw DimensionMismatch("initial state callback is missing");
  const int ni = grids.space.interior_count();
  SpatialField f;
  f.v.resize(ni);
  for (int i = 0; i < ni; ++i) f.v[i] = spec.initial_state(grids.space.point(i));
  return f;
}

State solve_state(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
                  const SolverOpts& opts) {
  if (!u.matches(grids))
    throw DimensionMismatch("solve_state: control shape does not match grids");
  for (double v : u.data())
    if (!std::isfinite(v)) throw std::invalid_argument("solve_state: control has non-finite values");
  step_size_guard(spec, grids);

  const int ni = grids.space.interior_count();
  const int nt = grids.time.steps;
  const double dt = grids.time.dt();

  State st;
  st.y = GridFunction(grids);
  st.newton_iterations.assign(nt, 0);

  std::vector<Point> pts(ni);
  for (int i = 0; i < ni; ++i) pts[i] = grids.space.point(i);

  {
    const SpatialField y0 = eval_initial_state(spec, grids);
    auto lv = st.y.level(0);
    std::copy(y0.v.begin(), y0.v.end(), lv.begin());
  }

  std::vector<double> Y(ni), g(ni), tmp(ni), fy(ni), d(ni), Ytr(ni), gtr(ni);
  bool warned = false;

  // Largest dt-scaled stencil row magnitude. Assembling the step residual
  // cancels terms of this size, so linf(g)/dt cannot drop below roughly
  // eps * row_scale * ||Y||; on stiff grids (dt >> h^2) that floor sits above
  // any fixed tolerance and the Newton target must give way to it.
  const double hx = grids.space.spacing(0);
  double row_scale = 1.0 / dt + 2.0 * std::abs(spec.diffusion.a11) / (hx * hx);
  if (spec.dim == 2) {
    const double hy = grids.space.spacing(1);
    row_scale += 2.0 * std::abs(spec.diffusion.a22) / (hy * hy) +
                 2.0 * std::abs(spec.diffusion.a12) / (hx * hy);
  }
  const double eps8 = 8.0 * std::numeric_limits<double>::epsilon();
  auto newton_target = [&](std::span<const double> Yv) {
    return std::max(opts.newton_tol, eps8 * row_scale * (1.0 + linf(Yv)));
  };

  for (int k = 1; k <= nt; ++k) {
    const double t = grids.time.time(k);
    const StepOperator op(spec, grids, t);
    if (opts.warn_peclet && !warned) {
      peclet_warning(spec, grids, op);
      warned = true;
    }

    auto prev = st.y.level(k - 1);
    auto uk = u.level(k);
    std::copy(prev.begin(), prev.end(), Y.begin());

    // Residual of the dt-scaled step equation, assembled into g (unscaled).
    auto residual = [&](std::span<const double> Yv, std::span<double> gv) {
      op.apply(Yv, tmp);
      for (int i = 0; i < ni; ++i)
        gv[i] = tmp[i] - prev[i] + dt * (spec.reaction.value(pts[i], t, Yv[i]) - uk[i]);
      return linf(gv) / dt;
    };

    double res = residual(Y, g);
    int iter = 0;
    while (res > newton_target(Y)) {
      if (iter >= opts.max_newton)
        throw NewtonDiverged(k, res,
                             "Newton failed to converge at time step " + std::to_string(k) +
                                 " (residual " + std::to_string(res) + ")");
      for (int i = 0; i < ni; ++i) fy[i] = spec.reaction.dy(pts[i], t, Y[i]);
      for (int i = 0; i < ni; ++i) tmp[i] = -g[i];
      std::fill(d.begin(), d.end(), 0.0);
      op.solve(tmp, d, false, opts.linear_tol, opts.max_linear_iterations, fy);

      const double g0 = linf(g);
      double alpha = 1.0;
      bool accepted = false;
      for (int h = 0; h <= opts.max_halvings; ++h) {
        for (int i = 0; i < ni; ++i) Ytr[i] = Y[i] + alpha * d[i];
        const double rtr = residual(Ytr, gtr);
        if (linf(gtr) < g0) {
          std::swap(Y, Ytr);
          std::swap(g, gtr);
          res = rtr;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted)
        throw NewtonDiverged(k, res,
                             "Newton damping exhausted at time step " + std::to_string(k) +
                                 " (residual " + std::to_string(res) + ")");
      ++iter;
    }

    st.newton_iterations[k - 1] = iter;
    st.max_residual = std::max(st.max_residual, res);
    auto lv = st.y.level(k);
    std::copy(Y.begin(), Y.end(), lv.begin());
  }
  return st;
}

}  // namespace parcon
