#include "parcon/pde_sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parcon/operators.hpp"
#include "parcon/rng.hpp"

namespace parcon {

namespace {

void check_base(const Grids& grids, const State& base, const char* op) {
  if (!base.y.matches(grids))
    throw DimensionMismatch(std::string(op) + ": base state does not match grids");
}

}  // namespace

LinearizedState solve_linearized(const ProblemSpec& spec, const Grids& grids,
                                 const State& base, const GridFunction& v,
                                 const SolverOpts& opts) {
  check_base(grids, base, "solve_linearized");
  if (!v.matches(grids))
    throw DimensionMismatch("solve_linearized: direction does not match grids");

  const int ni = grids.space.interior_count();
  const int nt = grids.time.steps;
  const double dt = grids.time.dt();

  std::vector<Point> pts(ni);
  for (int i = 0; i < ni; ++i) pts[i] = grids.space.point(i);

  LinearizedState ls;
  ls.z = GridFunction(grids);
  std::vector<double> rhs(ni), fy(ni), zk(ni, 0.0);

  for (int k = 1; k <= nt; ++k) {
    const double t = grids.time.time(k);
    const StepOperator op(spec, grids, t);
    auto yk = base.y.level(k);
    auto vk = v.level(k);
    auto prev = ls.z.level(k - 1);
    for (int i = 0; i < ni; ++i) fy[i] = spec.reaction.dy(pts[i], t, yk[i]);
    for (int i = 0; i < ni; ++i) rhs[i] = prev[i] + dt * vk[i];
    // Warm start from the previous level.
    std::copy(prev.begin(), prev.end(), zk.begin());
    op.solve(rhs, zk, false, opts.linear_tol, opts.max_linear_iterations, fy);
    auto lv = ls.z.level(k);
    std::copy(zk.begin(), zk.end(), lv.begin());
  }
  return ls;
}

SecondOrderState solve_second(const ProblemSpec& spec, const Grids& grids,
                              const State& base, const LinearizedState& z1,
                              const LinearizedState& z2, const SolverOpts& opts) {
  check_base(grids, base, "solve_second");
  if (!z1.z.matches(grids) || !z2.z.matches(grids))
    throw DimensionMismatch("solve_second: linearized states do not match grids");

  const int ni = grids.space.interior_count();
  const int nt = grids.time.steps;
  const double dt = grids.time.dt();

  std::vector<Point> pts(ni);
  for (int i = 0; i < ni; ++i) pts[i] = grids.space.point(i);

  SecondOrderState ss;
  ss.w = GridFunction(grids);
  std::vector<double> rhs(ni), fy(ni), wk(ni, 0.0);

  for (int k = 1; k <= nt; ++k) {
    const double t = grids.time.time(k);
    const StepOperator op(spec, grids, t);
    auto yk = base.y.level(k);
    auto a = z1.z.level(k);
    auto b = z2.z.level(k);
    auto prev = ss.w.level(k - 1);
    for (int i = 0; i < ni; ++i) fy[i] = spec.reaction.dy(pts[i], t, yk[i]);
    for (int i = 0; i < ni; ++i)
      rhs[i] = prev[i] - dt * spec.reaction.dyy(pts[i], t, yk[i]) * a[i] * b[i];
    std::copy(prev.begin(), prev.end(), wk.begin());
    op.solve(rhs, wk, false, opts.linear_tol, opts.max_linear_iterations, fy);
    auto lv = ss.w.level(k);
    std::copy(wk.begin(), wk.end(), lv.begin());
  }
  return ss;
}

LinearizedBoundsReport check_linearized_bounds(const ProblemSpec& spec, const Grids& grids,
                                               const State& base, int trials,
                                               std::uint64_t seed, const SolverOpts& opts) {
  check_base(grids, base, "check_linearized_bounds");
  Rng rng(seed);
  LinearizedBoundsReport rep;
  rep.trials = trials;
  rep.min_ratio_l10 = rep.min_ratio_linf = std::numeric_limits<double>::infinity();

  for (int trial = 0; trial < trials; ++trial) {
    GridFunction v(grids);
    for (double& x : v.data()) x = rng.normal();
    const double n2 = lp_norm(grids, v, 2.0);
    const double np = lp_norm(grids, v, spec.exponent_p);
    if (n2 == 0.0 || np == 0.0) continue;
    const LinearizedState ls = solve_linearized(spec, grids, base, v, opts);
    const double r10 = lp_norm(grids, ls.z, 10.0) / n2;
    const double rinf = max_abs(ls.z) / np;
    rep.min_ratio_l10 = std::min(rep.min_ratio_l10, r10);
    rep.max_ratio_l10 = std::max(rep.max_ratio_l10, r10);
    rep.min_ratio_linf = std::min(rep.min_ratio_linf, rinf);
    rep.max_ratio_linf = std::max(rep.max_ratio_linf, rinf);
  }

  const double spread_10 = rep.min_ratio_l10 > 0.0 ? rep.max_ratio_l10 / rep.min_ratio_l10
                                                   : std::numeric_limits<double>::infinity();
  rep.stable = std::isfinite(rep.max_ratio_l10) && std::isfinite(rep.max_ratio_linf) &&
               spread_10 < 1e3;
  return rep;
}

}  // namespace parcon
