#include "parcon/pde_adjoint.hpp"

#include <algorithm>
#include <cmath>

#include "parcon/operators.hpp"
#include "parcon/rng.hpp"

namespace parcon {

MeasurePair MeasurePair::zero(const Grids& grids, Sign sign) {
  MeasurePair m;
  m.sign_mode = sign;
  m.interior = grids.space.interior_count();
  m.steps = grids.time.steps;
  m.mass_q.assign(static_cast<std::size_t>(m.interior) * m.steps, 0.0);
  m.mass_terminal.assign(m.interior, 0.0);
  return m;
}

bool MeasurePair::matches(const Grids& grids) const {
  return interior == grids.space.interior_count() && steps == grids.time.steps &&
         mass_q.size() == static_cast<std::size_t>(interior) * steps &&
         mass_terminal.size() == static_cast<std::size_t>(interior);
}

double MeasurePair::total_variation() const {
  double tv = 0.0;
  for (double m : mass_q) tv += std::abs(m);
  for (double m : mass_terminal) tv += std::abs(m);
  return tv;
}

double MeasurePair::min_mass() const {
  double mn = 0.0;
  for (double m : mass_q) mn = std::min(mn, m);
  for (double m : mass_terminal) mn = std::min(mn, m);
  return mn;
}

double MeasurePair::pair(const GridFunction& field) const {
  if (field.interior_count() != interior || field.steps() != steps)
    throw DimensionMismatch("MeasurePair::pair: field shape does not match measure");
  double acc = 0.0;
  for (int k = 1; k <= steps; ++k) {
    auto lv = field.level(k);
    for (int i = 0; i < interior; ++i) acc += lv[i] * q(i, k);
  }
  auto last = field.level(steps);
  for (int i = 0; i < interior; ++i) acc += last[i] * mass_terminal[i];
  return acc;
}

Adjoint solve_adjoint(const ProblemSpec& spec, const Grids& grids, const State& base,
                      const MeasurePair& mu, const AdjointOpts& opts) {
  if (!base.y.matches(grids))
    throw DimensionMismatch("solve_adjoint: base state does not match grids");
  if (!mu.matches(grids))
    throw DimensionMismatch("solve_adjoint: measure shape does not match grids");
  if (mu.sign_mode == MeasurePair::Sign::Nonnegative && mu.min_mass() < 0.0)
    throw SignViolation("solve_adjoint: nonnegative measure carries a negative mass");

  const int ni = grids.space.interior_count();
  const int nt = grids.time.steps;
  const double dt = grids.time.dt();
  const double vol = grids.space.cell_volume();

  std::vector<Point> pts(ni);
  for (int i = 0; i < ni; ++i) pts[i] = grids.space.point(i);

  Adjoint adj;
  adj.phi = GridFunction(grids);
  adj.source = mu;
  adj.includes_cost_gradient = opts.include_cost_gradient;

  std::vector<double> rhs(ni), fy(ni), pk(ni, 0.0);

  for (int m = nt; m >= 1; --m) {
    const double t = grids.time.time(m);
    const StepOperator op(spec, grids, t);
    auto ym = base.y.level(m);
    for (int i = 0; i < ni; ++i) fy[i] = spec.reaction.dy(pts[i], t, ym[i]);
    for (int i = 0; i < ni; ++i) {
      double r = m == nt ? mu.mass_terminal[i] / vol : adj.phi(i, m + 1);
      if (opts.include_cost_gradient) r += dt * spec.cost.dy(pts[i], t, ym[i]);
      r += mu.q(i, m) / vol;
      rhs[i] = r;
    }
    // Warm start from the level just computed (or the terminal seed scale).
    op.solve(rhs, pk, true, opts.pde.linear_tol, opts.pde.max_linear_iterations, fy);
    auto lv = adj.phi.level(m);
    std::copy(pk.begin(), pk.end(), lv.begin());
  }
  // Level 0 carries no pairing weight and stays zero.
  return adj;
}

double transposition_residual(const ProblemSpec& spec, const Grids& grids, const State& base,
                              const Adjoint& adj, int trials, std::uint64_t seed,
                              const SolverOpts& opts) {
  if (!adj.phi.matches(grids))
    throw DimensionMismatch("transposition_residual: adjoint does not match grids");
  const int ni = grids.space.interior_count();
  std::vector<Point> pts(ni);
  for (int i = 0; i < ni; ++i) pts[i] = grids.space.point(i);

  // Running-cost derivative field along the base state.
  GridFunction ly(grids);
  if (adj.includes_cost_gradient) {
    for (int k = 1; k <= grids.time.steps; ++k) {
      const double t = grids.time.time(k);
      auto yk = base.y.level(k);
      auto lv = ly.level(k);
      for (int i = 0; i < ni; ++i) lv[i] = spec.cost.dy(pts[i], t, yk[i]);
    }
  }

  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    GridFunction v(grids);
    for (double& x : v.data()) x = rng.normal();
    const LinearizedState ls = solve_linearized(spec, grids, base, v, opts);
    const double lhs = inner_product_q(grids, adj.phi, v);
    double rhs = adj.source.pair(ls.z);
    if (adj.includes_cost_gradient) rhs += inner_product_q(grids, ly, ls.z);
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

namespace {

// Value of a level with implicit zero boundary at an arbitrary point.
double interp_space(const SpatialGrid& g, std::span<const double> lv, const Point& p) {
  if (g.dim == 1) {
    const double s = p.x / g.spacing(0) - 1.0;
    const int i0 = static_cast<int>(std::floor(s));
    const double f = s - i0;
    auto at = [&](int i) {
      return (i >= 0 && i < g.interior(0)) ? lv[i] : 0.0;
    };
    return (1.0 - f) * at(i0) + f * at(i0 + 1);
  }
  const int nx = g.interior(0);
  const int ny = g.interior(1);
  const double sx = p.x / g.spacing(0) - 1.0;
  const double sy = p.y / g.spacing(1) - 1.0;
  const int ix = static_cast<int>(std::floor(sx));
  const int iy = static_cast<int>(std::floor(sy));
  const double fx = sx - ix;
  const double fy = sy - iy;
  auto at = [&](int jx, int jy) {
    return (jx >= 0 && jx < nx && jy >= 0 && jy < ny) ? lv[jy * nx + jx] : 0.0;
  };
  return (1.0 - fx) * (1.0 - fy) * at(ix, iy) + fx * (1.0 - fy) * at(ix + 1, iy) +
         (1.0 - fx) * fy * at(ix, iy + 1) + fx * fy * at(ix + 1, iy + 1);
}

}  // namespace

MeasureStabilityReport check_measure_stability(const ProblemSpec& spec, const Grids& grids,
                                               const State& base, const MeasurePair& mu,
                                               const SolverOpts& opts) {
  MeasureStabilityReport rep;
  const double tv = mu.total_variation();
  if (tv == 0.0) {
    rep.vacuous = true;
    return rep;
  }

  AdjointOpts aopts;
  aopts.include_cost_gradient = false;
  aopts.pde = opts;

  const Adjoint coarse = solve_adjoint(spec, grids, base, mu, aopts);
  rep.coarse_ratio = lp_norm(grids, coarse.phi, 1.25) / tv;

  // Nested refinement: spacing and step both halve; coarse nodes coincide
  // with every other fine node, coarse levels with every other fine level.
  Grids fine = grids;
  fine.space.nodes[0] = 2 * (grids.space.nodes[0] - 1) + 1;
  if (grids.space.dim == 2) fine.space.nodes[1] = 2 * (grids.space.nodes[1] - 1) + 1;
  fine.time.steps = 2 * grids.time.steps;

  State fine_base;
  fine_base.y = GridFunction(fine);
  const int nif = fine.space.interior_count();
  for (int kf = 0; kf <= fine.time.steps; ++kf) {
    const int kc = kf / 2;
    const bool odd = kf % 2 != 0;
    auto lv = fine_base.y.level(kf);
    for (int i = 0; i < nif; ++i) {
      const Point p = fine.space.point(i);
      if (!odd) {
        lv[i] = interp_space(grids.space, base.y.level(kc), p);
      } else {
        lv[i] = 0.5 * (interp_space(grids.space, base.y.level(kc), p) +
                       interp_space(grids.space, base.y.level(kc + 1), p));
      }
    }
  }

  MeasurePair fine_mu = MeasurePair::zero(fine, mu.sign_mode);
  const int nx = grids.space.interior(0);
  const int nxf = fine.space.interior(0);
  auto fine_node = [&](int i) {
    if (grids.space.dim == 1) return 2 * i + 1;
    const int ix = i % nx;
    const int iy = i / nx;
    return (2 * iy + 1) * nxf + (2 * ix + 1);
  };
  for (int k = 1; k <= grids.time.steps; ++k)
    for (int i = 0; i < grids.space.interior_count(); ++i)
      fine_mu.q(fine_node(i), 2 * k) = mu.q(i, k);
  for (int i = 0; i < grids.space.interior_count(); ++i)
    fine_mu.mass_terminal[fine_node(i)] = mu.mass_terminal[i];

  const Adjoint fine_adj = solve_adjoint(spec, fine, fine_base, fine_mu, aopts);
  rep.fine_ratio = lp_norm(fine, fine_adj.phi, 1.25) / tv;

  rep.drift = std::abs(rep.fine_ratio - rep.coarse_ratio) / std::max(rep.coarse_ratio, 1e-300);
  rep.stable = rep.drift < 0.5;
  return rep;
}

}  // namespace parcon
