#include "parcon/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "parcon/rng.hpp"

namespace parcon {

namespace {

double cost_integral(const ProblemSpec& spec, const Grids& grids, const State& st) {
  const int ni = grids.space.interior_count();
  const double w = grids.space.cell_volume() * grids.time.dt();
  double acc = 0.0;
  for (int k = 1; k <= grids.time.steps; ++k) {
    const double t = grids.time.time(k);
    auto yk = st.y.level(k);
    for (int i = 0; i < ni; ++i)
      acc += spec.cost.value(grids.space.point(i), t, yk[i]);
  }
  return acc * w;
}

double control_energy(const ProblemSpec& spec, const Grids& grids, const GridFunction& u) {
  const double n2 = lp_norm(grids, u, 2.0);
  return 0.5 * spec.tikhonov * n2 * n2;
}

double constraint_offset(const ProblemSpec& spec, const GridFunction& y,
                         const MeasurePair& mu) {
  const auto& sb = spec.state_bound;
  const bool bilateral = sb.mode == StateConstraint::Mode::Bilateral;
  const double up = bilateral ? sb.gamma_max : sb.gamma;
  const double lo = sb.gamma_min;
  double acc = 0.0;
  for (int k = 1; k <= mu.steps; ++k) {
    auto yk = y.level(k);
    for (int i = 0; i < mu.interior; ++i) {
      const double m = mu.q(i, k);
      if (m == 0.0) continue;
      acc += m * (yk[i] - ((bilateral && m < 0.0) ? lo : up));
    }
  }
  auto yT = y.level(mu.steps);
  for (int i = 0; i < mu.interior; ++i) {
    const double m = mu.mass_terminal[i];
    if (m == 0.0) continue;
    acc += m * (yT[i] - ((bilateral && m < 0.0) ? lo : up));
  }
  return acc;
}

}  // namespace

double eval_j(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
              const SolverOpts& opts, State* out_state) {
  State st = solve_state(spec, grids, u, opts);
  const double j = eval_j_with(spec, grids, u, st);
  if (out_state) *out_state = std::move(st);
  return j;
}

double eval_j_with(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
                   const State& st) {
  return cost_integral(spec, grids, st) + control_energy(spec, grids, u);
}

GridFunction grad_j(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
                    const SolverOpts& opts, State* out_state, Adjoint* out_adjoint) {
  return grad_lagrangian(spec, grids, u, MeasurePair::zero(grids), opts, out_state,
                         out_adjoint);
}

double lagrangian(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
                  const MeasurePair& mu, const SolverOpts& opts, State* out_state) {
  if (!mu.matches(grids))
    throw DimensionMismatch("lagrangian: measure shape does not match grids");
  State st = solve_state(spec, grids, u, opts);
  const double value = cost_integral(spec, grids, st) + control_energy(spec, grids, u) +
                       constraint_offset(spec, st.y, mu);
  if (out_state) *out_state = std::move(st);
  return value;
}

GridFunction grad_lagrangian(const ProblemSpec& spec, const Grids& grids,
                             const GridFunction& u, const MeasurePair& mu,
                             const SolverOpts& opts, State* out_state,
                             Adjoint* out_adjoint) {
  State st = solve_state(spec, grids, u, opts);
  AdjointOpts aopts;
  aopts.pde = opts;
  Adjoint adj = solve_adjoint(spec, grids, st, mu, aopts);

  GridFunction g(grids);
  const auto& pv = adj.phi.data();
  const auto& uv = u.data();
  auto& gv = g.data();
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] = pv[i] + spec.tikhonov * uv[i];

  if (out_state) *out_state = std::move(st);
  if (out_adjoint) *out_adjoint = std::move(adj);
  return g;
}

QuadFormEvaluator::QuadFormEvaluator(const ProblemSpec& spec, const Grids& grids,
                                     const GridFunction& u, const MeasurePair& mu,
                                     const SolverOpts& opts)
    : spec_(spec), grids_(grids), opts_(opts),
      state_(solve_state(spec, grids, u, opts)) {
  AdjointOpts aopts;
  aopts.pde = opts;
  adjoint_ = solve_adjoint(spec, grids, state_, mu, aopts);

  weight_ = GridFunction(grids);
  const int ni = grids.space.interior_count();
  for (int k = 1; k <= grids.time.steps; ++k) {
    const double t = grids.time.time(k);
    auto yk = state_.y.level(k);
    auto ph = adjoint_.phi.level(k);
    auto wv = weight_.level(k);
    for (int i = 0; i < ni; ++i) {
      const Point p = grids.space.point(i);
      wv[i] = spec.cost.dyy(p, t, yk[i]) - spec.reaction.dyy(p, t, yk[i]) * ph[i];
    }
  }
}

QuadFormSample QuadFormEvaluator::eval(const GridFunction& v) const {
  const LinearizedState zv = solve_linearized(spec_, grids_, state_, v, opts_);
  return eval_with(v, zv);
}

QuadFormSample QuadFormEvaluator::eval_with(const GridFunction& v,
                                            const LinearizedState& zv) const {
  QuadFormSample s;
  s.norm_l2 = lp_norm(grids_, v, 2.0);
  s.norm_lp = lp_norm(grids_, v, spec_.exponent_p);
  const int ni = grids_.space.interior_count();
  const double w = grids_.space.cell_volume() * grids_.time.dt();
  double acc = 0.0;
  for (int k = 1; k <= grids_.time.steps; ++k) {
    auto wv = weight_.level(k);
    auto zk = zv.z.level(k);
    for (int i = 0; i < ni; ++i) acc += wv[i] * zk[i] * zk[i];
  }
  s.value = acc * w + spec_.tikhonov * s.norm_l2 * s.norm_l2;
  return s;
}

double QuadFormEvaluator::cross(const GridFunction& v1, const GridFunction& v2) const {
  GridFunction sum, diff;
  lin_comb(1.0, v1, 1.0, v2, sum);
  lin_comb(1.0, v1, -1.0, v2, diff);
  return (eval(sum).value - eval(diff).value) / 4.0;
}

QuadFormSample hess_quadform(const ProblemSpec& spec, const Grids& grids,
                             const GridFunction& u, const MeasurePair& mu,
                             const GridFunction& v, const SolverOpts& opts) {
  return QuadFormEvaluator(spec, grids, u, mu, opts).eval(v);
}

HessianContinuityReport hessian_continuity_probe(const ProblemSpec& spec, const Grids& grids,
                                                 const GridFunction& u_bar,
                                                 const MeasurePair& mu, int perturbations,
                                                 int directions, std::uint64_t seed,
                                                 const SolverOpts& opts) {
  HessianContinuityReport rep;
  rep.rho = {1e-1, 1e-2, 1e-3};
  rep.sup_diff.assign(rep.rho.size(), 0.0);

  const QuadFormEvaluator base(spec, grids, u_bar, mu, opts);
  Rng rng(seed);

  // Smooth seeded directions reused across all perturbations and radii.
  std::vector<GridFunction> dirs;
  std::vector<QuadFormSample> base_samples;
  for (int d = 0; d < directions; ++d) {
    GridFunction v(grids);
    for (double& x : v.data()) x = rng.normal();
    const double n2 = lp_norm(grids, v, 2.0);
    for (double& x : v.data()) x /= n2;
    base_samples.push_back(base.eval(v));
    dirs.push_back(std::move(v));
  }

  for (int pert = 0; pert < perturbations; ++pert) {
    GridFunction d(grids);
    for (double& x : d.data()) x = rng.normal();
    const double n2 = lp_norm(grids, d, 2.0);
    for (double& x : d.data()) x /= n2;

    for (std::size_t ir = 0; ir < rep.rho.size(); ++ir) {
      const double rho = rep.rho[ir];
      // Scale the perturbation until the state moves by rho in sup norm.
      double s = rho;
      GridFunction u = u_bar;
      double dist = 0.0;
      for (int it = 0; it < 8; ++it) {
        lin_comb(1.0, u_bar, s, d, u);
        State st = solve_state(spec, grids, u, opts);
        GridFunction diff;
        lin_comb(1.0, st.y, -1.0, base.state().y, diff);
        dist = max_abs(diff);
        if (std::abs(dist - rho) <= 0.05 * rho) break;
        if (dist <= 0.0) {
          s *= 10.0;
          continue;
        }
        s *= rho / dist;
      }
      const QuadFormEvaluator pe(spec, grids, u, mu, opts);
      for (std::size_t dv = 0; dv < dirs.size(); ++dv) {
        const QuadFormSample qs = pe.eval(dirs[dv]);
        const double rel =
            std::abs(qs.value - base_samples[dv].value) /
            (base_samples[dv].norm_l2 * base_samples[dv].norm_l2);
        rep.sup_diff[ir] = std::max(rep.sup_diff[ir], rel);
      }
    }
  }

  rep.monotone_within_slack = true;
  for (std::size_t ir = 1; ir < rep.rho.size(); ++ir)
    if (rep.sup_diff[ir] > 1.1 * rep.sup_diff[ir - 1]) rep.monotone_within_slack = false;
  return rep;
}

}  // namespace parcon
