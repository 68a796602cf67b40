#include "parcon/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace parcon {

namespace {

double pos(double a) { return a > 0.0 ? a : 0.0; }

// Distance above the ceiling minus distance below the floor; at most one of
// the two is nonzero since the band is nonempty.
double signed_excess(const StateConstraint& sb, double y) {
  if (sb.mode == StateConstraint::Mode::Bilateral)
    return pos(y - sb.gamma_max) - pos(sb.gamma_min - y);
  return pos(y - sb.gamma);
}

double clamp_box(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

}  // namespace

double state_violation(const ProblemSpec& spec, const GridFunction& y) {
  double worst = 0.0;
  for (int k = 1; k <= y.steps(); ++k)
    for (double v : y.level(k)) worst = std::max(worst, std::abs(signed_excess(spec.state_bound, v)));
  return worst;
}

double penalty_value(const ProblemSpec& spec, const Grids& grids, const GridFunction& y,
                     double lambda) {
  const double w = grids.space.cell_volume() * grids.time.dt();
  double acc_q = 0.0;
  for (int k = 1; k <= grids.time.steps; ++k)
    for (double v : y.level(k)) {
      const double e = signed_excess(spec.state_bound, v);
      acc_q += e * e;
    }
  double acc_t = 0.0;
  for (double v : y.level(grids.time.steps)) {
    const double e = signed_excess(spec.state_bound, v);
    acc_t += e * e;
  }
  return 0.5 * lambda * (w * acc_q + grids.space.cell_volume() * acc_t);
}

MeasurePair estimate_multiplier(const ProblemSpec& spec, const Grids& grids,
                                const GridFunction& y, double lambda) {
  const bool bilateral = spec.state_bound.mode == StateConstraint::Mode::Bilateral;
  MeasurePair mu = MeasurePair::zero(
      grids, bilateral ? MeasurePair::Sign::Signed : MeasurePair::Sign::Nonnegative);
  const double w = grids.space.cell_volume() * grids.time.dt();
  for (int k = 1; k <= grids.time.steps; ++k) {
    auto yk = y.level(k);
    for (int i = 0; i < mu.interior; ++i)
      mu.q(i, k) = lambda * w * signed_excess(spec.state_bound, yk[i]);
  }
  auto yT = y.level(grids.time.steps);
  for (int i = 0; i < mu.interior; ++i)
    mu.mass_terminal[i] =
        lambda * grids.space.cell_volume() * signed_excess(spec.state_bound, yT[i]);
  return mu;
}

namespace {

struct PenaltyEval {
  double total = 0.0;
  double objective = 0.0;
  double penalty = 0.0;
  double violation = 0.0;
  State st;
};

PenaltyEval eval_penalized(const ProblemSpec& spec, const Grids& grids, double lambda,
                           const GridFunction& u, const SolverOpts& pde) {
  PenaltyEval e;
  e.st = solve_state(spec, grids, u, pde);
  e.objective = eval_j_with(spec, grids, u, e.st);
  e.penalty = penalty_value(spec, grids, e.st.y, lambda);
  e.total = e.objective + e.penalty;
  e.violation = state_violation(spec, e.st.y);
  return e;
}

GridFunction penalized_gradient(const ProblemSpec& spec, const GridFunction& u,
                                const Adjoint& adj) {
  GridFunction g = adj.phi;
  const auto& uv = u.data();
  auto& gv = g.data();
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += spec.tikhonov * uv[i];
  return g;
}

double projected_stationarity(const ProblemSpec& spec, const GridFunction& u,
                              const GridFunction& g) {
  const auto& uv = u.data();
  const auto& gv = g.data();
  double worst = 0.0;
  for (std::size_t i = 0; i < uv.size(); ++i) {
    const double target = clamp_box(uv[i] - gv[i] / spec.tikhonov, spec.control_lower,
                                    spec.control_upper);
    worst = std::max(worst, std::abs(uv[i] - target));
  }
  return worst;
}

double dot_raw(const GridFunction& a, const GridFunction& b) {
  const auto& av = a.data();
  const auto& bv = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  return acc;
}

}  // namespace

PenalizedResult solve_penalized(const ProblemSpec& spec, const Grids& grids, double lambda,
                                const GridFunction& u0, const OptimizerOpts& opts) {
  if (!u0.matches(grids))
    throw DimensionMismatch("solve_penalized: initial control does not match grids");

  GridFunction u = projected_copy(spec, u0);
  const double pinned =
      clamp_box(0.0, spec.control_lower, spec.control_upper);
  for (double& v : u.level(0)) v = pinned;

  AdjointOpts aopts;
  aopts.pde = opts.pde;

  PenaltyEval ev = eval_penalized(spec, grids, lambda, u, opts.pde);
  MeasurePair mu = estimate_multiplier(spec, grids, ev.st.y, lambda);
  Adjoint adj = solve_adjoint(spec, grids, ev.st, mu, aopts);
  GridFunction g = penalized_gradient(spec, u, adj);
  double stat = projected_stationarity(spec, u, g);

  GridFunction prev_u, prev_g, trial, d;
  const double theta_fallback = 1.0 / spec.tikhonov;
  double theta = theta_fallback;
  int it = 0;
  bool converged = stat <= opts.inner_tol;

  while (!converged && it < opts.max_inner) {
    ++it;
    if (prev_u.interior_count() != 0) {
      lin_comb(1.0, u, -1.0, prev_u, trial);      // s
      lin_comb(1.0, g, -1.0, prev_g, d);          // delta g
      const double ss = dot_raw(trial, trial);
      const double sty = dot_raw(trial, d);
      theta = sty > 0.0 ? ss / sty : theta_fallback;
    }
    theta = std::clamp(theta, 1e-10, 1e10);

    bool accepted = false;
    PenaltyEval trial_ev;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      lin_comb(1.0, u, -theta, g, trial);
      project_control(spec, trial);
      lin_comb(1.0, trial, -1.0, u, d);
      if (max_abs(d) == 0.0) {
        // Projected fixed point for one positive step is one for all of them.
        converged = true;
        break;
      }
      const double slope = inner_product_q(grids, g, d);
      trial_ev = eval_penalized(spec, grids, lambda, trial, opts.pde);
      if (trial_ev.total <=
          ev.total + opts.armijo_c * slope + 1e-12 * (1.0 + std::abs(ev.total))) {
        accepted = true;
        break;
      }
      theta *= 0.5;
    }
    if (converged) break;
    if (!accepted)
      throw LineSearchFailure("projection-arc backtracking exhausted " +
                              std::to_string(opts.max_backtracks) +
                              " halvings at penalty weight " + std::to_string(lambda));

    prev_u = std::move(u);
    prev_g = std::move(g);
    u = trial;
    ev = std::move(trial_ev);
    mu = estimate_multiplier(spec, grids, ev.st.y, lambda);
    adj = solve_adjoint(spec, grids, ev.st, mu, aopts);
    g = penalized_gradient(spec, u, adj);
    stat = projected_stationarity(spec, u, g);
    converged = stat <= opts.inner_tol;
  }

  PenalizedResult res;
  res.diag.lambda = lambda;
  res.diag.inner_iterations = it;
  res.diag.stationarity = stat;
  res.diag.max_violation = ev.violation;
  res.diag.objective = ev.objective;
  res.diag.penalty = ev.penalty;
  res.diag.inner_converged = converged;
  res.u = std::move(u);
  res.state = std::move(ev.st);
  res.adjoint = std::move(adj);
  return res;
}

KktTriplet solve_ocp(const ProblemSpec& spec, const Grids& grids, const GridFunction& u0,
                     const OptimizerOpts& opts) {
  if (!u0.matches(grids))
    throw DimensionMismatch("solve_ocp: initial control does not match grids");
  if (opts.max_stages < 1)
    throw PathStalled("penalty path was given no stages to run");

  GridFunction u = u0;
  std::vector<StageDiag> history;
  double lambda = opts.lambda0;
  double prev_viol = std::numeric_limits<double>::infinity();
  int stalled = 0;
  PenalizedResult res;

  for (int stage = 0; stage < opts.max_stages; ++stage, lambda *= opts.sigma) {
    res = solve_penalized(spec, grids, lambda, u, opts);
    u = res.u;
    history.push_back(res.diag);

    const double viol = res.diag.max_violation;
    if (viol <= opts.feasibility_tol) break;
    if (viol > 0.9 * prev_viol) {
      if (++stalled >= 2)
        throw PathStalled("state violation " + std::to_string(viol) +
                          " stopped improving at penalty weight " + std::to_string(lambda));
    } else {
      stalled = 0;
    }
    prev_viol = viol;
  }

  KktTriplet out;
  out.converged = res.diag.max_violation <= opts.feasibility_tol;
  out.u = std::move(res.u);
  out.state = std::move(res.state);
  out.mu = res.adjoint.source;
  out.adjoint = std::move(res.adjoint);
  out.history = std::move(history);
  return out;
}

KktTriplet solve_ocp(const ProblemSpec& spec, const Grids& grids, const OptimizerOpts& opts) {
  return solve_ocp(spec, grids, GridFunction(grids), opts);
}

}  // namespace parcon
