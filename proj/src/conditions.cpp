#include "parcon/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <utility>

#include "parcon/rng.hpp"

namespace parcon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pos(double a) { return a > 0.0 ? a : 0.0; }

double clamp_box(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

void require_triplet_shapes(const Grids& grids, const KktTriplet& t, const char* who) {
  if (!t.u.matches(grids) || !t.state.y.matches(grids) || !t.adjoint.phi.matches(grids) ||
      !t.mu.matches(grids))
    throw DimensionMismatch(std::string(who) + ": triplet does not match grids");
}

// Checkers must report on tampered input rather than refuse it, so a measure
// declared nonnegative but carrying negative mass is evaluated as signed; the
// sign defect itself is what check_kkt reports.
MeasurePair relaxed_sign(const MeasurePair& mu) {
  MeasurePair out = mu;
  if (out.sign_mode == MeasurePair::Sign::Nonnegative && out.min_mass() < 0.0)
    out.sign_mode = MeasurePair::Sign::Signed;
  return out;
}

void spatial_index(const SpatialGrid& grid, int i, int& ix, int& iy) {
  if (grid.dim == 1) {
    ix = i;
    iy = 0;
  } else {
    ix = i % grid.interior(0);
    iy = i / grid.interior(0);
  }
}

// Evaluations of many directions are independent; results land in per-index
// slots so assembly order never depends on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = static_cast<int>(hw == 0 ? 4 : hw);
  }
  threads = std::min({threads, n, 8});
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < n; i += threads) {
        try {
          body(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

GridFunction lagrangian_gradient_field(const ProblemSpec& spec, const GridFunction& u,
                                       const Adjoint& adj) {
  GridFunction g = adj.phi;
  const auto& uv = u.data();
  auto& gv = g.data();
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += spec.tikhonov * uv[i];
  return g;
}

struct SamplerBase {
  const ProblemSpec& spec;
  const Grids& grids;
  const GridFunction& u;
  const State& base;        // recomputed state at u
  const GridFunction& g;    // Lagrangian gradient field at (u, mu)
  const MeasurePair& mu;
  double tau = 0.0;
  double eps_act = 1e-6;
  SolverOpts pde;
};

ConeMembership membership_core(const SamplerBase& sb, const GridFunction& v,
                               const GridFunction& z) {
  const ProblemSpec& spec = sb.spec;
  const Grids& grids = sb.grids;
  ConeMembership m;
  m.tau = sb.tau;
  m.exponent_p = spec.exponent_p;
  m.norm_lp = lp_norm(grids, v, spec.exponent_p);
  if (m.norm_lp == 0.0) {
    // The zero direction belongs to every cone.
    m.slack_state_upper = kInf;
    m.slack_state_lower = kInf;
    m.member = true;
    return m;
  }
  const double budget = sb.tau * m.norm_lp;
  const bool bilateral = spec.state_bound.mode == StateConstraint::Mode::Bilateral;
  const double up = spec.state_bound.upper();
  const double lo = spec.state_bound.gamma_min;

  m.slack_gradient = budget - inner_product_q(grids, sb.g, v);

  double sign_worst = -kInf;    // worst wrong-signed value on active control nodes
  double z_up_worst = -kInf;    // sup z_v over the ceiling-active set
  double z_lo_worst = -kInf;    // sup -z_v over the floor-active set
  const int ni = grids.space.interior_count();
  for (int k = 1; k <= grids.time.steps; ++k) {
    auto uk = sb.u.level(k);
    auto yk = sb.base.y.level(k);
    auto vk = v.level(k);
    auto zk = z.level(k);
    for (int i = 0; i < ni; ++i) {
      if (uk[i] <= spec.control_lower + sb.eps_act) sign_worst = std::max(sign_worst, pos(-vk[i]));
      if (uk[i] >= spec.control_upper - sb.eps_act) sign_worst = std::max(sign_worst, pos(vk[i]));
      if (yk[i] >= up - sb.eps_act) z_up_worst = std::max(z_up_worst, zk[i]);
      if (bilateral && yk[i] <= lo + sb.eps_act) z_lo_worst = std::max(z_lo_worst, -zk[i]);
    }
  }
  m.slack_sign = sign_worst == -kInf ? kInf : -sign_worst;
  m.slack_state_upper = z_up_worst == -kInf ? kInf : budget - z_up_worst;
  m.slack_state_lower = z_lo_worst == -kInf ? kInf : budget - z_lo_worst;

  if (bilateral) {
    double tv_pairing = 0.0;
    for (int k = 1; k <= sb.mu.steps; ++k) {
      auto zk = z.level(k);
      for (int i = 0; i < sb.mu.interior; ++i)
        tv_pairing += std::abs(sb.mu.q(i, k)) * std::abs(zk[i]);
    }
    auto zT = z.level(sb.mu.steps);
    for (int i = 0; i < sb.mu.interior; ++i)
      tv_pairing += std::abs(sb.mu.mass_terminal[i]) * std::abs(zT[i]);
    m.slack_measure = budget - tv_pairing;
  } else {
    m.slack_measure = sb.mu.pair(z) + budget;
  }

  const double slack_floor = -1e-9 * std::max(1.0, m.norm_lp);
  m.member = m.slack_gradient >= slack_floor && m.slack_sign >= slack_floor &&
             m.slack_state_upper >= slack_floor && m.slack_state_lower >= slack_floor &&
             m.slack_measure >= slack_floor;
  return m;
}

constexpr int kProbeCount = 8;

// Raw candidate shapes before sign processing: a handful of deterministic
// probes spanning smooth, oscillatory and concentrated directions, then
// Gaussian fields smoothed by one spatial Jacobi pass.
void raw_candidate(const SamplerBase& sb, int index, Rng& rng, GridFunction& v) {
  const SpatialGrid& sg = sb.grids.space;
  const int ni = sg.interior_count();
  const int nt = sb.grids.time.steps;
  v = GridFunction(sb.grids);
  auto fill_pattern = [&](auto&& value) {
    for (int k = 1; k <= nt; ++k) {
      auto vk = v.level(k);
      for (int i = 0; i < ni; ++i) vk[i] = value(i, k);
    }
  };
  switch (index) {
    case 0:
      fill_pattern([](int, int) { return 1.0; });
      return;
    case 1:
      fill_pattern([](int, int) { return -1.0; });
      return;
    case 2:
      fill_pattern([&](int i, int k) {
        int ix, iy;
        spatial_index(sg, i, ix, iy);
        return ((ix + iy + k) & 1) ? -1.0 : 1.0;
      });
      return;
    case 3:
      fill_pattern([&](int i, int) {
        int ix, iy;
        spatial_index(sg, i, ix, iy);
        return ((ix + iy) & 1) ? -1.0 : 1.0;
      });
      return;
    case 4:
      fill_pattern([](int, int k) { return (k & 1) ? -1.0 : 1.0; });
      return;
    case 5:
      v(ni / 2, std::max(1, (nt + 1) / 2)) = 1.0;
      return;
    case 6:
      v(0, 1) = 1.0;
      return;
    case 7:
      v(ni - 1, nt) = 1.0;
      return;
    default:
      break;
  }
  for (int k = 1; k <= nt; ++k) {
    auto vk = v.level(k);
    for (int i = 0; i < ni; ++i) vk[i] = rng.normal();
  }
  // One Jacobi pass per level, zero beyond the boundary.
  std::vector<double> s(static_cast<std::size_t>(ni));
  for (int k = 1; k <= nt; ++k) {
    auto vk = v.level(k);
    if (sg.dim == 1) {
      for (int i = 0; i < ni; ++i) {
        const double l = i > 0 ? vk[i - 1] : 0.0;
        const double r = i + 1 < ni ? vk[i + 1] : 0.0;
        s[static_cast<std::size_t>(i)] = (l + 2.0 * vk[i] + r) / 4.0;
      }
    } else {
      const int nx = sg.interior(0);
      for (int i = 0; i < ni; ++i) {
        int ix, iy;
        spatial_index(sg, i, ix, iy);
        const double w = ix > 0 ? vk[i - 1] : 0.0;
        const double e = ix + 1 < nx ? vk[i + 1] : 0.0;
        const double so = iy > 0 ? vk[i - nx] : 0.0;
        const double no = iy + 1 < sg.interior(1) ? vk[i + nx] : 0.0;
        s[static_cast<std::size_t>(i)] = (4.0 * vk[i] + w + e + so + no) / 8.0;
      }
    }
    std::copy(s.begin(), s.end(), vk.begin());
  }
}

// Sign conditions on the active control sets: flip the value to the admitted
// sign; zero it where even the admitted sign would push the gradient pairing
// up, which is how strongly active nodes force v = 0 in the unrelaxed cone.
void process_signs(const SamplerBase& sb, GridFunction& v) {
  const ProblemSpec& spec = sb.spec;
  const int ni = sb.grids.space.interior_count();
  for (int k = 1; k <= sb.grids.time.steps; ++k) {
    auto uk = sb.u.level(k);
    auto gk = sb.g.level(k);
    auto vk = v.level(k);
    for (int i = 0; i < ni; ++i) {
      const bool at_lower = uk[i] <= spec.control_lower + sb.eps_act;
      const bool at_upper = uk[i] >= spec.control_upper - sb.eps_act;
      if (at_lower && at_upper) {
        vk[i] = 0.0;
      } else if (at_lower) {
        const double forced = std::abs(vk[i]);
        vk[i] = gk[i] * forced > 0.0 ? 0.0 : forced;
      } else if (at_upper) {
        const double forced = -std::abs(vk[i]);
        vk[i] = gk[i] * forced > 0.0 ? 0.0 : forced;
      }
    }
  }
}

// Processed, unit-norm candidate; false when sign processing annihilates it.
bool make_candidate(const SamplerBase& sb, int index, Rng& rng, GridFunction& v) {
  raw_candidate(sb, index, rng, v);
  process_signs(sb, v);
  const double norm = lp_norm(sb.grids, v, sb.spec.exponent_p);
  if (norm == 0.0) return false;
  for (double& x : v.data()) x /= norm;
  return true;
}

struct SamplerStats {
  int attempts = 0;
  int accepted = 0;
};

// Shared rejection-sampling loop. Candidates are generated serially in a
// fixed order from the seed, so the accepted set is independent of both the
// batch size and the thread count; on_accept fires in generation order.
SamplerStats run_sampler(
    const SamplerBase& sb, int n, std::uint64_t seed, const SampleOpts& opts,
    const std::function<void(GridFunction&&, GridFunction&&, const ConeMembership&)>& on_accept) {
  if (n < 1) throw DimensionMismatch("cone sampling needs a positive sample count");
  Rng rng(seed);
  SamplerStats st;
  const int budget = opts.max_attempt_factor * n;
  int index = 0;
  std::vector<GridFunction> vs;
  std::vector<GridFunction> zs;
  std::vector<ConeMembership> ms;
  while (st.accepted < n && st.attempts < budget) {
    const int want = std::min({budget - st.attempts, std::max(n - st.accepted, 8), 32});
    vs.clear();
    for (int b = 0; b < want; ++b) {
      ++st.attempts;
      GridFunction v;
      if (make_candidate(sb, index++, rng, v)) vs.push_back(std::move(v));
    }
    const int nb = static_cast<int>(vs.size());
    zs.assign(static_cast<std::size_t>(nb), GridFunction());
    ms.assign(static_cast<std::size_t>(nb), ConeMembership());
    parallel_for(nb, opts.threads, [&](int i) {
      LinearizedState z = solve_linearized(sb.spec, sb.grids, sb.base, vs[static_cast<std::size_t>(i)], sb.pde);
      ms[static_cast<std::size_t>(i)] = membership_core(sb, vs[static_cast<std::size_t>(i)], z.z);
      zs[static_cast<std::size_t>(i)] = std::move(z.z);
    });
    for (int i = 0; i < nb; ++i) {
      if (st.accepted == n) {
        st.attempts -= nb - i;   // generated but never judged
        break;
      }
      if (ms[static_cast<std::size_t>(i)].member) {
        ++st.accepted;
        on_accept(std::move(vs[static_cast<std::size_t>(i)]),
                  std::move(zs[static_cast<std::size_t>(i)]), ms[static_cast<std::size_t>(i)]);
      }
    }
  }
  if (st.accepted == 0)
    throw EmptySample("no cone member found in " + std::to_string(st.attempts) +
                      " attempts at tau = " + std::to_string(sb.tau) +
                      "; raise tau or inspect the active sets");
  return st;
}

}  // namespace

KktReport check_kkt(const ProblemSpec& spec, const Grids& grids, const KktTriplet& triplet,
                    const ConditionTolerances& tol) {
  require_triplet_shapes(grids, triplet, "check_kkt");
  KktReport r;

  State re = solve_state(spec, grids, triplet.u, tol.pde);
  const MeasurePair mu_eval = relaxed_sign(triplet.mu);
  AdjointOpts aopts;
  aopts.pde = tol.pde;
  Adjoint rephi = solve_adjoint(spec, grids, re, mu_eval, aopts);

  GridFunction diff;
  lin_comb(1.0, triplet.state.y, -1.0, re.y, diff);
  r.state_residual = max_abs(diff);
  lin_comb(1.0, triplet.adjoint.phi, -1.0, rephi.phi, diff);
  r.adjoint_residual = max_abs(diff);

  const int ni = grids.space.interior_count();
  for (int k = 1; k <= grids.time.steps; ++k) {
    auto uk = triplet.u.level(k);
    auto pk = rephi.phi.level(k);
    for (int i = 0; i < ni; ++i) {
      const double target =
          clamp_box(-pk[i] / spec.tikhonov, spec.control_lower, spec.control_upper);
      r.stationarity = std::max(r.stationarity, std::abs(uk[i] - target));
    }
  }

  r.feasibility = state_violation(spec, re.y);
  r.total_variation = triplet.mu.total_variation();

  const bool bilateral = spec.state_bound.mode == StateConstraint::Mode::Bilateral;
  const double up = spec.state_bound.upper();
  const double lo = spec.state_bound.gamma_min;
  auto account = [&](double mass, double y) {
    if (mass == 0.0) return;
    if (mass > 0.0) {
      if (y < up - tol.eps_act) r.support_violation_upper += mass;
      if (bilateral && y <= lo + tol.eps_act) r.sign_violation += mass;
    } else {
      if (bilateral) {
        if (y > lo + tol.eps_act) r.support_violation_lower += -mass;
        if (y >= up - tol.eps_act) r.sign_violation += -mass;
      } else {
        r.sign_violation += -mass;
        if (y < up - tol.eps_act) r.support_violation_upper += -mass;
      }
    }
  };
  for (int k = 1; k <= triplet.mu.steps; ++k) {
    auto yk = re.y.level(k);
    for (int i = 0; i < triplet.mu.interior; ++i) account(triplet.mu.q(i, k), yk[i]);
  }
  auto yT = re.y.level(triplet.mu.steps);
  for (int i = 0; i < triplet.mu.interior; ++i)
    account(triplet.mu.mass_terminal[i], yT[i]);
  r.support_violation = r.support_violation_upper + r.support_violation_lower;

  r.state_ok = r.state_residual <= tol.state_tol;
  r.adjoint_ok = r.adjoint_residual <= tol.adjoint_tol;
  r.stationarity_ok = r.stationarity <= tol.stationarity_tol;
  r.feasible_ok = r.feasibility <= tol.feasibility_tol;
  r.support_ok = r.support_violation <= tol.support_share * r.total_variation;
  r.sign_ok = r.sign_violation <= tol.sign_share * r.total_variation;
  r.pass = r.state_ok && r.adjoint_ok && r.stationarity_ok && r.feasible_ok &&
           r.support_ok && r.sign_ok;
  return r;
}

double check_slater(const ProblemSpec& spec, const Grids& grids, const GridFunction& u_bar,
                    const GridFunction& u0, const SolverOpts& opts) {
  if (!u_bar.matches(grids) || !u0.matches(grids))
    throw DimensionMismatch("check_slater: controls do not match grids");
  State st = solve_state(spec, grids, u_bar, opts);
  GridFunction d;
  lin_comb(1.0, u0, -1.0, u_bar, d);
  LinearizedState z = solve_linearized(spec, grids, st, d, opts);

  const bool bilateral = spec.state_bound.mode == StateConstraint::Mode::Bilateral;
  const double up = spec.state_bound.upper();
  const double lo = spec.state_bound.gamma_min;
  double margin = kInf;
  const int ni = grids.space.interior_count();
  for (int k = 0; k <= grids.time.steps; ++k) {
    auto yk = st.y.level(k);
    auto zk = z.z.level(k);
    for (int i = 0; i < ni; ++i) {
      const double w = yk[i] + zk[i];
      margin = std::min(margin, up - w);
      if (bilateral) margin = std::min(margin, w - lo);
    }
  }
  return margin;
}

ConeMembership cone_membership(const ProblemSpec& spec, const Grids& grids,
                               const KktTriplet& triplet, const GridFunction& v,
                               double tau, const ConditionTolerances& tol) {
  require_triplet_shapes(grids, triplet, "cone_membership");
  if (!v.matches(grids))
    throw DimensionMismatch("cone_membership: direction does not match grids");
  State re = solve_state(spec, grids, triplet.u, tol.pde);
  const MeasurePair mu_eval = relaxed_sign(triplet.mu);
  AdjointOpts aopts;
  aopts.pde = tol.pde;
  Adjoint adj = solve_adjoint(spec, grids, re, mu_eval, aopts);
  GridFunction g = lagrangian_gradient_field(spec, triplet.u, adj);
  SamplerBase sb{spec, grids, triplet.u, re, g, mu_eval, tau, tol.eps_act, tol.pde};
  LinearizedState z = solve_linearized(spec, grids, re, v, tol.pde);
  return membership_core(sb, v, z.z);
}

ConeSample sample_cone(const ProblemSpec& spec, const Grids& grids, const KktTriplet& triplet,
                       double tau, int n, std::uint64_t seed, const SampleOpts& opts) {
  require_triplet_shapes(grids, triplet, "sample_cone");
  State re = solve_state(spec, grids, triplet.u, opts.tol.pde);
  const MeasurePair mu_eval = relaxed_sign(triplet.mu);
  AdjointOpts aopts;
  aopts.pde = opts.tol.pde;
  Adjoint adj = solve_adjoint(spec, grids, re, mu_eval, aopts);
  GridFunction g = lagrangian_gradient_field(spec, triplet.u, adj);
  SamplerBase sb{spec, grids, triplet.u, re, g, mu_eval, tau, opts.tol.eps_act,
                 opts.tol.pde};

  ConeSample out;
  const SamplerStats st = run_sampler(
      sb, n, seed, opts, [&](GridFunction&& v, GridFunction&&, const ConeMembership& m) {
        out.directions.push_back(std::move(v));
        out.memberships.push_back(m);
      });
  out.attempts = st.attempts;
  out.acceptance_rate = static_cast<double>(st.accepted) / std::max(1, st.attempts);
  return out;
}

SscReport check_ssc(const ProblemSpec& spec, const Grids& grids, const KktTriplet& triplet,
                    double tau, int n, std::uint64_t seed, const SampleOpts& opts) {
  require_triplet_shapes(grids, triplet, "check_ssc");
  SscReport rep;
  rep.tau = tau;
  rep.exponent_p = spec.exponent_p;

  rep.kkt_pass = check_kkt(spec, grids, triplet, opts.tol).pass;
  if (!rep.kkt_pass)
    std::fprintf(stderr,
                 "warning: second-order probe on a triplet that fails the first-order "
                 "check; ratios describe the supplied point, not a verified one\n");

  const MeasurePair mu_eval = relaxed_sign(triplet.mu);
  QuadFormEvaluator qfe(spec, grids, triplet.u, mu_eval, opts.tol.pde);
  GridFunction g = lagrangian_gradient_field(spec, triplet.u, qfe.adjoint());
  SamplerBase sb{spec, grids, triplet.u, qfe.state(), g, mu_eval,
                 tau,  opts.tol.eps_act, opts.tol.pde};

  rep.min_ratio = kInf;
  const SamplerStats st = run_sampler(
      sb, n, seed, opts, [&](GridFunction&& v, GridFunction&& z, const ConeMembership&) {
        LinearizedState zs;
        zs.z = std::move(z);
        const QuadFormSample q = qfe.eval_with(v, zs);
        DirectionSample ds;
        ds.id = static_cast<int>(rep.samples.size());
        ds.quadform = q.value;
        ds.norm_l2_sq = q.norm_l2 * q.norm_l2;
        ds.ratio = q.value / ds.norm_l2_sq;
        rep.min_ratio = std::min(rep.min_ratio, ds.ratio);
        rep.samples.push_back(ds);
      });
  rep.n_samples = st.accepted;
  rep.rejected_directions = st.attempts - st.accepted;
  rep.positive = rep.min_ratio > 0.0;

  // Roughest direction the grid carries, evaluated outside the membership
  // filter; the fallback keeps the diagnostic defined when sign processing
  // wipes the pattern out.
  Rng diag_rng(seed);
  GridFunction cb;
  if (!make_candidate(sb, 2, diag_rng, cb)) {
    raw_candidate(sb, 2, diag_rng, cb);
    const double norm = lp_norm(grids, cb, spec.exponent_p);
    for (double& x : cb.data()) x /= norm;
  }
  const QuadFormSample qcb = qfe.eval(cb);
  rep.nu_limit_diagnostic = qcb.value / (qcb.norm_l2 * qcb.norm_l2);
  return rep;
}

GrowthReport quadratic_growth_probe(const ProblemSpec& spec, const Grids& grids,
                                    const KktTriplet& triplet, std::vector<double> radii,
                                    int n_per_radius, std::uint64_t seed,
                                    const SampleOpts& opts) {
  require_triplet_shapes(grids, triplet, "quadratic_growth_probe");
  if (n_per_radius < 1)
    throw DimensionMismatch("quadratic_growth_probe needs a positive sample count");

  GrowthReport rep;
  rep.radii = std::move(radii);
  rep.feasible_counts.assign(rep.radii.size(), 0);
  rep.min_ratios.assign(rep.radii.size(), std::numeric_limits<double>::quiet_NaN());

  State base = solve_state(spec, grids, triplet.u, opts.tol.pde);
  const double j_bar = eval_j_with(spec, grids, triplet.u, base);
  rep.feasibility_filter = std::max(1e-9, state_violation(spec, base.y));

  Rng rng(seed);
  const int ni = grids.space.interior_count();
  double kappa = kInf;
  GridFunction xi(grids), trial, delta;
  for (std::size_t ir = 0; ir < rep.radii.size(); ++ir) {
    const double r = rep.radii[ir];
    double min_ratio = kInf;
    for (int sample = 0; sample < n_per_radius; ++sample) {
      xi.fill(0.0);
      for (int k = 1; k <= grids.time.steps; ++k) {
        auto xk = xi.level(k);
        for (int i = 0; i < ni; ++i) xk[i] = rng.normal();
      }
      const double xn = lp_norm(grids, xi, 2.0);
      if (xn == 0.0) continue;
      for (double& x : xi.data()) x /= xn;

      // Scale until the projected move has the requested L2 length.
      double s = r;
      double nd = 0.0;
      for (int t = 0; t < 8; ++t) {
        lin_comb(1.0, triplet.u, s, xi, trial);
        project_control(spec, trial);
        lin_comb(1.0, trial, -1.0, triplet.u, delta);
        nd = lp_norm(grids, delta, 2.0);
        if (nd > 0.0 && std::abs(nd - r) <= 0.02 * r) break;
        s = nd > 0.0 ? s * (r / nd) : s * 4.0;
      }
      if (nd == 0.0) continue;

      State st = solve_state(spec, grids, trial, opts.tol.pde);
      if (state_violation(spec, st.y) > rep.feasibility_filter) continue;
      const double j = eval_j_with(spec, grids, trial, st);
      const double ratio = 2.0 * (j - j_bar) / (nd * nd);
      min_ratio = std::min(min_ratio, ratio);
      ++rep.feasible_counts[ir];
    }
    if (rep.feasible_counts[ir] > 0) {
      rep.min_ratios[ir] = min_ratio;
      kappa = std::min(kappa, min_ratio);
    }
  }
  rep.kappa = kappa == kInf ? std::numeric_limits<double>::quiet_NaN() : kappa;
  rep.nonnegative = kappa != kInf && kappa >= 0.0;
  return rep;
}

}  // namespace parcon
