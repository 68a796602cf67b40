// Command-line front end: solve control problems, audit first- and
// second-order conditions on stored triplets, and run gradient and
// grid-convergence diagnostics. Every command writes a JSON report carrying
// the fully resolved configuration, so a report alone reproduces its run.
//
// Exit codes: 0 success, 1 usage/config/IO, 2 solver non-convergence,
// 3 condition check failed, 4 degenerate sampling.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "parcon/calculus.hpp"
#include "parcon/conditions.hpp"
#include "parcon/config.hpp"
#include "parcon/errors.hpp"
#include "parcon/field_io.hpp"
#include "parcon/optimizer.hpp"
#include "parcon/pde_forward.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace parcon;

const double kPi = std::acos(-1.0);

struct CommonArgs {
  std::string config_path;
  std::string out_dir;      // overrides output.directory when nonempty
  long long seed = -1;      // overrides conditions.seed when nonnegative
  bool quiet = false;
  std::string triplet_dir;  // where check commands read u/y/phi/mu from
};

RunConfig load_effective(const CommonArgs& a) {
  RunConfig cfg = load_config(a.config_path);
  if (!a.out_dir.empty()) {
    cfg.output_dir = a.out_dir;
    cfg.resolved["output"]["directory"] = a.out_dir;
  }
  if (a.seed >= 0) {
    cfg.conditions.seed = static_cast<unsigned long>(a.seed);
    cfg.resolved["conditions"]["seed"] = cfg.conditions.seed;
  }
  return cfg;
}

void write_report(const std::filesystem::path& dir, const char* name,
                  const json& doc) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  write_text_atomic(dir / name, doc.dump(2) + "\n");
}

void note(const CommonArgs& a, const std::string& line) {
  if (!a.quiet) std::printf("%s\n", line.c_str());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

bool same_grids(const Grids& a, const Grids& b) {
  if (a.space.dim != b.space.dim) return false;
  for (int ax = 0; ax < a.space.dim; ++ax) {
    if (a.space.nodes[ax] != b.space.nodes[ax]) return false;
    if (a.space.extent[ax] != b.space.extent[ax]) return false;
  }
  return a.time.steps == b.time.steps && a.time.horizon == b.time.horizon;
}

KktTriplet read_triplet(const RunConfig& cfg, const std::filesystem::path& dir) {
  FieldFile u = read_field(dir / "u.txt");
  FieldFile y = read_field(dir / "y.txt");
  FieldFile phi = read_field(dir / "phi.txt");
  MeasureFile mu = read_measure(dir / "mu.txt");
  for (const Grids* g : {&u.grids, &y.grids, &phi.grids, &mu.grids}) {
    if (!same_grids(*g, cfg.grids)) {
      throw IoError("triplet files in " + dir.string() +
                    " were written on a different grid than the config");
    }
  }
  KktTriplet t;
  t.u = std::move(u.values);
  t.state.y = std::move(y.values);
  t.adjoint.phi = std::move(phi.values);
  t.adjoint.source = mu.measure;
  t.mu = std::move(mu.measure);
  t.converged = true;
  return t;
}

json history_json(const std::vector<StageDiag>& history) {
  json rows = json::array();
  for (const StageDiag& d : history) {
    rows.push_back({{"lambda", d.lambda},
                    {"inner_iterations", d.inner_iterations},
                    {"stationarity", d.stationarity},
                    {"max_violation", d.max_violation},
                    {"objective", d.objective},
                    {"penalty", d.penalty},
                    {"inner_converged", d.inner_converged}});
  }
  return rows;
}

int cmd_solve(const CommonArgs& a) {
  RunConfig cfg = load_effective(a);
  KktTriplet res = solve_ocp(cfg.spec, cfg.grids, cfg.solver);

  const std::filesystem::path dir = cfg.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  write_field(dir / "u.txt", cfg.grids, res.u);
  write_field(dir / "y.txt", cfg.grids, res.state.y);
  write_field(dir / "phi.txt", cfg.grids, res.adjoint.phi);
  write_measure(dir / "mu.txt", cfg.grids, res.mu);

  json rep;
  rep["command"] = "solve";
  rep["config"] = cfg.resolved;
  rep["converged"] = res.converged;
  rep["objective"] = eval_j_with(cfg.spec, cfg.grids, res.u, res.state);
  rep["stages"] = static_cast<int>(res.history.size());
  rep["history"] = history_json(res.history);
  write_report(dir, "solve_report.json", rep);

  const StageDiag& last = res.history.back();
  note(a, "solve: converged=" + std::string(res.converged ? "yes" : "no") +
              " stages=" + std::to_string(res.history.size()) +
              " stationarity=" + fmt(last.stationarity) +
              " violation=" + fmt(last.max_violation) + " -> " + dir.string());
  return res.converged ? 0 : 2;
}

int cmd_check_kkt(const CommonArgs& a) {
  RunConfig cfg = load_effective(a);
  const std::filesystem::path tdir =
      a.triplet_dir.empty() ? cfg.output_dir : std::filesystem::path(a.triplet_dir);
  KktTriplet t = read_triplet(cfg, tdir);

  KktReport rep = check_kkt(cfg.spec, cfg.grids, t, cfg.conditions.tol);
  GridFunction u0(cfg.grids);
  project_control(cfg.spec, u0);
  rep.slater_margin =
      check_slater(cfg.spec, cfg.grids, t.u, u0, cfg.conditions.tol.pde);

  json doc;
  doc["command"] = "check-kkt";
  doc["config"] = cfg.resolved;
  doc["triplet_dir"] = tdir.string();
  doc["state_residual"] = rep.state_residual;
  doc["adjoint_residual"] = rep.adjoint_residual;
  doc["stationarity"] = rep.stationarity;
  doc["feasibility"] = rep.feasibility;
  doc["support_violation"] = rep.support_violation;
  doc["support_violation_upper"] = rep.support_violation_upper;
  doc["support_violation_lower"] = rep.support_violation_lower;
  doc["sign_violation"] = rep.sign_violation;
  doc["total_variation"] = rep.total_variation;
  doc["slater_margin"] = *rep.slater_margin;
  doc["state_ok"] = rep.state_ok;
  doc["adjoint_ok"] = rep.adjoint_ok;
  doc["stationarity_ok"] = rep.stationarity_ok;
  doc["feasible_ok"] = rep.feasible_ok;
  doc["support_ok"] = rep.support_ok;
  doc["sign_ok"] = rep.sign_ok;
  doc["pass"] = rep.pass;
  write_report(cfg.output_dir, "kkt_report.json", doc);

  note(a, "kkt: pass=" + std::string(rep.pass ? "yes" : "no") +
              " stationarity=" + fmt(rep.stationarity) +
              " feasibility=" + fmt(rep.feasibility) +
              " sign=" + fmt(rep.sign_violation));
  return rep.pass ? 0 : 3;
}

int cmd_check_ssc(const CommonArgs& a) {
  RunConfig cfg = load_effective(a);
  const std::filesystem::path tdir =
      a.triplet_dir.empty() ? cfg.output_dir : std::filesystem::path(a.triplet_dir);
  KktTriplet t = read_triplet(cfg, tdir);

  SampleOpts sopts;
  sopts.tol = cfg.conditions.tol;
  sopts.max_attempt_factor = cfg.conditions.max_attempt_factor;
  sopts.threads = cfg.conditions.threads;

  json results = json::array();
  bool all_positive = true;
  for (double tau : cfg.conditions.tau_list) {
    SscReport r = check_ssc(cfg.spec, cfg.grids, t, tau, cfg.conditions.n_samples,
                            cfg.conditions.seed, sopts);
    all_positive = all_positive && r.positive;

    json samples = json::array();
    for (const DirectionSample& s : r.samples) {
      samples.push_back({{"id", s.id},
                         {"quadform", s.quadform},
                         {"norm_l2_sq", s.norm_l2_sq},
                         {"ratio", s.ratio}});
    }
    results.push_back({{"tau", r.tau},
                       {"exponent_p", r.exponent_p},
                       {"n_samples", r.n_samples},
                       {"rejected_directions", r.rejected_directions},
                       {"min_ratio", r.min_ratio},
                       {"nu_limit_diagnostic", r.nu_limit_diagnostic},
                       {"kkt_pass", r.kkt_pass},
                       {"positive", r.positive},
                       {"samples", samples}});
    note(a, "ssc tau=" + fmt(tau) + ": min_ratio=" + fmt(r.min_ratio) +
                " samples=" + std::to_string(r.n_samples) +
                " positive=" + std::string(r.positive ? "yes" : "no"));
  }

  json doc;
  doc["command"] = "check-ssc";
  doc["config"] = cfg.resolved;
  doc["triplet_dir"] = tdir.string();
  doc["results"] = results;
  write_report(cfg.output_dir, "ssc_report.json", doc);
  return all_positive ? 0 : 3;
}

int cmd_gradcheck(const CommonArgs& a) {
  RunConfig cfg = load_effective(a);
  const Grids& grids = cfg.grids;
  const SolverOpts& pde = cfg.conditions.tol.pde;
  const double s = 1e-4;
  const int n_dirs = 10;
  const double tol = 1e-5;

  GridFunction u(grids);
  project_control(cfg.spec, u);

  // Synthetic nonzero measure with uniform density 0.5 so the Lagrangian
  // branch exercises the measure-sourced adjoint.
  MeasurePair mu = MeasurePair::zero(grids, MeasurePair::Sign::Nonnegative);
  {
    const double w = grids.space.cell_volume() * grids.time.dt();
    for (double& m : mu.mass_q) m = 0.5 * w;
    for (double& m : mu.mass_terminal) m = 0.5 * grids.space.cell_volume();
  }

  GridFunction g_obj = grad_j(cfg.spec, grids, u, pde);
  GridFunction g_lag = grad_lagrangian(cfg.spec, grids, u, mu, pde);
  if (cfg.break_adjoint) {
    // Test hook: bias the adjoint gradients so the comparison must fail.
    for (int k = 0; k <= g_obj.steps(); ++k) {
      for (double& x : g_obj.level(k)) x += 1e-3 * (1.0 + std::fabs(x));
      for (double& x : g_lag.level(k)) x += 1e-3 * (1.0 + std::fabs(x));
    }
  }

  std::mt19937_64 rng(cfg.conditions.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  json rows = json::array();
  double max_rel = 0.0;

  auto run_block = [&](const char* label, const GridFunction& g,
                       const std::function<double(const GridFunction&)>& value) {
    for (int d = 0; d < n_dirs; ++d) {
      GridFunction v(grids);
      for (int k = 1; k <= v.steps(); ++k) {
        for (double& x : v.level(k)) x = normal(rng);
      }
      const double ad = inner_product_q(grids, g, v);
      GridFunction trial;
      lin_comb(1.0, u, s, v, trial);
      const double plus = value(trial);
      lin_comb(1.0, u, -s, v, trial);
      const double minus = value(trial);
      const double fd = (plus - minus) / (2.0 * s);
      const double denom = std::max({std::fabs(ad), std::fabs(fd), 1e-14});
      const double rel = std::fabs(fd - ad) / denom;
      max_rel = std::max(max_rel, rel);
      rows.push_back({{"functional", label},
                      {"direction", d},
                      {"adjoint", ad},
                      {"finite_difference", fd},
                      {"rel_error", rel}});
    }
  };

  run_block("objective", g_obj, [&](const GridFunction& w) {
    return eval_j(cfg.spec, grids, w, pde);
  });
  run_block("lagrangian", g_lag, [&](const GridFunction& w) {
    return lagrangian(cfg.spec, grids, w, mu, pde);
  });

  const bool pass = max_rel <= tol;
  json doc;
  doc["command"] = "gradcheck";
  doc["config"] = cfg.resolved;
  doc["step"] = s;
  doc["directions"] = n_dirs;
  doc["tolerance"] = tol;
  doc["max_rel_error"] = max_rel;
  doc["pass"] = pass;
  doc["rows"] = rows;
  write_report(cfg.output_dir, "gradcheck.json", doc);

  note(a, "gradcheck: max_rel_error=" + fmt(max_rel) +
              " pass=" + std::string(pass ? "yes" : "no"));
  return pass ? 0 : 3;
}

// Manufactured 1-D problem for grid studies. With unit diffusion and
// reaction f(y) = y, the state exp(-t) sin(pi x / L) satisfies
//   d/dt y - y_xx + y = u  with  u = (pi/L)^2 exp(-t) sin(pi x / L),
// since the -y from the time derivative cancels the +y from the reaction.
struct Manufactured {
  double length = 1.0;

  double state(double x, double t) const {
    return std::exp(-t) * std::sin(kPi * x / length);
  }
  double control(double x, double t) const {
    const double c = (kPi / length) * (kPi / length);
    return c * state(x, t);
  }
};

double mms_error(const Manufactured& mms, int nodes, int steps, double horizon) {
  Grids g;
  g.space = SpatialGrid::interval(nodes, mms.length);
  g.time = TimeGrid{horizon, steps};

  ProblemSpec spec;
  spec.dim = 1;
  spec.diffusion = DiffusionMatrix::isotropic(1.0);
  spec.reaction = NonlinearityPreset::linear_rate(1.0).make();
  spec.cost = zero_cost();
  spec.tikhonov = 1.0;
  spec.state_bound.gamma = kUnbounded;
  spec.initial_state = [&mms](const Point& p) { return mms.state(p.x, 0.0); };

  GridFunction u(g);
  for (int k = 0; k <= g.time.steps; ++k) {
    const double t = g.time.time(k);
    for (int i = 0; i < g.space.interior_count(); ++i) {
      u(i, k) = mms.control(g.space.point(i).x, t);
    }
  }
  SolverOpts opts;
  opts.newton_tol = 1e-12;
  State st = solve_state(spec, g, u, opts);

  GridFunction diff(g);
  for (int k = 0; k <= g.time.steps; ++k) {
    const double t = g.time.time(k);
    for (int i = 0; i < g.space.interior_count(); ++i) {
      diff(i, k) = st.y(i, k) - mms.state(g.space.point(i).x, t);
    }
  }
  return lp_norm(g, diff, 2.0);
}

json sweep_json(const std::vector<std::array<int, 2>>& levels, double horizon,
                double length, std::vector<double>* errors_out) {
  Manufactured mms{length};
  json rows = json::array();
  std::vector<double> errors;
  for (const auto& [nodes, steps] : levels) {
    const double err = mms_error(mms, nodes, steps, horizon);
    errors.push_back(err);
    rows.push_back({{"nodes", nodes},
                    {"steps", steps},
                    {"h", length / (nodes - 1)},
                    {"dt", horizon / steps},
                    {"error", err}});
  }
  if (errors_out) *errors_out = errors;
  return rows;
}

json orders_json(const std::vector<double>& errors,
                 const std::vector<double>& scales) {
  json orders = json::array();
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double num = std::log(errors[i] / errors[i + 1]);
    const double den = std::log(scales[i] / scales[i + 1]);
    orders.push_back(num / den);
  }
  return orders;
}

int cmd_convergence(const CommonArgs& a) {
  RunConfig cfg = load_effective(a);
  if (cfg.grids.space.dim != 1) {
    throw ConfigError("the convergence study runs in dimension 1 only");
  }
  const double length = cfg.grids.space.extent[0];
  const double horizon = cfg.grids.time.horizon;

  json doc;
  doc["command"] = "convergence";
  doc["config"] = cfg.resolved;
  doc["manufactured"] = {
      {"state", "exp(-t)*sin(pi*x/L)"},
      {"control", "(pi/L)^2*exp(-t)*sin(pi*x/L)"},
      {"reaction", "linear_rate(1)"},
  };

  if (!cfg.ladder.level_nodes.empty()) {
    // Explicit ladder: each level must refine the previous one evenly.
    const auto& ns = cfg.ladder.level_nodes;
    const auto& ks = cfg.ladder.level_steps;
    std::vector<std::array<int, 2>> levels;
    for (std::size_t l = 0; l < ns.size(); ++l) {
      if (ns[l] < 3 || ks[l] < 1) {
        throw ConfigError("grid.level_nodes/level_steps: invalid level sizes");
      }
      if (l > 0) {
        const bool nested = ns[l] > ns[l - 1] && ks[l] > ks[l - 1] &&
                            (ns[l] - 1) % (ns[l - 1] - 1) == 0 &&
                            ks[l] % ks[l - 1] == 0;
        if (!nested) {
          throw ConfigError("grid.level_nodes/level_steps: levels are not nested refinements");
        }
      }
      levels.push_back({ns[l], ks[l]});
    }
    std::vector<double> errors, hs, dts;
    json rows = sweep_json(levels, horizon, length, &errors);
    for (const auto& lv : levels) {
      hs.push_back(length / (lv[0] - 1));
      dts.push_back(horizon / lv[1]);
    }
    doc["ladder"] = {{"rows", rows},
                     {"orders_vs_h", orders_json(errors, hs)},
                     {"orders_vs_dt", orders_json(errors, dts)}};
    note(a, "convergence: explicit ladder with " + std::to_string(levels.size()) +
                " levels -> " + (cfg.output_dir / "convergence.json").string());
  } else {
    const int L = cfg.ladder.levels;
    const int n0 = cfg.grids.space.nodes[0];
    const int k0 = cfg.grids.time.steps;

    // Spatial sweep: halve h and quarter dt so the time error, first order in
    // dt, shrinks like h^2 and never pollutes the spatial slope.
    std::vector<std::array<int, 2>> spatial;
    for (int l = 0; l < L; ++l) {
      spatial.push_back({(n0 - 1) * (1 << l) + 1, k0 * (1 << (2 * l))});
    }
    std::vector<double> errors, hs;
    json rows = sweep_json(spatial, horizon, length, &errors);
    for (const auto& lv : spatial) hs.push_back(length / (lv[0] - 1));
    doc["spatial"] = {{"rows", rows}, {"orders", orders_json(errors, hs)}};

    // Temporal sweep: a spatial grid twice as fine as the finest spatial
    // level pins the h^2 floor well below the first-order dt error.
    const int n_fine = (n0 - 1) * (1 << L) + 1;
    std::vector<std::array<int, 2>> temporal;
    for (int l = 0; l < L; ++l) {
      temporal.push_back({n_fine, k0 * (1 << l)});
    }
    std::vector<double> terr, dts;
    json trows = sweep_json(temporal, horizon, length, &terr);
    for (const auto& lv : temporal) dts.push_back(horizon / lv[1]);
    doc["temporal"] = {{"rows", trows}, {"orders", orders_json(terr, dts)}};

    std::string summary = "convergence: levels=" + std::to_string(L);
    if (L > 1) {
      summary += " spatial_order=" + fmt(doc["spatial"]["orders"].back().get<double>()) +
                 " temporal_order=" + fmt(doc["temporal"]["orders"].back().get<double>());
    }
    note(a, summary);
  }

  write_report(cfg.output_dir, "convergence.json", doc);
  return 0;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const DimensionMismatch& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const SignViolation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const EmptySample& e) {
    std::fprintf(stderr, "sampling degenerate: %s\n", e.what());
    return 4;
  } catch (const PathStalled& e) {
    std::fprintf(stderr, "solver did not converge: %s\n", e.what());
    return 2;
  } catch (const NewtonDiverged& e) {
    std::fprintf(stderr, "solver did not converge: %s\n", e.what());
    return 2;
  } catch (const LinearSolveFailure& e) {
    std::fprintf(stderr, "solver did not converge: %s\n", e.what());
    return 2;
  } catch (const LineSearchFailure& e) {
    std::fprintf(stderr, "solver did not converge: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver and optimality-condition toolkit for parabolic "
               "control problems with control and state bounds"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&args](CLI::App* sub, bool with_triplet) {
    sub->add_option("--config", args.config_path, "configuration file (JSON)")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory override");
    sub->add_option("--seed", args.seed, "sampling seed override")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", args.quiet, "suppress progress output");
    if (with_triplet) {
      sub->add_option("--triplet-dir", args.triplet_dir,
                      "directory holding u.txt/y.txt/phi.txt/mu.txt "
                      "(default: the output directory)");
    }
  };

  CLI::App* solve = app.add_subcommand(
      "solve", "compute a candidate optimal triplet and write it out");
  add_common(solve, false);
  CLI::App* kkt = app.add_subcommand(
      "check-kkt", "audit first-order conditions on a stored triplet");
  add_common(kkt, true);
  CLI::App* ssc = app.add_subcommand(
      "check-ssc", "probe the second-order condition on a stored triplet");
  add_common(ssc, true);
  CLI::App* grad = app.add_subcommand(
      "gradcheck", "compare adjoint gradients against central differences");
  add_common(grad, false);
  CLI::App* conv = app.add_subcommand(
      "convergence", "manufactured-solution refinement study");
  add_common(conv, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (solve->parsed()) return guarded([&] { return cmd_solve(args); });
  if (kkt->parsed()) return guarded([&] { return cmd_check_kkt(args); });
  if (ssc->parsed()) return guarded([&] { return cmd_check_ssc(args); });
  if (grad->parsed()) return guarded([&] { return cmd_gradcheck(args); });
  if (conv->parsed()) return guarded([&] { return cmd_convergence(args); });
  return 1;
}
