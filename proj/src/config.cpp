#include "parcon/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "parcon/expression.hpp"

namespace parcon {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail(where, "unknown key \"" + it.key() + "\"");
    }
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& where, const char* key,
                  double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) fail(where + "." + key, "expected a number");
  return v->get<double>();
}

int get_int(const json& obj, const std::string& where, const char* key,
            int fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) fail(where + "." + key, "expected an integer");
  return v->get<int>();
}

bool get_bool(const json& obj, const std::string& where, const char* key,
              bool fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(where + "." + key, "expected true or false");
  return v->get<bool>();
}

std::string get_string(const json& obj, const std::string& where,
                       const char* key, const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) fail(where + "." + key, "expected a string");
  return v->get<std::string>();
}

/// Bounds accept numbers or the strings "inf" / "+inf" / "-inf".
double get_extended(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kUnbounded;
    if (s == "-inf") return -kUnbounded;
  }
  fail(where, "expected a number or \"inf\"/\"-inf\"");
}

json extended_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

Expression parse_expr(const std::string& text, const std::string& where) {
  try {
    return Expression::parse(text);
  } catch (const ConfigError& e) {
    fail(where, e.what());
  }
}

std::vector<double> get_number_list(const json& obj, const std::string& where,
                                    const char* key,
                                    std::vector<double> fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  std::vector<double> out;
  if (v->is_number()) {
    out.push_back(v->get<double>());
    return out;
  }
  if (!v->is_array() || v->empty()) {
    fail(where + "." + key, "expected a number or a non-empty array");
  }
  for (const json& e : *v) {
    if (!e.is_number()) fail(where + "." + key, "expected numeric entries");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> get_int_list(const json& obj, const std::string& where,
                              const char* key) {
  const json* v = find(obj, key);
  if (!v) return {};
  std::vector<int> out;
  if (v->is_number_integer()) {
    out.push_back(v->get<int>());
    return out;
  }
  if (!v->is_array() || v->empty()) {
    fail(where + "." + key, "expected an integer or a non-empty array");
  }
  for (const json& e : *v) {
    if (!e.is_number_integer()) fail(where + "." + key, "expected integer entries");
    out.push_back(e.get<int>());
  }
  return out;
}

struct ProblemBuild {
  json resolved;
};

ProblemBuild read_problem(const json& root, int dim, ProblemSpec& spec) {
  ProblemBuild out;
  json& r = out.resolved;
  const json empty = json::object();
  const json* blockp = find(root, "problem");
  if (blockp && !blockp->is_object()) fail("problem", "expected an object");
  const json& block = blockp ? *blockp : empty;
  const std::string where = "problem";
  check_keys(block, where,
             {"diffusion", "convection", "reaction", "cost", "tikhonov",
              "control_lower", "control_upper", "gamma", "gamma_min",
              "gamma_max", "initial_state", "exponent_p"});

  spec.dim = dim;

  // Diffusion: isotropic scalar or the full symmetric 2x2 block.
  if (const json* d = find(block, "diffusion")) {
    if (d->is_number()) {
      spec.diffusion = DiffusionMatrix::isotropic(d->get<double>());
    } else if (d->is_object()) {
      check_keys(*d, where + ".diffusion", {"a11", "a12", "a22"});
      spec.diffusion.a11 = get_number(*d, where + ".diffusion", "a11", 1.0);
      spec.diffusion.a12 = get_number(*d, where + ".diffusion", "a12", 0.0);
      spec.diffusion.a22 = get_number(*d, where + ".diffusion", "a22", 1.0);
    } else {
      fail(where + ".diffusion", "expected a number or an object");
    }
  }
  r["diffusion"] = {{"a11", spec.diffusion.a11},
                    {"a12", spec.diffusion.a12},
                    {"a22", spec.diffusion.a22}};

  if (const json* c = find(block, "convection")) {
    if (!c->is_object()) fail(where + ".convection", "expected an object");
    check_keys(*c, where + ".convection", {"bx", "by"});
    json rc = json::object();
    if (const json* bx = find(*c, "bx")) {
      if (!bx->is_string()) fail(where + ".convection.bx", "expected an expression string");
      Expression e = parse_expr(bx->get<std::string>(), where + ".convection.bx");
      spec.convection[0] = [e](const Point& p, double t) { return e(p.x, p.y, t); };
      rc["bx"] = e.text();
    }
    if (const json* by = find(*c, "by")) {
      if (dim == 1) fail(where + ".convection.by", "not available in dimension 1");
      if (!by->is_string()) fail(where + ".convection.by", "expected an expression string");
      Expression e = parse_expr(by->get<std::string>(), where + ".convection.by");
      spec.convection[1] = [e](const Point& p, double t) { return e(p.x, p.y, t); };
      rc["by"] = e.text();
    }
    r["convection"] = rc;
  }

  // Reaction preset.
  {
    const json* rx = find(block, "reaction");
    if (rx && !rx->is_object()) fail(where + ".reaction", "expected an object");
    const json& rb = rx ? *rx : empty;
    check_keys(rb, where + ".reaction", {"preset", "coefficient", "weight"});
    const std::string preset = get_string(rb, where + ".reaction", "preset", "zero");
    NonlinearityPreset np;
    json rr = {{"preset", preset}};
    auto need_coeff = [&]() {
      const json* cv = find(rb, "coefficient");
      if (!cv || !cv->is_number())
        fail(where + ".reaction.coefficient", "this preset needs a numeric coefficient");
      return cv->get<double>();
    };
    if (preset == "zero") {
      if (find(rb, "coefficient") || find(rb, "weight"))
        fail(where + ".reaction", "the zero preset takes no parameters");
      np = NonlinearityPreset::zero();
    } else if (preset == "linear_rate") {
      if (find(rb, "weight")) fail(where + ".reaction", "linear_rate takes no weight");
      const double c = need_coeff();
      np = NonlinearityPreset::linear_rate(c);
      rr["coefficient"] = c;
    } else if (preset == "cubic_odd") {
      if (find(rb, "weight")) fail(where + ".reaction", "cubic_odd takes no weight");
      const double c = need_coeff();
      np = NonlinearityPreset::cubic_odd(c);
      rr["coefficient"] = c;
    } else if (preset == "exp_weighted") {
      if (find(rb, "coefficient")) fail(where + ".reaction", "exp_weighted takes no coefficient");
      const json* wv = find(rb, "weight");
      if (!wv || !wv->is_string())
        fail(where + ".reaction.weight", "exp_weighted needs a weight expression string");
      Expression e = parse_expr(wv->get<std::string>(), where + ".reaction.weight");
      np = NonlinearityPreset::exp_weighted(
          [e](const Point& p, double t) { return e(p.x, p.y, t); });
      rr["weight"] = e.text();
    } else {
      fail(where + ".reaction.preset",
           "unknown preset \"" + preset +
               "\" (use zero, linear_rate, cubic_odd, exp_weighted)");
    }
    spec.reaction = np.make();
    r["reaction"] = rr;
  }

  // Running cost: tracking toward a target expression, or zero when absent.
  {
    const json* cb = find(block, "cost");
    if (cb && !cb->is_object()) fail(where + ".cost", "expected an object");
    if (!cb) {
      spec.cost = zero_cost();
      r["cost"] = {{"preset", "zero"}};
    } else {
      check_keys(*cb, where + ".cost", {"target", "weight"});
      const std::string target = get_string(*cb, where + ".cost", "target", "0");
      const double weight = get_number(*cb, where + ".cost", "weight", 1.0);
      Expression e = parse_expr(target, where + ".cost.target");
      spec.cost = tracking_cost(
          [e](const Point& p, double t) { return e(p.x, p.y, t); }, weight);
      r["cost"] = {{"target", e.text()}, {"weight", weight}};
    }
  }

  spec.tikhonov = get_number(block, where, "tikhonov", 1.0);
  r["tikhonov"] = spec.tikhonov;

  if (const json* v = find(block, "control_lower"))
    spec.control_lower = get_extended(*v, where + ".control_lower");
  if (const json* v = find(block, "control_upper"))
    spec.control_upper = get_extended(*v, where + ".control_upper");
  r["control_lower"] = extended_to_json(spec.control_lower);
  r["control_upper"] = extended_to_json(spec.control_upper);

  // State bound: one-sided ceiling via gamma, two-sided via gamma_min/max,
  // unconstrained when all three are absent.
  {
    const bool has_g = find(block, "gamma") != nullptr;
    const bool has_lo = find(block, "gamma_min") != nullptr;
    const bool has_hi = find(block, "gamma_max") != nullptr;
    if (has_g && (has_lo || has_hi))
      fail(where, "give either gamma or the gamma_min/gamma_max pair, not both");
    if (has_lo != has_hi)
      fail(where, "gamma_min and gamma_max must be given together");
    if (has_g) {
      spec.state_bound.mode = StateConstraint::Mode::UpperOnly;
      spec.state_bound.gamma = get_extended(*find(block, "gamma"), where + ".gamma");
      r["gamma"] = extended_to_json(spec.state_bound.gamma);
    } else if (has_lo) {
      spec.state_bound.mode = StateConstraint::Mode::Bilateral;
      spec.state_bound.gamma_min = get_number(block, where, "gamma_min", -1.0);
      spec.state_bound.gamma_max = get_number(block, where, "gamma_max", 1.0);
      r["gamma_min"] = spec.state_bound.gamma_min;
      r["gamma_max"] = spec.state_bound.gamma_max;
    } else {
      spec.state_bound.mode = StateConstraint::Mode::UpperOnly;
      spec.state_bound.gamma = kUnbounded;
      r["gamma"] = extended_to_json(spec.state_bound.gamma);
    }
  }

  {
    const std::string y0 = get_string(block, where, "initial_state", "0");
    Expression e = parse_expr(y0, where + ".initial_state");
    spec.initial_state = [e](const Point& p) { return e(p.x, p.y, 0.0); };
    r["initial_state"] = e.text();
  }

  spec.exponent_p =
      get_number(block, where, "exponent_p", dim == 1 ? 2.0 : 3.0);
  r["exponent_p"] = spec.exponent_p;

  return out;
}

json read_grid(const json& root, Grids& grids, LadderConfig& ladder, int& dim) {
  const json* blockp = find(root, "grid");
  if (!blockp || !blockp->is_object())
    fail("grid", "a grid object with nodes and steps is required");
  const json& block = *blockp;
  const std::string where = "grid";
  check_keys(block, where,
             {"dim", "nodes", "steps", "horizon", "lengths", "levels",
              "level_nodes", "level_steps"});

  dim = get_int(block, where, "dim", 1);
  if (dim != 1 && dim != 2) fail(where + ".dim", "must be 1 or 2");

  std::vector<int> nodes = get_int_list(block, where, "nodes");
  if (nodes.empty()) fail(where + ".nodes", "node counts are required");
  if (nodes.size() == 1 && dim == 2) nodes.push_back(nodes[0]);
  if (static_cast<int>(nodes.size()) != dim)
    fail(where + ".nodes", "expected one count per axis");
  for (int n : nodes)
    if (n < 3) fail(where + ".nodes", "at least 3 nodes per axis");

  std::vector<double> lengths =
      get_number_list(block, where, "lengths", std::vector<double>(dim, 1.0));
  if (lengths.size() == 1 && dim == 2) lengths.push_back(lengths[0]);
  if (static_cast<int>(lengths.size()) != dim)
    fail(where + ".lengths", "expected one length per axis");
  for (double l : lengths)
    if (!(l > 0.0)) fail(where + ".lengths", "lengths must be positive");

  const int steps = get_int(block, where, "steps", 0);
  if (steps < 1) fail(where + ".steps", "a positive step count is required");
  const double horizon = get_number(block, where, "horizon", 1.0);
  if (!(horizon > 0.0)) fail(where + ".horizon", "horizon must be positive");

  grids.space = dim == 1 ? SpatialGrid::interval(nodes[0], lengths[0])
                         : SpatialGrid::rectangle(nodes[0], nodes[1],
                                                  lengths[0], lengths[1]);
  grids.time = TimeGrid{horizon, steps};

  ladder.levels = get_int(block, where, "levels", 3);
  if (ladder.levels < 1) fail(where + ".levels", "at least one level");
  ladder.level_nodes = get_int_list(block, where, "level_nodes");
  ladder.level_steps = get_int_list(block, where, "level_steps");
  if (ladder.level_nodes.size() != ladder.level_steps.size())
    fail(where, "level_nodes and level_steps must have equal length");

  json r;
  r["dim"] = dim;
  r["nodes"] = nodes;
  r["steps"] = steps;
  r["horizon"] = horizon;
  r["lengths"] = lengths;
  r["levels"] = ladder.levels;
  if (!ladder.level_nodes.empty()) {
    r["level_nodes"] = ladder.level_nodes;
    r["level_steps"] = ladder.level_steps;
  }
  return r;
}

json read_solver(const json& root, OptimizerOpts& o) {
  const json empty = json::object();
  const json* blockp = find(root, "solver");
  if (blockp && !blockp->is_object()) fail("solver", "expected an object");
  const json& block = blockp ? *blockp : empty;
  const std::string where = "solver";
  check_keys(block, where,
             {"lambda0", "sigma", "max_stages", "inner_tol", "max_inner",
              "feasibility_tol", "armijo_c", "max_backtracks", "newton_tol",
              "max_newton", "max_halvings", "linear_tol",
              "max_linear_iterations", "warn_peclet"});

  o.lambda0 = get_number(block, where, "lambda0", o.lambda0);
  o.sigma = get_number(block, where, "sigma", o.sigma);
  o.max_stages = get_int(block, where, "max_stages", o.max_stages);
  o.inner_tol = get_number(block, where, "inner_tol", o.inner_tol);
  o.max_inner = get_int(block, where, "max_inner", o.max_inner);
  o.feasibility_tol = get_number(block, where, "feasibility_tol", o.feasibility_tol);
  o.armijo_c = get_number(block, where, "armijo_c", o.armijo_c);
  o.max_backtracks = get_int(block, where, "max_backtracks", o.max_backtracks);
  o.pde.newton_tol = get_number(block, where, "newton_tol", o.pde.newton_tol);
  o.pde.max_newton = get_int(block, where, "max_newton", o.pde.max_newton);
  o.pde.max_halvings = get_int(block, where, "max_halvings", o.pde.max_halvings);
  o.pde.linear_tol = get_number(block, where, "linear_tol", o.pde.linear_tol);
  o.pde.max_linear_iterations =
      get_int(block, where, "max_linear_iterations", o.pde.max_linear_iterations);
  o.pde.warn_peclet = get_bool(block, where, "warn_peclet", o.pde.warn_peclet);

  if (!(o.lambda0 > 0.0)) fail(where + ".lambda0", "must be positive");
  if (!(o.sigma > 1.0)) fail(where + ".sigma", "must exceed 1");
  if (o.max_stages < 0) fail(where + ".max_stages", "must be nonnegative");

  json r;
  r["lambda0"] = o.lambda0;
  r["sigma"] = o.sigma;
  r["max_stages"] = o.max_stages;
  r["inner_tol"] = o.inner_tol;
  r["max_inner"] = o.max_inner;
  r["feasibility_tol"] = o.feasibility_tol;
  r["armijo_c"] = o.armijo_c;
  r["max_backtracks"] = o.max_backtracks;
  r["newton_tol"] = o.pde.newton_tol;
  r["max_newton"] = o.pde.max_newton;
  r["max_halvings"] = o.pde.max_halvings;
  r["linear_tol"] = o.pde.linear_tol;
  r["max_linear_iterations"] = o.pde.max_linear_iterations;
  r["warn_peclet"] = o.pde.warn_peclet;
  return r;
}

json read_conditions(const json& root, ConditionsConfig& c) {
  const json empty = json::object();
  const json* blockp = find(root, "conditions");
  if (blockp && !blockp->is_object()) fail("conditions", "expected an object");
  const json& block = blockp ? *blockp : empty;
  const std::string where = "conditions";
  check_keys(block, where,
             {"tau", "n_samples", "seed", "threads", "max_attempt_factor",
              "eps_act", "state_tol", "adjoint_tol", "stationarity_tol",
              "feasibility_tol", "support_share", "sign_share",
              "growth_radii", "growth_samples"});

  c.tau_list = get_number_list(block, where, "tau", c.tau_list);
  for (double t : c.tau_list)
    if (t < 0.0) fail(where + ".tau", "cone thresholds must be nonnegative");
  c.n_samples = get_int(block, where, "n_samples", c.n_samples);
  if (c.n_samples < 1) fail(where + ".n_samples", "must be positive");
  {
    const json* v = find(block, "seed");
    if (v) {
      if (!v->is_number_integer() || v->get<long long>() < 0)
        fail(where + ".seed", "expected a nonnegative integer");
      c.seed = v->get<unsigned long>();
    }
  }
  c.threads = get_int(block, where, "threads", c.threads);
  c.max_attempt_factor = get_int(block, where, "max_attempt_factor", c.max_attempt_factor);
  if (c.max_attempt_factor < 1) fail(where + ".max_attempt_factor", "must be positive");

  c.tol.eps_act = get_number(block, where, "eps_act", c.tol.eps_act);
  c.tol.state_tol = get_number(block, where, "state_tol", c.tol.state_tol);
  c.tol.adjoint_tol = get_number(block, where, "adjoint_tol", c.tol.adjoint_tol);
  c.tol.stationarity_tol =
      get_number(block, where, "stationarity_tol", c.tol.stationarity_tol);
  c.tol.feasibility_tol =
      get_number(block, where, "feasibility_tol", c.tol.feasibility_tol);
  c.tol.support_share = get_number(block, where, "support_share", c.tol.support_share);
  c.tol.sign_share = get_number(block, where, "sign_share", c.tol.sign_share);

  c.growth_radii = get_number_list(block, where, "growth_radii", c.growth_radii);
  for (double rr : c.growth_radii)
    if (!(rr > 0.0)) fail(where + ".growth_radii", "radii must be positive");
  c.growth_samples = get_int(block, where, "growth_samples", c.growth_samples);
  if (c.growth_samples < 1) fail(where + ".growth_samples", "must be positive");

  json r;
  r["tau"] = c.tau_list;
  r["n_samples"] = c.n_samples;
  r["seed"] = c.seed;
  r["threads"] = c.threads;
  r["max_attempt_factor"] = c.max_attempt_factor;
  r["eps_act"] = c.tol.eps_act;
  r["state_tol"] = c.tol.state_tol;
  r["adjoint_tol"] = c.tol.adjoint_tol;
  r["stationarity_tol"] = c.tol.stationarity_tol;
  r["feasibility_tol"] = c.tol.feasibility_tol;
  r["support_share"] = c.tol.support_share;
  r["sign_share"] = c.tol.sign_share;
  r["growth_radii"] = c.growth_radii;
  r["growth_samples"] = c.growth_samples;
  return r;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError(origin + ": top level must be an object");
  }
  check_keys(root, "config",
             {"problem", "grid", "solver", "conditions", "output", "debug"});

  RunConfig cfg;
  int dim = 1;
  json grid_resolved = read_grid(root, cfg.grids, cfg.ladder, dim);
  ProblemBuild pb = read_problem(root, dim, cfg.spec);
  json solver_resolved = read_solver(root, cfg.solver);
  json cond_resolved = read_conditions(root, cfg.conditions);

  json output_resolved;
  {
    const json empty = json::object();
    const json* blockp = find(root, "output");
    if (blockp && !blockp->is_object()) fail("output", "expected an object");
    const json& block = blockp ? *blockp : empty;
    check_keys(block, "output", {"directory", "formats"});
    cfg.output_dir = get_string(block, "output", "directory", "out");
    if (const json* fmts = find(block, "formats")) {
      if (!fmts->is_array()) fail("output.formats", "expected an array");
      for (const json& f : *fmts) {
        if (!f.is_string() || f.get<std::string>() != "text")
          fail("output.formats", "only \"text\" is available");
      }
    }
    output_resolved["directory"] = cfg.output_dir.string();
    output_resolved["formats"] = json::array({"text"});
  }

  json debug_resolved;
  {
    const json empty = json::object();
    const json* blockp = find(root, "debug");
    if (blockp && !blockp->is_object()) fail("debug", "expected an object");
    const json& block = blockp ? *blockp : empty;
    check_keys(block, "debug", {"break_adjoint"});
    cfg.break_adjoint = get_bool(block, "debug", "break_adjoint", false);
    debug_resolved["break_adjoint"] = cfg.break_adjoint;
  }

  const std::vector<std::string> problems = validate(cfg.spec, cfg.grids);
  if (!problems.empty()) {
    std::ostringstream ss;
    ss << origin << ": invalid problem/grid combination:";
    for (const std::string& m : problems) ss << "\n  - " << m;
    throw ConfigError(ss.str());
  }

  cfg.resolved = json::object();
  cfg.resolved["problem"] = pb.resolved;
  cfg.resolved["grid"] = grid_resolved;
  cfg.resolved["solver"] = solver_resolved;
  cfg.resolved["conditions"] = cond_resolved;
  cfg.resolved["output"] = output_resolved;
  cfg.resolved["debug"] = debug_resolved;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read config file: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace parcon
