#include "parcon/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace parcon {

double DiffusionMatrix::lambda_min(int dim) const {
  if (dim == 1) return a11;
  const double tr = a11 + a22;
  const double det = a11 * a22 - a12 * a12;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  return tr / 2.0 - disc;
}

Nonlinearity NonlinearityPreset::make() const {
  Nonlinearity f;
  switch (kind) {
    case Kind::Zero:
      f.value = [](const Point&, double, double) { return 0.0; };
      f.dy = [](const Point&, double, double) { return 0.0; };
      f.dyy = [](const Point&, double, double) { return 0.0; };
      f.monotone_floor = 0.0;
      break;
    case Kind::LinearRate: {
      const double c = coefficient;
      f.value = [c](const Point&, double, double y) { return c * y; };
      f.dy = [c](const Point&, double, double) { return c; };
      f.dyy = [](const Point&, double, double) { return 0.0; };
      f.monotone_floor = c;
      break;
    }
    case Kind::CubicOdd: {
      const double c = coefficient;
      f.value = [c](const Point&, double, double y) { return c * y * y * y; };
      f.dy = [c](const Point&, double, double y) { return 3.0 * c * y * y; };
      f.dyy = [c](const Point&, double, double y) { return 6.0 * c * y; };
      f.monotone_floor = 0.0;
      break;
    }
    case Kind::ExpWeighted: {
      auto g = weight;
      f.value = [g](const Point& p, double t, double y) { return g(p, t) * std::exp(y); };
      f.dy = [g](const Point& p, double t, double y) { return g(p, t) * std::exp(y); };
      f.dyy = [g](const Point& p, double t, double y) { return g(p, t) * std::exp(y); };
      f.monotone_floor = 0.0;
      break;
    }
  }
  return f;
}

NonlinearityPreset NonlinearityPreset::zero() { return {Kind::Zero, 0.0, nullptr}; }

NonlinearityPreset NonlinearityPreset::linear_rate(double c) {
  return {Kind::LinearRate, c, nullptr};
}

NonlinearityPreset NonlinearityPreset::cubic_odd(double c) {
  return {Kind::CubicOdd, c, nullptr};
}

NonlinearityPreset NonlinearityPreset::exp_weighted(
    std::function<double(const Point&, double)> g) {
  return {Kind::ExpWeighted, 0.0, std::move(g)};
}

RunningCost zero_cost() {
  RunningCost c;
  c.value = [](const Point&, double, double) { return 0.0; };
  c.dy = [](const Point&, double, double) { return 0.0; };
  c.dyy = [](const Point&, double, double) { return 0.0; };
  return c;
}

RunningCost tracking_cost(std::function<double(const Point&, double)> target, double weight) {
  RunningCost c;
  auto yd = std::move(target);
  c.value = [yd, weight](const Point& p, double t, double y) {
    const double d = y - yd(p, t);
    return 0.5 * weight * d * d;
  };
  c.dy = [yd, weight](const Point& p, double t, double y) { return weight * (y - yd(p, t)); };
  c.dyy = [weight](const Point&, double, double) { return weight; };
  return c;
}

namespace {

// Spot-check lattice for the sampled assumption checks.
constexpr int kLatticeSpace = 5;
constexpr int kLatticeTime = 5;
constexpr int kLatticeState = 9;
constexpr double kStateRange = 4.0;

template <typename Fn>
bool sampled_violation(const ProblemSpec& spec, const Grids& grids, Fn&& check) {
  for (int sx = 0; sx < kLatticeSpace; ++sx) {
    for (int sy = 0; sy < (spec.dim == 2 ? kLatticeSpace : 1); ++sy) {
      Point p;
      p.x = grids.space.extent[0] * (sx + 1) / (kLatticeSpace + 1);
      p.y = spec.dim == 2 ? grids.space.extent[1] * (sy + 1) / (kLatticeSpace + 1) : 0.0;
      for (int st = 0; st <= kLatticeTime; ++st) {
        const double t = grids.time.horizon * st / kLatticeTime;
        for (int sv = 0; sv < kLatticeState; ++sv) {
          const double y = -kStateRange + 2.0 * kStateRange * sv / (kLatticeState - 1);
          if (check(p, t, y)) return true;
        }
      }
    }
  }
  return false;
}

}  // namespace

std::vector<std::string> validate(const ProblemSpec& spec, const Grids& grids) {
  std::vector<std::string> out;
  auto flag = [&out](const std::string& m) { out.push_back(m); };

  if (spec.dim != 1 && spec.dim != 2)
    flag("dimension must be 1 or 2 (three-dimensional runs are not offered)");
  if (spec.dim != grids.space.dim)
    flag("spec dimension does not match the spatial grid");
  if (grids.time.steps < 1 || grids.time.horizon <= 0.0)
    flag("time grid needs steps >= 1 and a positive horizon");

  const double lam = spec.diffusion.lambda_min(spec.dim);
  if (!(lam > 0.0)) {
    std::ostringstream ss;
    ss << "ellipticity violated: smallest diffusion eigenvalue " << lam << " is not positive";
    flag(ss.str());
  }

  if (!(spec.tikhonov > 0.0)) flag("control cost weight must be positive");

  if (!(spec.control_lower < spec.control_upper))
    flag("control bounds must satisfy lower < upper");
  if (spec.dim >= 2 &&
      (std::isinf(spec.control_lower) || std::isinf(spec.control_upper)))
    flag("finite control bounds are required in dimension 2");

  const double p_floor = 1.0 + spec.dim / 2.0;
  if (spec.dim == 1) {
    if (!(spec.exponent_p >= 2.0)) flag("norm exponent must be >= 2 in dimension 1");
  } else if (!(spec.exponent_p > p_floor)) {
    std::ostringstream ss;
    ss << "norm exponent must exceed " << p_floor << " in dimension " << spec.dim;
    flag(ss.str());
  }

  if (spec.state_bound.mode == StateConstraint::Mode::UpperOnly) {
    if (!(spec.state_bound.gamma > 0.0)) flag("state ceiling must be positive");
  } else {
    if (!(spec.state_bound.gamma_min < 0.0 && spec.state_bound.gamma_max > 0.0))
      flag("bilateral state bounds must straddle zero");
  }

  if (!spec.reaction.value || !spec.reaction.dy || !spec.reaction.dyy)
    flag("reaction term callbacks are incomplete");
  if (!spec.cost.value || !spec.cost.dy || !spec.cost.dyy)
    flag("running cost callbacks are incomplete");

  if (!spec.initial_state) {
    flag("initial state callback is missing");
  } else if (spec.dim == grids.space.dim && (spec.dim == 1 || spec.dim == 2)) {
    const int ni = grids.space.interior_count();
    for (int i = 0; i < ni; ++i) {
      const Point p = grids.space.point(i);
      const double y0 = spec.initial_state(p);
      bool ok = true;
      if (spec.state_bound.mode == StateConstraint::Mode::UpperOnly) {
        ok = y0 < spec.state_bound.gamma;
      } else {
        ok = y0 < spec.state_bound.gamma_max && y0 > spec.state_bound.gamma_min;
      }
      if (!ok) {
        std::ostringstream ss;
        ss << "initial state is not strictly inside the state bounds at node " << i;
        flag(ss.str());
        break;
      }
    }
  }

  if (spec.reaction.dy && spec.dim == grids.space.dim) {
    const double floor = spec.reaction.monotone_floor;
    if (sampled_violation(spec, grids, [&](const Point& p, double t, double y) {
          return spec.reaction.dy(p, t, y) < floor - 1e-12;
        })) {
      flag("sampled reaction derivative drops below its declared monotone floor");
    }
  }

  return out;
}

bool admissible(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
                const GridFunction& y, double tol) {
  if (!u.matches(grids) || !y.matches(grids))
    throw DimensionMismatch("admissible: field shapes do not match grids");
  for (double v : u.data()) {
    if (v < spec.control_lower - tol || v > spec.control_upper + tol) return false;
  }
  const auto& sb = spec.state_bound;
  for (double v : y.data()) {
    if (sb.mode == StateConstraint::Mode::UpperOnly) {
      if (v > sb.gamma + tol) return false;
    } else {
      if (v > sb.gamma_max + tol || v < sb.gamma_min - tol) return false;
    }
  }
  return true;
}

void project_control(const ProblemSpec& spec, GridFunction& w) {
  const double lo = spec.control_lower;
  const double hi = spec.control_upper;
  for (double& v : w.data()) v = std::min(hi, std::max(lo, v));
}

GridFunction projected_copy(const ProblemSpec& spec, const GridFunction& w) {
  GridFunction out = w;
  project_control(spec, out);
  return out;
}

}  // namespace parcon
