#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "parcon/grid.hpp"

namespace parcon {

/// Constant symmetric diffusion matrix; a12 is ignored in one dimension.
struct DiffusionMatrix {
  double a11 = 1.0;
  double a12 = 0.0;
  double a22 = 1.0;

  static DiffusionMatrix isotropic(double a) { return {a, 0.0, a}; }

  /// Smallest eigenvalue (the ellipticity constant of the operator).
  double lambda_min(int dim) const;
};

/// Monotone reaction term f(x, t, y) with its first two state derivatives.
/// monotone_floor is the constant the state derivative is bounded below by.
struct Nonlinearity {
  std::function<double(const Point&, double, double)> value;
  std::function<double(const Point&, double, double)> dy;
  std::function<double(const Point&, double, double)> dyy;
  double monotone_floor = 0.0;
};

/// Named reaction families the toolkit ships with.
struct NonlinearityPreset {
  enum class Kind { Zero, LinearRate, CubicOdd, ExpWeighted };

  Kind kind = Kind::Zero;
  double coefficient = 0.0;                               // LinearRate slope / CubicOdd leading coefficient
  std::function<double(const Point&, double)> weight;     // ExpWeighted g(x,t) >= 0

  Nonlinearity make() const;
  static NonlinearityPreset zero();
  static NonlinearityPreset linear_rate(double c);
  static NonlinearityPreset cubic_odd(double c);
  static NonlinearityPreset exp_weighted(std::function<double(const Point&, double)> g);
};

/// Running cost integrand L(x, t, y) with its first two state derivatives.
struct RunningCost {
  std::function<double(const Point&, double, double)> value;
  std::function<double(const Point&, double, double)> dy;
  std::function<double(const Point&, double, double)> dyy;
};

RunningCost zero_cost();
/// weight/2 * (y - target(x,t))^2; a negative weight makes the problem concave
/// in the state (useful for exercising indefinite second-order reports).
RunningCost tracking_cost(std::function<double(const Point&, double)> target,
                          double weight = 1.0);

/// Pointwise ceiling on the state, one-sided or two-sided.
struct StateConstraint {
  enum class Mode { UpperOnly, Bilateral };

  Mode mode = Mode::UpperOnly;
  double gamma = 1.0;        // UpperOnly ceiling, must be > 0
  double gamma_min = -1.0;   // Bilateral floor, must be < 0
  double gamma_max = 1.0;    // Bilateral ceiling, must be > 0

  double upper() const { return mode == Mode::UpperOnly ? gamma : gamma_max; }
};

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Full data of one control problem instance. Coefficients are callbacks so a
/// single spec serves every refinement level; solvers sample them nodally.
struct ProblemSpec {
  int dim = 1;
  DiffusionMatrix diffusion;
  // Convection components b_x, b_y as functions of (point, time); empty means zero.
  std::array<std::function<double(const Point&, double)>, 2> convection{};
  Nonlinearity reaction;
  RunningCost cost;
  double tikhonov = 1.0;                 // control cost weight, must be > 0
  double control_lower = -kUnbounded;    // pointwise control bounds
  double control_upper = kUnbounded;
  StateConstraint state_bound;
  std::function<double(const Point&)> initial_state;   // strictly below the ceiling
  double exponent_p = 2.0;               // norm exponent for cone work

  double convection_at(int axis, const Point& p, double t) const {
    return convection[axis] ? convection[axis](p, t) : 0.0;
  }
  bool has_convection() const {
    return static_cast<bool>(convection[0]) || static_cast<bool>(convection[1]);
  }
};

/// Checks the standing assumptions on (spec, grids); returns one message per
/// violation, empty when admissible for solving. Pure: no side effects, stable
/// under repetition.
std::vector<std::string> validate(const ProblemSpec& spec, const Grids& grids);

/// Pointwise admissibility of a control/state pair within tol: control bounds
/// at every level, state ceiling (and floor, bilateral) at every level.
bool admissible(const ProblemSpec& spec, const Grids& grids, const GridFunction& u,
                const GridFunction& y, double tol);

/// clamp(w, lower, upper) nodally; infinite bounds pass values through.
void project_control(const ProblemSpec& spec, GridFunction& w);
GridFunction projected_copy(const ProblemSpec& spec, const GridFunction& w);

}  // namespace parcon
