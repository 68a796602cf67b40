#pragma once

#include <stdexcept>
#include <string>

namespace parcon {

/// Shape of a field does not match the grids it is paired with.
class DimensionMismatch : public std::invalid_argument {
public:
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// Newton failed to reduce the step residual within the damping budget.
class NewtonDiverged : public std::runtime_error {
public:
  NewtonDiverged(int time_step, double residual, const std::string& what)
      : std::runtime_error(what), time_step(time_step), residual(residual) {}
  int time_step;
  double residual;
};

/// Inner linear solve failed (singular or too ill-conditioned step matrix),
/// or the step-size guard rejected dt against the monotonicity floor.
class LinearSolveFailure : public std::runtime_error {
public:
  explicit LinearSolveFailure(const std::string& what) : std::runtime_error(what) {}
};

/// A measure declared nonnegative carries a negative mass.
class SignViolation : public std::runtime_error {
public:
  explicit SignViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Armijo backtracking exhausted its halving budget without acceptable decrease.
class LineSearchFailure : public std::runtime_error {
public:
  explicit LineSearchFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Penalty path stopped making feasibility progress before reaching tolerance.
class PathStalled : public std::runtime_error {
public:
  explicit PathStalled(const std::string& what) : std::runtime_error(what) {}
};

/// Cone sampling accepted nothing within the attempt budget.
class EmptySample : public std::runtime_error {
public:
  explicit EmptySample(const std::string& what) : std::runtime_error(what) {}
};

/// Bad run configuration (unknown key, missing field, malformed value).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem problem while reading or writing run artifacts.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace parcon
