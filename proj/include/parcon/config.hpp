#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "parcon/conditions.hpp"
#include "parcon/errors.hpp"
#include "parcon/grid.hpp"
#include "parcon/optimizer.hpp"
#include "parcon/problem.hpp"

namespace parcon {

/// Settings for the second-order and first-order checkers, as read from the
/// conditions block of a run configuration.
struct ConditionsConfig {
  std::vector<double> tau_list{1e-3};
  int n_samples = 100;
  unsigned long seed = 1;
  int threads = 0;
  int max_attempt_factor = 100;
  ConditionTolerances tol;
  std::vector<double> growth_radii{1e-2, 1e-3};
  int growth_samples = 20;
};

/// Refinement ladder for the convergence command. Either a number of nested
/// halving levels starting from the grid block, or explicit per-level node
/// and step counts.
struct LadderConfig {
  int levels = 3;
  std::vector<int> level_nodes;
  std::vector<int> level_steps;
};

/// A fully materialized run: problem data with compiled coefficient
/// expressions, grids, solver and checker settings, and the resolved
/// configuration echoed as a JSON document for reproducible reports.
struct RunConfig {
  ProblemSpec spec;
  Grids grids;
  OptimizerOpts solver;
  ConditionsConfig conditions;
  LadderConfig ladder;
  std::filesystem::path output_dir = "out";
  bool break_adjoint = false;
  nlohmann::ordered_json resolved;
};

/// Parses and validates a configuration document. Unknown keys anywhere are
/// rejected; all problem/grid consistency failures surface as ConfigError
/// with the offending key path. `origin` names the source in messages.
RunConfig parse_config(const std::string& text, const std::string& origin);

/// Reads the file and forwards to parse_config. Throws IoError when the file
/// cannot be read.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace parcon
