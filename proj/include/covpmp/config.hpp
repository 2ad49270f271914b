#pragma once

#include <optional>
#include <string>

#include "covpmp/bvp.hpp"
#include "covpmp/direct.hpp"

namespace covpmp {

struct ModelConfig {
  std::string name;
  ParamMap params;  ///< as given; catalog defaults fill the rest at build time
};

struct SolverConfig {
  double tol = 1e-9;
  int max_iter = 100;
  Integrator integrator = Integrator::Rk4;
  double fd_step = 1e-7;  ///< shooting Jacobian step scale
  std::optional<Vector> initial_guess;
};

struct DirectConfig {
  int N = 0;  ///< 0 means steps_N
  double penalty_weight = 1e6;
  long max_evals = 4'000'000;
  int max_iter = 1000;
  ControlInterpolation interpolation = ControlInterpolation::Linear;
};

struct OutputConfig {
  std::string trajectory_path = "trajectory.csv";
  std::string report_path = "report.json";
};

/// One scenario file. Relative output paths are taken relative to the
/// working directory of the process.
struct ScenarioConfig {
  ModelConfig model;
  CostModel cost;
  double horizon_T = 1.0;
  int steps_N = 100;
  BoundarySpec boundary;
  SolverConfig solver;
  Vector control;  ///< constant contravariant u for `simulate`; empty means zero
  DirectConfig direct;
  OutputConfig output;

  int direct_steps() const { return direct.N > 0 ? direct.N : steps_N; }
};

/// Parses and validates a JSON scenario. Unknown keys, type mismatches and
/// invalid values are all collected; throws ConfigError listing every
/// problem with its key path.
ScenarioConfig parse_config(const std::string& text);

/// Reads and parses a file; I/O failures throw ConfigError naming the path.
ScenarioConfig load_config(const std::string& path);

/// Canonical JSON with every field written out (defaults included).
std::string serialize_config(const ScenarioConfig& config);

MechanicalModel build_model(const ScenarioConfig& config);

}  // namespace covpmp
