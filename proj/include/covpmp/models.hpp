#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "covpmp/geometry.hpp"

namespace covpmp {

using ParamMap = std::map<std::string, double>;

/// A mechanical system: configuration-space metric from the mass matrix plus
/// a potential energy. Immutable after construction.
struct MechanicalModel {
  std::string name;
  int dim = 0;
  MetricProvider metric;
  PotentialProvider potential;
  ParamMap params;
  std::string domain_note;
  /// Axis-aligned box used for sampling test configurations.
  Vector domain_lower;
  Vector domain_upper;
  /// Not a physical system (the sphere metric).
  bool test_only = false;
};

struct ParamSpec {
  std::string name;
  double default_value = 0.0;
  std::string description;
  bool positive = false;  ///< must be > 0
  bool integer = false;
};

struct ModelSpec {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;
};

/// Built-in catalog in stable order: flat, pendulum, double_pendulum, sphere.
const std::vector<ModelSpec>& list_models();

/// Builds a catalog model. Missing parameters take their catalog default;
/// unknown names, unknown parameters and invalid values throw ModelError.
/// The returned model has passed its construction checks (SPD grid and
/// analytic-vs-finite-difference agreement).
MechanicalModel build_model(const std::string& name, const ParamMap& params = {});

/// Uniform sample from the model's domain box.
Vector sample_configuration(const MechanicalModel& model, std::mt19937_64& rng);

}  // namespace covpmp
