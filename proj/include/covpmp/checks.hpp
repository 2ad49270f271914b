#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covpmp/cost.hpp"
#include "covpmp/models.hpp"

namespace covpmp {

/// One measured invariant: worst value over the sample and its bound.
struct CheckItem {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct CheckReport {
  std::vector<CheckItem> items;
  bool passed() const;
};

/// Geometry invariants at `points` seeded random configurations of the
/// model's domain box: connection symmetry, metric inverse, Riemann
/// antisymmetry, Ricci identities (provider path and a pure
/// finite-difference path with step 1e-5), analytic-vs-FD dM, covariant
/// Hessian symmetry; plus exact vanishing for constant metrics and the
/// sectional curvature for the sphere.
CheckReport run_geometry_checks(const MechanicalModel& model, int points = 100, std::uint64_t seed = 20240611);

/// Cost partials against central differences of gamma, relative 1e-6, the
/// inversion round trip and the vanishing covariant
/// q-gradient.
CheckReport run_cost_checks(const MechanicalModel& model, const CostModel& cost, int points = 50,
                            std::uint64_t seed = 20240612);

}  // namespace covpmp
