#pragma once

#include <vector>

#include "covpmp/cost.hpp"
#include "covpmp/dynamics.hpp"
#include "covpmp/models.hpp"

namespace covpmp::testing {

/// Node values of an oracle integration on the uniform grid.
struct OracleRun {
  std::vector<Vector> q, zeta, xi;
};

/// Quadratic cost only. Integrates the optimal force u (covariant, u = xi)
/// as a second-order ODE in coordinates: the covariant law
///   D2u = -R_zeta.u - nabla2V.u
/// is expanded into coordinate components through the second covariant
/// derivative formula, state (q, zeta, u, du/dt), RK4 with N steps.
OracleRun integrate_optimal_force(const MechanicalModel& model, const Vector& q0, const Vector& zeta0,
                                  const Vector& u0, const Vector& u0_dot, double T, int N);

/// Coordinate-form Pontryagin system for any cost kind: state (q, zeta),
/// multipliers (rho, xi) of dq/dt = zeta and dzeta/dt = a(q, zeta) + u,
///   drho_j/dt = dgamma/dq^j - xi_i d_j a^i
///   dxi_j/dt  = dgamma/dzeta^j - rho_j - xi_i da^i/dzeta^j
/// with dgamma/du = xi and the q-partials of a by central differences.
OracleRun integrate_coordinate_pmp(const MechanicalModel& model, const CostModel& cost, const Vector& q0,
                                   const Vector& zeta0, const Vector& xi0, const Vector& rho0, double T, int N);

/// Max over nodes of the largest component difference in q, zeta and xi.
double max_deviation(const OracleRun& oracle, const Trajectory& traj);

}  // namespace covpmp::testing
