#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covpmp/dynamics.hpp"

namespace covpmp {

enum class BoundaryCase {
  A,  ///< q0, zeta0 given; xi(T) = 0, pi(T) = 0
  B,  ///< q0, qT given; xi(0) = 0, xi(T) = 0
  C,  ///< q0, zeta0, qT, zetaT given
};

std::string to_string(BoundaryCase c);
std::optional<BoundaryCase> parse_boundary_case(const std::string& name);
const std::vector<std::string>& boundary_case_names();

struct BoundarySpec {
  BoundaryCase kind = BoundaryCase::A;
  Vector q0;
  Vector zeta0;  ///< cases A and C
  Vector qT;     ///< cases B and C
  Vector zetaT;  ///< case C
};

/// Throws Error when a field required by the case is missing or has the wrong size.
void validate(const BoundarySpec& bc, int n);

/// Initial phase and adjoint state built from the 2n shooting unknowns:
///   A, C: unknowns (xi0, pi0);  B: unknowns (zeta0, pi0) with xi0 = 0.
std::pair<PhaseState, AdjointState> initial_state(const BoundarySpec& bc, const Vector& unknowns);

/// Terminal residual of a coupled trajectory:
///   A: (xi(T), pi(T));  B: (q(T) - qT, xi(T));  C: (q(T) - qT, zeta(T) - zetaT).
Vector terminal_residual(const BoundarySpec& bc, const Trajectory& traj);

struct ShootOptions {
  double tol = 1e-9;
  int max_iter = 100;
  int max_halvings = 20;
  double fd_step = 1e-7;  ///< Jacobian column step is fd_step * (1 + |x_i|)
  Integrator integrator = Integrator::Rk4;
};

/// Residual for given unknowns; integrates coupled_field once.
Vector residual(const MechanicalModel& model, const CostModel& cost, const BoundarySpec& bc, const Vector& unknowns,
                double T, int N, Integrator method = Integrator::Rk4);

struct ShootReport {
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;  ///< max norm at the returned iterate
  Vector unknowns;
  Trajectory trajectory;
  double cost = 0.0;
  std::vector<double> newton_history;  ///< residual max norm before each iteration and at the end
  std::string message;
};

/// Single shooting with damped Newton on the 2n initial unknowns. On
/// non-convergence the report carries the best iterate. Integration
/// failure at a Newton base point throws IntegrationError naming the
/// Newton iteration and the integration step.
ShootReport shoot(const MechanicalModel& model, const CostModel& cost, const BoundarySpec& bc, double T, int N,
                  const ShootOptions& options = {}, const std::optional<Vector>& initial_guess = std::nullopt);

/// max over nodes of |dgamma/du(u(t)) - xi(t)|; needs adjoints.
double optimality_residual(const MechanicalModel& model, const CostModel& cost, const Trajectory& traj);

}  // namespace covpmp
