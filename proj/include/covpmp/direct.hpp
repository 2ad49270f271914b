#pragma once

#include <vector>

#include "covpmp/bvp.hpp"

namespace covpmp {

/// How RK4 half-step stages see the control between nodes.
enum class ControlInterpolation {
  Linear,  ///< average of the two neighbouring nodes
  Cubic,   ///< four-point Lagrange midpoint value, one-sided at the ends
};

std::string to_string(ControlInterpolation c);
std::optional<ControlInterpolation> parse_control_interpolation(const std::string& name);

/// Direct transcription: controls at the N + 1 grid nodes, interpolated in
/// between, forward dynamics by RK4, cost by the trapezoid rule plus a
/// quadratic terminal penalty (cases B and C).
///
/// In case B the initial velocity is free, so zeta0 is an extra decision
/// variable; `zeta0` holds its current value (initialized from the boundary
/// spec, or zero when absent).
struct DirectProblem {
  MechanicalModel model;
  CostModel cost;
  BoundarySpec bc;
  double T = 1.0;
  int N = 100;
  double penalty_weight = 1e6;
  Matrix control_grid;  ///< (N + 1) x n, contravariant u at nodes
  Vector zeta0;
  ControlInterpolation interpolation = ControlInterpolation::Linear;
};

/// Problem with zero controls and default penalty.
DirectProblem make_direct_problem(const MechanicalModel& model, const CostModel& cost, const BoundarySpec& bc,
                                  double T, int N, double penalty_weight = 1e6);

struct DirectEvaluation {
  double total = 0.0;    ///< running + penalty
  double running = 0.0;  ///< trapezoid of gamma
  double penalty = 0.0;
  Vector terminal_residual;
};

DirectEvaluation evaluate_cost(const DirectProblem& p);

/// Forward trajectory under the problem's control grid; running_cost is the
/// cumulative trapezoid of gamma.
Trajectory direct_trajectory(const DirectProblem& p);

struct DirectOptions {
  long max_evals = 4'000'000;  ///< cost evaluations, including gradient probes
  int max_iter = 1000;
  double fd_step = 1e-6;
  int memory = 0;  ///< L-BFGS pairs kept on top of the structural Hessian model
  double ftol = 1e-14;  ///< stop when an accepted step lowers J by <= ftol (1 + |J|)
  double gtol = 1e-9;   ///< stop when max |dJ/dx| <= gtol (1 + |J|)
};

struct DirectReport {
  Matrix control_grid;
  Vector zeta0;
  DirectEvaluation final;
  double initial_cost = 0.0;
  std::vector<double> history;  ///< J after every accepted iteration, starting with the initial value
  long evaluations = 0;
  int iterations = 0;
  bool exhausted = false;  ///< stopped by max_evals or max_iter
  bool converged = false;
  std::string message;
};

/// Quasi-Newton descent with monotone Armijo backtracking on the control
/// grid (and zeta0 in case B). The Hessian model is the quadrature-weighted
/// d2gamma/du2 plus the Gauss-Newton term of the terminal penalty, optionally
/// refined by L-BFGS pairs. Gradients by central differences; a probe at node k restarts
/// the integration from the first stored node whose interval it touches.
DirectReport optimize(const DirectProblem& p, const DirectOptions& options = {});

/// Controls of `traj` resampled onto the N + 1 uniform nodes of [0, T] by
/// linear interpolation in time (exact when the grids nest).
Matrix sample_controls(const Trajectory& traj, double T, int N);

}  // namespace covpmp
