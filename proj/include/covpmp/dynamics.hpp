#pragma once

#include <functional>
#include <vector>

#include "covpmp/cost.hpp"
#include "covpmp/geometry.hpp"
#include "covpmp/integrate.hpp"
#include "covpmp/models.hpp"

namespace covpmp {

/// Configuration q and contravariant velocity zeta = dq/dt.
struct PhaseState {
  Vector q;
  Vector zeta;
};

/// Adjoint covector xi and pi = D xi/dt - dgamma/dzeta (both covariant).
/// The multiplier of dq/dt = zeta is -pi and is never integrated.
struct AdjointState {
  Vector xi;
  Vector pi;
};

struct PhaseRate {
  Vector dq;
  Vector dzeta;
};

/// Coordinate time derivatives of (q, zeta, xi, pi) and the control used.
struct CoupledRate {
  Vector dq;
  Vector dzeta;
  Vector dxi;
  Vector dpi;
  Vector u;
};

/// Controlled Euler-Lagrange equations in contravariant form:
///   dq/dt = zeta,  dzeta^j/dt = -Gamma^j_kl zeta^k zeta^l - M^jl d_l V + u^j.
PhaseRate forward_field(const MechanicalModel& model, const GeometryEval& geom, const PhaseState& s, const Vector& u);

/// State plus second-order adjoint system, first-order form. With u solving
/// dgamma/du = xi:
///   dxi_j/dt = pi_j + (dgamma/dzeta)_j + Gamma^k_jl xi_k zeta^l
///   dpi_j/dt = (D pi)_j + Gamma^k_jl pi_k zeta^l
///   D pi = -R_zeta.xi - nabla^2 V . xi - (covariant dgamma/dq)
/// `geom` must be a curvature-level evaluation at s.q.
CoupledRate coupled_field(const MechanicalModel& model, const CostModel& cost, const GeometryEval& geom,
                          const PhaseState& s, const AdjointState& a, const Vector& u_guess = Vector());

/// K + V with K = 1/2 M_kl zeta^k zeta^l.
double energy(const MechanicalModel& model, const PhaseState& s);

/// Gamma^k_{jl} xi_k zeta^l, the transport term relating coordinate and
/// covariant time derivatives of a covector.
Vector covector_transport(const GeometryEval& geom, const Vector& xi, const Vector& zeta);

// Flat packing used by the integrators: [q, zeta] or [q, zeta, xi, pi].
Vector pack(const PhaseState& s);
Vector pack(const PhaseState& s, const AdjointState& a);
PhaseState unpack_phase(const Vector& y, int n);
AdjointState unpack_adjoint(const Vector& y, int n);

/// Sampled solution on a uniform grid. `adjoints` is empty for forward
/// simulations. `running_cost[i]` is the integral of gamma over [0, t_i],
/// integrated as an extra quadrature state by the same integrator.
struct Trajectory {
  int dim = 0;
  std::vector<double> t;
  std::vector<PhaseState> states;
  std::vector<AdjointState> adjoints;
  std::vector<Vector> controls;      ///< contravariant u^j
  std::vector<Vector> controls_cov;  ///< u_j = M_jk u^k
  std::vector<double> energy;
  std::vector<double> running_cost;

  std::size_t size() const { return t.size(); }
  bool has_adjoints() const { return !adjoints.empty(); }
  double cost() const { return running_cost.empty() ? 0.0 : running_cost.back(); }
};

/// u = law(t, state), contravariant.
using ControlLaw = std::function<Vector(double, const PhaseState&)>;

/// Forward integration under a prescribed control law.
Trajectory simulate(const MechanicalModel& model, const CostModel& cost, const PhaseState& s0, double T, int N,
                    const ControlLaw& law, Integrator method = Integrator::Rk4);

/// Integrates the coupled state-adjoint system from (s0, a0) and recovers
/// the optimal control at every node.
Trajectory integrate_coupled(const MechanicalModel& model, const CostModel& cost, const PhaseState& s0,
                             const AdjointState& a0, double T, int N, Integrator method = Integrator::Rk4);

/// Analytic covector field along a curve: value, first and second
/// coordinate time derivatives.
struct CovectorField {
  std::function<Vector(double)> value;
  std::function<Vector(double)> rate;
  std::function<Vector(double)> accel;
};

/// Compares the expanded second covariant derivative of `field`
///   xi''_j - 2 Gamma^k_jl (Dxi)_k zeta^l - Gamma^k_jl xi_k (Dzeta)^l + (R^k_lmj - d_j Gamma^k_lm) xi_k zeta^l zeta^m
/// with the covariant derivative applied twice, the outer one by central
/// differences between neighbouring trajectory nodes. Returns the max
/// absolute discrepancy over interior nodes.
double check_second_derivative_identity(const MechanicalModel& model, const Trajectory& traj, const CovectorField& field);

}  // namespace covpmp
