#include "covpmp/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "covpmp/errors.hpp"

namespace covpmp {

namespace {

/// Gamma^j_kl a^k b^l
Vector christoffel_contract(const GeometryEval& geom, const Vector& a, const Vector& b) {
  const int n = geom.dim();
  Vector out = Vector::Zero(n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) out[j] += geom.christoffel(j, k, l) * a[k] * b[l];
  return out;
}

void require_dim(const PhaseState& s, int n) {
  if (s.q.size() != n || s.zeta.size() != n) throw Error("phase state dimension does not match the model");
}

}  // namespace

PhaseRate forward_field(const MechanicalModel& model, const GeometryEval& geom, const PhaseState& s, const Vector& u) {
  const Vector grad_v = potential_gradient(model.potential, s.q);
  PhaseRate r;
  r.dq = s.zeta;
  r.dzeta = -christoffel_contract(geom, s.zeta, s.zeta) - geom.metric_inv * grad_v + u;
  return r;
}

Vector covector_transport(const GeometryEval& geom, const Vector& xi, const Vector& zeta) {
  const int n = geom.dim();
  Vector out = Vector::Zero(n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) out[j] += geom.christoffel(k, j, l) * xi[k] * zeta[l];
  return out;
}

CoupledRate coupled_field(const MechanicalModel& model, const CostModel& cost, const GeometryEval& geom,
                          const PhaseState& s, const AdjointState& a, const Vector& u_guess) {
  if (!geom.has_curvature) throw Error("coupled_field needs a curvature-level geometry evaluation");
  CoupledRate r;
  r.u = control_from_adjoint(cost, geom, s.zeta, a.xi, u_guess);
  PhaseRate f = forward_field(model, geom, s, r.u);
  r.dq = std::move(f.dq);
  r.dzeta = std::move(f.dzeta);

  r.dxi = a.pi + gamma_zeta_gradient(cost, geom, s.zeta, r.u) + covector_transport(geom, a.xi, s.zeta);

  const Matrix hess = covariant_hessian(geom, model.potential);
  const Vector dpi_cov = -curvature_force(geom, s.zeta, a.xi) - hess * (geom.metric_inv * a.xi) -
                         gamma_covariant_q_gradient(cost, geom, s.zeta, r.u);
  r.dpi = dpi_cov + covector_transport(geom, a.pi, s.zeta);
  return r;
}

double energy(const MechanicalModel& model, const PhaseState& s) {
  const Matrix m = model.metric.mass(s.q);
  return 0.5 * s.zeta.dot(m * s.zeta) + model.potential.value(s.q);
}

Vector pack(const PhaseState& s) {
  const auto n = s.q.size();
  Vector y(2 * n);
  y << s.q, s.zeta;
  return y;
}

Vector pack(const PhaseState& s, const AdjointState& a) {
  const auto n = s.q.size();
  Vector y(4 * n);
  y << s.q, s.zeta, a.xi, a.pi;
  return y;
}

PhaseState unpack_phase(const Vector& y, int n) { return {y.segment(0, n), y.segment(n, n)}; }

AdjointState unpack_adjoint(const Vector& y, int n) { return {y.segment(2 * n, n), y.segment(3 * n, n)}; }

Trajectory simulate(const MechanicalModel& model, const CostModel& cost, const PhaseState& s0, double T, int N,
                    const ControlLaw& law, Integrator method) {
  const int n = model.dim;
  require_dim(s0, n);

  // Last slot carries the running cost.
  Field f = [&](double t, const Vector& y) {
    const PhaseState s = unpack_phase(y, n);
    const GeometryEval geom = eval_geometry(model.metric, s.q, GeometryLevel::Connection);
    const Vector u = law(t, s);
    const PhaseRate r = forward_field(model, geom, s, u);
    Vector dy(2 * n + 1);
    dy << r.dq, r.dzeta, gamma(cost, geom, s.zeta, u);
    return dy;
  };
  Vector y0(2 * n + 1);
  y0 << pack(s0), 0.0;
  const IntegrationResult res = integrate(f, y0, T, N, method);

  Trajectory traj;
  traj.dim = n;
  traj.t = res.t;
  for (std::size_t i = 0; i < res.t.size(); ++i) {
    const Vector& y = res.y[i];
    PhaseState s = unpack_phase(y, n);
    const GeometryEval geom = eval_geometry(model.metric, s.q, GeometryLevel::Connection);
    Vector u = law(res.t[i], s);
    traj.controls_cov.push_back(geom.metric * u);
    traj.controls.push_back(std::move(u));
    traj.energy.push_back(energy(model, s));
    traj.running_cost.push_back(y[2 * n]);
    traj.states.push_back(std::move(s));
  }
  return traj;
}

Trajectory integrate_coupled(const MechanicalModel& model, const CostModel& cost, const PhaseState& s0,
                             const AdjointState& a0, double T, int N, Integrator method) {
  const int n = model.dim;
  require_dim(s0, n);
  if (a0.xi.size() != n || a0.pi.size() != n) throw Error("adjoint state dimension does not match the model");

  Vector warm;  // previous control, seeds the inversion
  Field f = [&](double, const Vector& y) {
    const PhaseState s = unpack_phase(y, n);
    const AdjointState a = unpack_adjoint(y, n);
    const GeometryEval geom = eval_geometry(model.metric, s.q, GeometryLevel::Curvature);
    const CoupledRate r = coupled_field(model, cost, geom, s, a, warm);
    warm = r.u;
    Vector dy(4 * n + 1);
    dy << r.dq, r.dzeta, r.dxi, r.dpi, gamma(cost, geom, s.zeta, r.u);
    return dy;
  };
  Vector y0(4 * n + 1);
  y0 << pack(s0, a0), 0.0;
  const IntegrationResult res = integrate(f, y0, T, N, method);

  Trajectory traj;
  traj.dim = n;
  traj.t = res.t;
  Vector prev;
  for (std::size_t i = 0; i < res.t.size(); ++i) {
    const Vector& y = res.y[i];
    PhaseState s = unpack_phase(y, n);
    AdjointState a = unpack_adjoint(y, n);
    const GeometryEval geom = eval_geometry(model.metric, s.q, GeometryLevel::Connection);
    Vector u = control_from_adjoint(cost, geom, s.zeta, a.xi, prev);
    prev = u;
    traj.controls_cov.push_back(geom.metric * u);
    traj.controls.push_back(std::move(u));
    traj.energy.push_back(energy(model, s));
    traj.running_cost.push_back(y[4 * n]);
    traj.states.push_back(std::move(s));
    traj.adjoints.push_back(std::move(a));
  }
  return traj;
}

double check_second_derivative_identity(const MechanicalModel& model, const Trajectory& traj, const CovectorField& field) {
  const std::size_t m = traj.size();
  if (m < 3) throw Error("check_second_derivative_identity needs at least 3 trajectory nodes");
  if (traj.controls.size() != m) throw Error("check_second_derivative_identity needs the controls along the trajectory");

  std::vector<GeometryEval> geoms;
  std::vector<Vector> eta;  // first covariant derivative at each node
  geoms.reserve(m);
  eta.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    geoms.push_back(eval_geometry(model.metric, traj.states[i].q, GeometryLevel::Curvature));
    const double t = traj.t[i];
    eta.push_back(covariant_time_derivative_covector(geoms.back(), traj.states[i].zeta, field.value(t), field.rate(t)));
  }

  const int n = model.dim;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const GeometryEval& g = geoms[i];
    const Vector& zeta = traj.states[i].zeta;
    const double t = traj.t[i];
    const double h2 = traj.t[i + 1] - traj.t[i - 1];

    const Vector eta_dot = (eta[i + 1] - eta[i - 1]) / h2;
    const Vector lhs = covariant_time_derivative_covector(g, zeta, eta[i], eta_dot);

    const Vector xi = field.value(t);
    const PhaseRate fr = forward_field(model, g, traj.states[i], traj.controls[i]);
    const Vector dzeta_cov = covariant_time_derivative_vector(g, zeta, zeta, fr.dzeta);
    Vector rhs = field.accel(t) - 2.0 * covector_transport(g, eta[i], zeta) - covector_transport(g, xi, dzeta_cov);
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          for (int p = 0; p < n; ++p)
            s += (g.riemann(k, l, p, j) - g.christoffel_partials(k, l, p, j)) * xi[k] * zeta[l] * zeta[p];
      rhs[j] += s;
    }
    worst = std::max(worst, (lhs - rhs).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace covpmp
