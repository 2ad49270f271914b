#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace covpmp::testing {

namespace {

using Rhs = std::function<Vector(const Vector&)>;

std::vector<Vector> rk4(const Rhs& f, Vector y, double T, int N) {
  std::vector<Vector> out{y};
  const double h = T / N;
  for (int i = 0; i < N; ++i) {
    const Vector k1 = f(y);
    const Vector k2 = f(y + 0.5 * h * k1);
    const Vector k3 = f(y + 0.5 * h * k2);
    const Vector k4 = f(y + h * k3);
    y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back(y);
  }
  return out;
}

/// a^i = -Gamma^i_kl zeta^k zeta^l - M^il d_l V
Vector free_acceleration(const MechanicalModel& model, const Vector& q, const Vector& zeta) {
  const GeometryEval g = eval_geometry(model.metric, q, GeometryLevel::Connection);
  const int n = model.dim;
  Vector a = -g.metric_inv * model.potential.gradient(q);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) a[i] -= g.christoffel(i, k, l) * zeta[k] * zeta[l];
  return a;
}

}  // namespace

OracleRun integrate_optimal_force(const MechanicalModel& model, const Vector& q0, const Vector& zeta0,
                                  const Vector& u0, const Vector& u0_dot, double T, int N) {
  const int n = model.dim;
  Rhs f = [&](const Vector& y) {
    const Vector q = y.segment(0, n), zeta = y.segment(n, n), u = y.segment(2 * n, n), v = y.segment(3 * n, n);
    const GeometryEval g = eval_geometry(model.metric, q);
    const Vector dv_pot = model.potential.gradient(q);
    const Matrix hess = model.potential.hessian(q);
    const Vector u_up = g.metric_inv * u;

    Vector zeta_dot = g.metric_inv * (u - dv_pot);
    Vector dzeta_cov = zeta_dot;  // covariant rate of zeta
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) zeta_dot[i] -= g.christoffel(i, k, l) * zeta[k] * zeta[l];

    Vector du(n);  // covariant rate of u
    for (int j = 0; j < n; ++j) {
      double s = v[j];
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s -= g.christoffel(k, j, l) * u[k] * zeta[l];
      du[j] = s;
    }

    Vector u_ddot(n);
    for (int j = 0; j < n; ++j) {
      // D2u_j = -R^i_klj zeta^k zeta^l u_i - (d_j d_l V - Gamma^p_jl d_p V) u^l
      double d2u = 0.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) d2u -= g.riemann(i, k, l, j) * zeta[k] * zeta[l] * u[i];
      for (int l = 0; l < n; ++l) {
        double h = hess(j, l);
        for (int p = 0; p < n; ++p) h -= g.christoffel(p, j, l) * dv_pot[p];
        d2u -= h * u_up[l];
      }
      double s = d2u;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          s += 2.0 * g.christoffel(k, j, l) * du[k] * zeta[l];
          s += g.christoffel(k, j, l) * u[k] * dzeta_cov[l];
          for (int m = 0; m < n; ++m) {
            s -= (g.riemann(k, l, m, j) - g.christoffel_partials(k, l, m, j)) * u[k] * zeta[l] * zeta[m];
          }
        }
      u_ddot[j] = s;
    }
    Vector dy(4 * n);
    dy << zeta, zeta_dot, v, u_ddot;
    return dy;
  };
  Vector y0(4 * n);
  y0 << q0, zeta0, u0, u0_dot;
  OracleRun run;
  for (const Vector& y : rk4(f, y0, T, N)) {
    run.q.push_back(y.segment(0, n));
    run.zeta.push_back(y.segment(n, n));
    run.xi.push_back(y.segment(2 * n, n));
  }
  return run;
}

OracleRun integrate_coordinate_pmp(const MechanicalModel& model, const CostModel& cost, const Vector& q0,
                                   const Vector& zeta0, const Vector& xi0, const Vector& rho0, double T, int N) {
  const int n = model.dim;
  Vector warm;
  Rhs f = [&](const Vector& y) {
    const Vector q = y.segment(0, n), zeta = y.segment(n, n), xi = y.segment(2 * n, n), rho = y.segment(3 * n, n);
    const GeometryEval g = eval_geometry(model.metric, q, GeometryLevel::Connection);
    const Vector u = control_from_adjoint(cost, g, zeta, xi, warm);
    warm = u;
    const Vector a = free_acceleration(model, q, zeta);

    Vector rho_dot = gamma_coordinate_q_gradient(cost, g, zeta, u);
    for (int j = 0; j < n; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(q[j]));
      Vector qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      const Vector da = (free_acceleration(model, qp, zeta) - free_acceleration(model, qm, zeta)) / (2.0 * h);
      rho_dot[j] -= xi.dot(da);
    }
    // da^i/dzeta^j = -2 Gamma^i_jl zeta^l
    Vector xi_dot = gamma_zeta_gradient(cost, g, zeta, u) - rho;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) xi_dot[j] += 2.0 * g.christoffel(i, j, l) * zeta[l] * xi[i];

    Vector dy(4 * n);
    dy << zeta, a + u, xi_dot, rho_dot;
    return dy;
  };
  Vector y0(4 * n);
  y0 << q0, zeta0, xi0, rho0;
  OracleRun run;
  for (const Vector& y : rk4(f, y0, T, N)) {
    run.q.push_back(y.segment(0, n));
    run.zeta.push_back(y.segment(n, n));
    run.xi.push_back(y.segment(2 * n, n));
  }
  return run;
}

double max_deviation(const OracleRun& oracle, const Trajectory& traj) {
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    worst = std::max(worst, (oracle.q[i] - traj.states[i].q).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (oracle.zeta[i] - traj.states[i].zeta).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (oracle.xi[i] - traj.adjoints[i].xi).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace covpmp::testing
