#include "covpmp/cost.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>

#include <boost/math/tools/toms748_solve.hpp>

#include "covpmp/errors.hpp"

namespace covpmp {

namespace {

double quad(const Matrix& m, const Vector& v) { return v.dot(m * v); }

/// v^T (d_j M) v for every j.
Vector quad_partials(const GeometryEval& geom, const Vector& v) {
  const int n = geom.dim();
  Vector out(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) s += geom.mass_partials(j, k, l) * v[k] * v[l];
    out[j] = s;
  }
  return out;
}

bool is_quadratic(CostKind kind) { return kind != CostKind::QuarticControl; }

}  // namespace

std::string to_string(CostKind kind) {
  switch (kind) {
    case CostKind::QuadraticControl:
      return "quadratic_control";
    case CostKind::QuadraticControlPlusVelocity:
      return "quadratic_control_plus_velocity";
    case CostKind::QuarticControl:
      return "quartic_control";
  }
  return "unknown";
}

const std::vector<std::string>& cost_kind_names() {
  static const std::vector<std::string> names = {"quadratic_control", "quadratic_control_plus_velocity",
                                                 "quartic_control"};
  return names;
}

std::optional<CostKind> parse_cost_kind(const std::string& name) {
  if (name == "quadratic_control") return CostKind::QuadraticControl;
  if (name == "quadratic_control_plus_velocity") return CostKind::QuadraticControlPlusVelocity;
  if (name == "quartic_control") return CostKind::QuarticControl;
  return std::nullopt;
}

double gamma(const CostModel& cost, const GeometryEval& geom, const Vector& zeta, const Vector& u) {
  const double uu = quad(geom.metric, u);
  switch (cost.kind) {
    case CostKind::QuadraticControl:
      return 0.5 * uu;
    case CostKind::QuadraticControlPlusVelocity:
      return 0.5 * uu + 0.5 * cost.alpha * quad(geom.metric, zeta);
    case CostKind::QuarticControl:
      return 0.25 * uu * uu;
  }
  return 0.0;
}

Vector gamma_coordinate_q_gradient(const CostModel& cost, const GeometryEval& geom, const Vector& zeta,
                                   const Vector& u) {
  switch (cost.kind) {
    case CostKind::QuadraticControl:
      return 0.5 * quad_partials(geom, u);
    case CostKind::QuadraticControlPlusVelocity:
      return 0.5 * quad_partials(geom, u) + 0.5 * cost.alpha * quad_partials(geom, zeta);
    case CostKind::QuarticControl:
      return 0.5 * quad(geom.metric, u) * quad_partials(geom, u);
  }
  return Vector::Zero(geom.dim());
}

Vector gamma_zeta_gradient(const CostModel& cost, const GeometryEval& geom, const Vector& zeta, const Vector&) {
  if (cost.kind == CostKind::QuadraticControlPlusVelocity) return cost.alpha * (geom.metric * zeta);
  return Vector::Zero(geom.dim());
}

Vector gamma_u_gradient(const CostModel& cost, const GeometryEval& geom, const Vector&, const Vector& u) {
  const Vector mu = geom.metric * u;
  if (cost.kind == CostKind::QuarticControl) return u.dot(mu) * mu;
  return mu;
}

Matrix gamma_u_hessian(const CostModel& cost, const GeometryEval& geom, const Vector&, const Vector& u) {
  if (cost.kind == CostKind::QuarticControl) {
    const Vector mu = geom.metric * u;
    return u.dot(mu) * geom.metric + 2.0 * mu * mu.transpose();
  }
  return geom.metric;
}

Vector gamma_covariant_q_gradient(const CostModel& cost, const GeometryEval& geom, const Vector& zeta,
                                  const Vector& u) {
  const int n = geom.dim();
  Vector out = gamma_coordinate_q_gradient(cost, geom, zeta, u);
  const Vector gz = gamma_zeta_gradient(cost, geom, zeta, u);
  const Vector gu = gamma_u_gradient(cost, geom, zeta, u);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k) s += geom.christoffel(l, j, k) * (zeta[k] * gz[l] + u[k] * gu[l]);
    out[j] -= s;
  }
  return out;
}

namespace {

/// s * M^{-1} xi with s solving the projection of dgamma/du = xi onto
/// w = M^{-1} xi; a cold start that is exact for costs depending on |u|_M only.
Vector radial_start(const CostModel& cost, const GeometryEval& geom, const Vector& zeta, const Vector& xi) {
  const Vector w = geom.metric_inv * xi;
  const double target = w.dot(xi);
  if (!(target > 0.0)) return w;
  auto f = [&](double s) { return w.dot(gamma_u_gradient(cost, geom, zeta, s * w)) - target; };
  double hi = 1.0;
  double f_hi = f(hi);
  for (int i = 0; i < 200 && f_hi < 0.0; ++i) f_hi = f(hi *= 2.0);
  double lo = hi;
  double f_lo = f_hi;
  for (int i = 0; i < 2000 && f_lo > 0.0; ++i) f_lo = f(lo *= 0.5);
  if (f_lo > 0.0 || f_hi < 0.0) return w;
  if (f_lo == 0.0) return lo * w;
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                        boost::math::tools::eps_tolerance<double>(52), max_iter);
  return 0.5 * (a + b) * w;
}

}  // namespace

Vector control_from_adjoint(const CostModel& cost, const GeometryEval& geom, const Vector& zeta, const Vector& xi,
                            const Vector& u_guess, const InversionOptions& options) {
  if (is_quadratic(cost.kind)) return geom.metric_inv * xi;

  const double tol = options.tol * (1.0 + xi.lpNorm<Eigen::Infinity>());
  auto residual = [&](const Vector& u) { return Vector(gamma_u_gradient(cost, geom, zeta, u) - xi); };

  Vector u = geom.metric_inv * xi;
  bool warm = false;
  if (u_guess.size() == xi.size() && u_guess.allFinite()) {
    Eigen::LLT<Matrix> llt(gamma_u_hessian(cost, geom, zeta, u_guess));
    if (llt.info() == Eigen::Success && residual(u_guess).lpNorm<Eigen::Infinity>() <
                                            residual(u).lpNorm<Eigen::Infinity>()) {
      u = u_guess;
      warm = true;
    }
  }
  if (!warm) {
    const Vector radial = radial_start(cost, geom, zeta, xi);
    if (residual(radial).lpNorm<Eigen::Infinity>() < residual(u).lpNorm<Eigen::Infinity>()) u = radial;
  }

  Vector r = residual(u);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < options.max_iter && rnorm > tol; ++it) {
    Eigen::LLT<Matrix> llt(gamma_u_hessian(cost, geom, zeta, u));
    if (llt.info() != Eigen::Success) {
      throw InversionError("control inversion: Hessian d2gamma/du2 not positive definite", rnorm);
    }
    const Vector step = llt.solve(r);
    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, scale *= 0.5) {
      const Vector trial = u - scale * step;
      const Vector rt = residual(trial);
      const double tn = rt.lpNorm<Eigen::Infinity>();
      if (tn < rnorm) {
        u = trial;
        r = rt;
        rnorm = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(rnorm <= tol)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", rnorm);
    throw InversionError(std::string("control inversion did not converge, residual ") + buf, rnorm);
  }
  return u;
}

}  // namespace covpmp
