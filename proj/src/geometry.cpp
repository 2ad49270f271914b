#include "covpmp/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "covpmp/errors.hpp"

namespace covpmp {

namespace {

double fd_width(double scale, double qj) { return scale * std::max(1.0, std::abs(qj)); }

Matrix checked_mass(const MetricProvider& provider, const Vector& q) {
  Matrix m = provider.mass(q);
  if (m.rows() != provider.dim || m.cols() != provider.dim) {
    throw ModelError("mass matrix has wrong shape at q = " + format_vector(q));
  }
  return 0.5 * (m + m.transpose());
}

/// Factorize and invert; throws DegenerateMetricError when M is not SPD.
Matrix inverse_metric(const Matrix& m, const Vector& q) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success || !m.allFinite()) {
    throw DegenerateMetricError("mass matrix is not positive definite at q = " + format_vector(q), q);
  }
  Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

/// Gamma^j_{ik} for i <= k, mirrored onto k < i.
Tensor3 christoffel_symmetric(const Matrix& minv, const Tensor3& dm) {
  const int n = static_cast<int>(minv.rows());
  Tensor3 gamma(n);
  for (int i = 0; i < n; ++i) {
    for (int k = i; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += minv(j, l) * (dm(i, l, k) + dm(k, l, i) - dm(l, i, k));
        gamma(j, i, k) = 0.5 * s;
        gamma(j, k, i) = 0.5 * s;
      }
    }
  }
  return gamma;
}

Tensor3 christoffel_at(const MetricProvider& provider, const Vector& q) {
  Matrix minv = inverse_metric(checked_mass(provider, q), q);
  return christoffel_symmetric(minv, mass_partials(provider, q));
}

Tensor4 christoffel_partials_analytic(const Matrix& minv, const Tensor3& dm, const Tensor3& gamma,
                                      const Tensor4& d2m) {
  const int n = static_cast<int>(minv.rows());
  Tensor4 dgamma(n);
  for (int m = 0; m < n; ++m) {
    // A = M^{-1} d_m M, so d_m M^{-1} = -A M^{-1}
    Matrix dmm(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dmm(a, b) = dm(m, a, b);
    const Matrix a_mat = minv * dmm;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        for (int k = i; k < n; ++k) {
          double s = 0.0;
          for (int p = 0; p < n; ++p) s -= a_mat(j, p) * gamma(p, i, k);
          double t = 0.0;
          for (int l = 0; l < n; ++l) {
            t += minv(j, l) * (d2m(m, i, l, k) + d2m(m, k, l, i) - d2m(m, l, i, k));
          }
          s += 0.5 * t;
          dgamma(j, i, k, m) = s;
          dgamma(j, k, i, m) = s;
        }
      }
    }
  }
  return dgamma;
}

Tensor4 christoffel_partials_fd(const MetricProvider& provider, const Vector& q) {
  const int n = provider.dim;
  Tensor4 dgamma(n);
  for (int m = 0; m < n; ++m) {
    const double h = fd_width(provider.fd_step_second, q[m]);
    Vector qp = q, qm = q;
    qp[m] += h;
    qm[m] -= h;
    const Tensor3 gp = christoffel_at(provider, qp);
    const Tensor3 gm = christoffel_at(provider, qm);
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k) dgamma(j, l, k, m) = (gp(j, l, k) - gm(j, l, k)) / (2.0 * h);
  }
  return dgamma;
}

Tensor4 riemann_from(const Tensor3& gamma, const Tensor4& dgamma) {
  const int n = gamma.dim();
  Tensor4 r(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          double s = dgamma(j, i, k, l) - dgamma(j, i, l, k);
          for (int p = 0; p < n; ++p) s += gamma(p, i, k) * gamma(j, p, l) - gamma(p, i, l) * gamma(j, p, k);
          r(j, i, k, l) = s;
        }
      }
    }
  }
  return r;
}

}  // namespace

Tensor3 mass_partials(const MetricProvider& provider, const Vector& q) {
  const int n = provider.dim;
  if (provider.mass_partials) {
    Tensor3 dm = provider.mass_partials(q);
    if (dm.dim() != n) throw ModelError("mass partials have wrong dimension");
    return dm;
  }
  Tensor3 dm(n);
  for (int j = 0; j < n; ++j) {
    const double h = fd_width(provider.fd_step, q[j]);
    Vector qp = q, qm = q;
    qp[j] += h;
    qm[j] -= h;
    const Matrix mp = checked_mass(provider, qp);
    const Matrix mm = checked_mass(provider, qm);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) dm(j, k, l) = (mp(k, l) - mm(k, l)) / (2.0 * h);
  }
  return dm;
}

Tensor3 christoffel_unsymmetrized(const Matrix& metric_inv, const Tensor3& dm) {
  const int n = static_cast<int>(metric_inv.rows());
  Tensor3 gamma(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += metric_inv(j, l) * (dm(i, l, k) + dm(k, l, i) - dm(l, i, k));
        gamma(j, i, k) = 0.5 * s;
      }
  return gamma;
}

GeometryEval eval_geometry(const MetricProvider& provider, const Vector& q, GeometryLevel level) {
  if (provider.dim < 1 || q.size() != provider.dim) {
    throw ModelError("configuration has dimension " + std::to_string(q.size()) + ", model expects " +
                     std::to_string(provider.dim));
  }
  GeometryEval g;
  g.q = q;
  g.metric = checked_mass(provider, q);
  g.metric_inv = inverse_metric(g.metric, q);
  g.mass_partials = mass_partials(provider, q);
  g.christoffel = christoffel_symmetric(g.metric_inv, g.mass_partials);
  if (level == GeometryLevel::Curvature) {
    if (provider.mass_second_partials) {
      g.christoffel_partials =
          christoffel_partials_analytic(g.metric_inv, g.mass_partials, g.christoffel, provider.mass_second_partials(q));
    } else {
      g.christoffel_partials = christoffel_partials_fd(provider, q);
    }
    g.riemann = riemann_from(g.christoffel, g.christoffel_partials);
    g.has_curvature = true;
  }
  return g;
}

MetricProvider finite_difference_only(const MetricProvider& provider, double fd_step) {
  MetricProvider p = provider;
  p.mass_partials = nullptr;
  p.mass_second_partials = nullptr;
  p.fd_step = fd_step;
  return p;
}

PotentialProvider finite_difference_only(const PotentialProvider& provider, double fd_step) {
  PotentialProvider p = provider;
  p.gradient = nullptr;
  p.hessian = nullptr;
  p.fd_step = fd_step;
  return p;
}

Vector potential_gradient(const PotentialProvider& pot, const Vector& q) {
  if (pot.gradient) return pot.gradient(q);
  const auto n = q.size();
  Vector g(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = fd_width(pot.fd_step, q[j]);
    Vector qp = q, qm = q;
    qp[j] += h;
    qm[j] -= h;
    g[j] = (pot.value(qp) - pot.value(qm)) / (2.0 * h);
  }
  return g;
}

Matrix potential_hessian(const PotentialProvider& pot, const Vector& q) {
  if (pot.hessian) {
    Matrix h = pot.hessian(q);
    return 0.5 * (h + h.transpose());
  }
  const auto n = q.size();
  Matrix hess(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = fd_width(pot.fd_step_second, q[k]);
    Vector qp = q, qm = q;
    qp[k] += h;
    qm[k] -= h;
    hess.col(k) = (potential_gradient(pot, qp) - potential_gradient(pot, qm)) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

Vector raise_index(const GeometryEval& geom, const Vector& covector) { return geom.metric_inv * covector; }

Vector lower_index(const GeometryEval& geom, const Vector& vector) { return geom.metric * vector; }

Vector curvature_force(const GeometryEval& geom, const Vector& zeta, const Vector& xi) {
  if (!geom.has_curvature) throw Error("curvature_force needs a curvature-level geometry evaluation");
  const int n = geom.dim();
  Vector out = Vector::Zero(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s += geom.riemann(i, k, l, j) * zeta[k] * zeta[l] * xi[i];
    out[j] = s;
  }
  return out;
}

Matrix covariant_hessian(const GeometryEval& geom, const PotentialProvider& pot) {
  const int n = geom.dim();
  const Vector dv = potential_gradient(pot, geom.q);
  Matrix h = potential_hessian(pot, geom.q);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      for (int j = 0; j < n; ++j) h(k, l) -= geom.christoffel(j, k, l) * dv[j];
  return h;
}

Vector covariant_time_derivative_covector(const GeometryEval& geom, const Vector& zeta, const Vector& xi,
                                          const Vector& xi_dot) {
  const int n = geom.dim();
  Vector out = xi_dot;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) out[j] -= geom.christoffel(k, j, l) * xi[k] * zeta[l];
  return out;
}

Vector covariant_time_derivative_vector(const GeometryEval& geom, const Vector& zeta, const Vector& phi,
                                        const Vector& phi_dot) {
  const int n = geom.dim();
  Vector out = phi_dot;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) out[j] += geom.christoffel(j, k, l) * zeta[k] * phi[l];
  return out;
}

RicciResidual check_ricci_identity(const MetricProvider& provider, const Vector& q) {
  const GeometryEval g = eval_geometry(provider, q, GeometryLevel::Connection);
  const int n = g.dim();
  const Matrix& m = g.metric;
  const Matrix& mi = g.metric_inv;
  RicciResidual r;
  for (int j = 0; j < n; ++j) {
    Matrix dmj(n, n);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) dmj(k, l) = g.mass_partials(j, k, l);
    const Matrix dinv = -mi * dmj * mi;
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        double cov = dmj(k, l);
        double con = dinv(k, l);
        for (int p = 0; p < n; ++p) {
          cov -= g.christoffel(p, j, k) * m(l, p) + g.christoffel(p, j, l) * m(k, p);
          con += g.christoffel(k, j, p) * mi(p, l) + g.christoffel(l, j, p) * mi(p, k);
        }
        r.metric = std::max(r.metric, std::abs(cov));
        r.inverse = std::max(r.inverse, std::abs(con));
      }
    }
  }
  return r;
}

}  // namespace covpmp
