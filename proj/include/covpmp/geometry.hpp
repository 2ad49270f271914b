#pragma once

#include <functional>

#include "covpmp/tensor.hpp"

namespace covpmp {

/// Mass matrix M(q) viewed as a Riemannian metric on configuration space.
///
/// Derivative callbacks are optional. When `mass_partials` is empty, central
/// differences of `mass` with step fd_step * max(1, |q^j|) are used. When
/// `mass_second_partials` is empty, the Christoffel partials are obtained by
/// central differences of the connection itself (step fd_step_second).
struct MetricProvider {
  int dim = 0;
  std::function<Matrix(const Vector&)> mass;
  /// (j, k, l) -> d_j M_kl
  std::function<Tensor3(const Vector&)> mass_partials;
  /// (i, j, k, l) -> d_i d_j M_kl
  std::function<Tensor4(const Vector&)> mass_second_partials;
  double fd_step = 1e-6;
  double fd_step_second = 1e-4;
};

/// Scalar potential V(q) with optional analytic gradient and Hessian.
struct PotentialProvider {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
  double fd_step = 1e-6;
  double fd_step_second = 1e-4;
};

enum class GeometryLevel {
  Connection,  ///< metric, inverse, dM, Christoffel symbols only
  Curvature,   ///< additionally Christoffel partials and the Riemann tensor
};

/// Geometry bundle at one configuration. Immutable once built.
///
/// Index layout:
///   christoffel(j, i, k)            = Gamma^j_{ik}   (symmetric in i, k)
///   christoffel_partials(j, l, m, k) = d_k Gamma^j_{lm}
///   riemann(j, i, k, l)             = R^j_{ikl}
///     = d_l Gamma^j_{ik} - d_k Gamma^j_{il} + Gamma^p_{ik} Gamma^j_{pl} - Gamma^p_{il} Gamma^j_{pk}
struct GeometryEval {
  Vector q;
  Matrix metric;
  Matrix metric_inv;
  Tensor3 mass_partials;
  Tensor3 christoffel;
  Tensor4 christoffel_partials;
  Tensor4 riemann;
  bool has_curvature = false;

  int dim() const { return static_cast<int>(q.size()); }
};

GeometryEval eval_geometry(const MetricProvider& provider, const Vector& q,
                           GeometryLevel level = GeometryLevel::Curvature);

/// d_j M_kl through the provider's derivative path (analytic or central differences).
Tensor3 mass_partials(const MetricProvider& provider, const Vector& q);

/// Gamma^j_{ik} evaluated for every (i, k) independently, without symmetrization.
Tensor3 christoffel_unsymmetrized(const Matrix& metric_inv, const Tensor3& mass_partials);

/// Copy of `provider` with the analytic derivative callbacks removed.
MetricProvider finite_difference_only(const MetricProvider& provider, double fd_step = 1e-6);
PotentialProvider finite_difference_only(const PotentialProvider& provider, double fd_step = 1e-6);

Vector potential_gradient(const PotentialProvider& pot, const Vector& q);
/// Coordinate second partials d_j d_k V, symmetrized.
Matrix potential_hessian(const PotentialProvider& pot, const Vector& q);

/// phi^k = M^{kj} xi_j
Vector raise_index(const GeometryEval& geom, const Vector& covector);
/// phi_j = M_{jk} phi^k
Vector lower_index(const GeometryEval& geom, const Vector& vector);

/// (R_zeta . xi)_j = R^i_{klj} zeta^k zeta^l xi_i. Requires curvature level.
Vector curvature_force(const GeometryEval& geom, const Vector& zeta, const Vector& xi);

/// (nabla^2 V)_{kl} = d_k d_l V - Gamma^j_{kl} d_j V
Matrix covariant_hessian(const GeometryEval& geom, const PotentialProvider& pot);

/// (D xi / dt)_j = xi_dot_j - Gamma^k_{jl} xi_k zeta^l along a curve with velocity zeta.
Vector covariant_time_derivative_covector(const GeometryEval& geom, const Vector& zeta,
                                          const Vector& xi, const Vector& xi_dot);

/// (D phi / dt)^j = phi_dot^j + Gamma^j_{kl} zeta^k phi^l
Vector covariant_time_derivative_vector(const GeometryEval& geom, const Vector& zeta,
                                        const Vector& phi, const Vector& phi_dot);

struct RicciResidual {
  double metric = 0.0;   ///< max |d_j M_kl - Gamma^p_jk M_lp - Gamma^p_jl M_kp|
  double inverse = 0.0;  ///< max |d_j M^kl + Gamma^k_jp M^pl + Gamma^l_jp M^pk|
  double max() const { return metric > inverse ? metric : inverse; }
};

RicciResidual check_ricci_identity(const MetricProvider& provider, const Vector& q);

}  // namespace covpmp
