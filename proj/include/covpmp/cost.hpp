#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covpmp/geometry.hpp"

namespace covpmp {

enum class CostKind {
  QuadraticControl,              ///< 1/2 M_kl u^k u^l
  QuadraticControlPlusVelocity,  ///< 1/2 M_kl u^k u^l + alpha/2 M_kl zeta^k zeta^l
  QuarticControl,                ///< 1/4 (M_kl u^k u^l)^2
};

struct CostModel {
  CostKind kind = CostKind::QuadraticControl;
  double alpha = 0.0;  ///< velocity-penalty weight
};

std::string to_string(CostKind kind);
std::optional<CostKind> parse_cost_kind(const std::string& name);
const std::vector<std::string>& cost_kind_names();

// All evaluators take contravariant zeta and u; geom supplies M(q) and dM(q).

double gamma(const CostModel& cost, const GeometryEval& geom, const Vector& zeta, const Vector& u);

/// d gamma / d q^j with contravariant zeta and u held fixed.
Vector gamma_coordinate_q_gradient(const CostModel& cost, const GeometryEval& geom, const Vector& zeta,
                                   const Vector& u);
Vector gamma_zeta_gradient(const CostModel& cost, const GeometryEval& geom, const Vector& zeta, const Vector& u);
Vector gamma_u_gradient(const CostModel& cost, const GeometryEval& geom, const Vector& zeta, const Vector& u);
Matrix gamma_u_hessian(const CostModel& cost, const GeometryEval& geom, const Vector& zeta, const Vector& u);

/// Covariant q-gradient: the coordinate partial compensated for the
/// transport of zeta and u,
///   (dgamma/dq)_j - Gamma^l_{jk} zeta^k (dgamma/dzeta)_l - Gamma^l_{jk} u^k (dgamma/du)_l.
Vector gamma_covariant_q_gradient(const CostModel& cost, const GeometryEval& geom, const Vector& zeta,
                                  const Vector& u);

struct InversionOptions {
  int max_iter = 50;
  int max_halvings = 30;
  double tol = 1e-12;  ///< max_j |dgamma/du_j - xi_j| <= tol (1 + |xi|_inf)
};

/// Solves dgamma/du (u) = xi for the contravariant control u.
/// Quadratic kinds use u = M^{-1} xi; other kinds run damped Newton from
/// `u_guess` (or from M^{-1} xi when the guess has a singular Hessian).
/// Throws InversionError on non-convergence.
Vector control_from_adjoint(const CostModel& cost, const GeometryEval& geom, const Vector& zeta, const Vector& xi,
                            const Vector& u_guess, const InversionOptions& options = {});

}  // namespace covpmp
