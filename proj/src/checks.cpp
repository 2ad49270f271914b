#include "covpmp/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "covpmp/geometry.hpp"

namespace covpmp {

namespace {

class Tracker {
 public:
  void update(const std::string& name, double value, double threshold) {
    for (auto& it : items_) {
      if (it.name == name) {
        it.value = std::max(it.value, value);
        return;
      }
    }
    items_.push_back({name, value, threshold, false});
  }

  CheckReport finish() {
    CheckReport r{items_};
    for (auto& it : r.items) it.passed = std::isfinite(it.value) && it.value <= it.threshold;
    return r;
  }

 private:
  std::vector<CheckItem> items_;
};

template <int R>
double max_abs_diff(const Tensor<R>& a, const Tensor<R>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

Vector uniform_vector(int n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

double relative_error(const Vector& analytic, const Vector& approx) {
  const double scale = std::max(1.0, analytic.lpNorm<Eigen::Infinity>());
  return (analytic - approx).lpNorm<Eigen::Infinity>() / scale;
}

bool constant_metric(const MechanicalModel& model) { return model.name == "flat" || model.name == "pendulum"; }

}  // namespace

bool CheckReport::passed() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.passed; });
}

CheckReport run_geometry_checks(const MechanicalModel& model, int points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tracker tr;
  const int n = model.dim;
  const bool analytic = static_cast<bool>(model.metric.mass_partials);
  const MetricProvider fd_metric = finite_difference_only(model.metric, 1e-5);

  for (int s = 0; s < points; ++s) {
    const Vector q = sample_configuration(model, rng);
    const GeometryEval g = eval_geometry(model.metric, q);

    double sym = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) sym = std::max(sym, std::abs(g.christoffel(j, i, k) - g.christoffel(j, k, i)));
    tr.update("christoffel_symmetry", sym, 0.0);

    const Tensor3 raw = christoffel_unsymmetrized(g.metric_inv, g.mass_partials);
    tr.update("christoffel_unsymmetrized", max_abs_diff(raw, g.christoffel) / std::max(1.0, g.christoffel.max_abs()),
              1e-10);

    const Matrix id = g.metric * g.metric_inv - Matrix::Identity(n, n);
    tr.update("metric_inverse", id.lpNorm<Eigen::Infinity>(), 1e-12);

    double anti = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) anti = std::max(anti, std::abs(g.riemann(j, i, k, l) + g.riemann(j, i, l, k)));
    const double rmax = g.riemann.max_abs();
    tr.update("riemann_antisymmetry", rmax > 0.0 ? anti / rmax : anti, 1e-10);

    tr.update(analytic ? "ricci_identity_analytic" : "ricci_identity_fd_default",
              check_ricci_identity(model.metric, q).max(), analytic ? 1e-12 : 1e-8);
    tr.update("ricci_identity_fd", check_ricci_identity(fd_metric, q).max(), 1e-8);

    if (analytic) {
      const Tensor3 fd = mass_partials(finite_difference_only(model.metric), q);
      tr.update("mass_partials_fd_vs_analytic", max_abs_diff(fd, g.mass_partials) / std::max(1.0, g.mass_partials.max_abs()),
                1e-6);
    }

    const Matrix h = covariant_hessian(g, model.potential);
    tr.update("covariant_hessian_symmetry", (h - h.transpose()).lpNorm<Eigen::Infinity>(), 1e-10);

    if (constant_metric(model)) {
      tr.update("flat_christoffel_zero", g.christoffel.max_abs(), 0.0);
      tr.update("flat_riemann_zero", g.riemann.max_abs(), 0.0);
    }
    if (model.name == "sphere") {
      // R_1212 / det M with R_1212 = M_1p R^p_212; -1/r^2 in this convention.
      const double r = model.params.at("radius");
      double r1212 = 0.0;
      for (int p = 0; p < n; ++p) r1212 += g.metric(0, p) * g.riemann(p, 1, 0, 1);
      const double k = r1212 / g.metric.determinant();
      tr.update("sphere_sectional_curvature", std::abs(k + 1.0 / (r * r)), 1e-8);
    }
  }
  return tr.finish();
}

CheckReport run_cost_checks(const MechanicalModel& model, const CostModel& cost, int points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tracker tr;
  const int n = model.dim;
  constexpr double h = 1e-6;

  for (int s = 0; s < points; ++s) {
    const Vector q = sample_configuration(model, rng);
    const Vector zeta = uniform_vector(n, -1.0, 1.0, rng);
    const Vector u = uniform_vector(n, -1.0, 1.0, rng);
    const GeometryEval g = eval_geometry(model.metric, q, GeometryLevel::Connection);

    Vector dq(n), dz(n), du(n);
    for (int j = 0; j < n; ++j) {
      const double hq = h * std::max(1.0, std::abs(q[j]));
      Vector qp = q, qm = q;
      qp[j] += hq;
      qm[j] -= hq;
      const GeometryEval gp = eval_geometry(model.metric, qp, GeometryLevel::Connection);
      const GeometryEval gm = eval_geometry(model.metric, qm, GeometryLevel::Connection);
      dq[j] = (gamma(cost, gp, zeta, u) - gamma(cost, gm, zeta, u)) / (2.0 * hq);

      Vector zp = zeta, zm = zeta, up = u, um = u;
      zp[j] += h;
      zm[j] -= h;
      up[j] += h;
      um[j] -= h;
      dz[j] = (gamma(cost, g, zp, u) - gamma(cost, g, zm, u)) / (2.0 * h);
      du[j] = (gamma(cost, g, zeta, up) - gamma(cost, g, zeta, um)) / (2.0 * h);
    }
    tr.update("gamma_q_gradient_fd", relative_error(gamma_coordinate_q_gradient(cost, g, zeta, u), dq), 1e-6);
    tr.update("gamma_zeta_gradient_fd", relative_error(gamma_zeta_gradient(cost, g, zeta, u), dz), 1e-6);
    tr.update("gamma_u_gradient_fd", relative_error(gamma_u_gradient(cost, g, zeta, u), du), 1e-6);

    const Vector xi = uniform_vector(n, -2.0, 2.0, rng);
    const Vector uc = control_from_adjoint(cost, g, zeta, xi, Vector());
    tr.update("inversion_round_trip",
              (gamma_u_gradient(cost, g, zeta, uc) - xi).lpNorm<Eigen::Infinity>() / (1.0 + xi.lpNorm<Eigen::Infinity>()),
              1e-10);

    tr.update("covariant_q_gradient_zero", gamma_covariant_q_gradient(cost, g, zeta, u).lpNorm<Eigen::Infinity>(),
              1e-10);
  }
  return tr.finish();
}

}  // namespace covpmp
