#include "covpmp/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "covpmp/errors.hpp"

namespace covpmp {

namespace {

constexpr double kPi = std::numbers::pi;

const ModelSpec& find_spec(const std::string& name) {
  for (const auto& spec : list_models()) {
    if (spec.name == name) return spec;
  }
  std::ostringstream os;
  os << "unknown model '" << name << "'; available:";
  for (const auto& spec : list_models()) os << ' ' << spec.name;
  throw ModelError(os.str());
}

ParamMap resolve_params(const ModelSpec& spec, const ParamMap& given) {
  ParamMap out;
  for (const auto& p : spec.params) out[p.name] = p.default_value;
  for (const auto& [key, value] : given) {
    auto it = std::find_if(spec.params.begin(), spec.params.end(), [&](const ParamSpec& p) { return p.name == key; });
    if (it == spec.params.end()) {
      throw ModelError("model '" + spec.name + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) throw ModelError("parameter '" + key + "' must be finite");
    if (it->positive && !(value > 0.0)) throw ModelError("parameter '" + key + "' must be positive");
    if (it->integer && value != std::floor(value)) throw ModelError("parameter '" + key + "' must be an integer");
    out[key] = value;
  }
  return out;
}

MechanicalModel make_flat(const ParamMap& p) {
  const int n = static_cast<int>(p.at("n"));
  if (n > 10) throw ModelError("flat model supports n <= 10");
  const double k = p.at("stiffness");
  MechanicalModel m;
  m.dim = n;
  m.metric.dim = n;
  m.metric.mass = [n](const Vector&) { return Matrix::Identity(n, n); };
  m.metric.mass_partials = [n](const Vector&) { return Tensor3(n); };
  m.metric.mass_second_partials = [n](const Vector&) { return Tensor4(n); };
  m.potential.value = [k](const Vector& q) { return 0.5 * k * q.squaredNorm(); };
  m.potential.gradient = [k](const Vector& q) -> Vector { return k * q; };
  m.potential.hessian = [k, n](const Vector&) -> Matrix { return k * Matrix::Identity(n, n); };
  m.domain_note = "all of R^n";
  m.domain_lower = Vector::Constant(n, -2.0);
  m.domain_upper = Vector::Constant(n, 2.0);
  return m;
}

MechanicalModel make_pendulum(const ParamMap& p) {
  const double mass = p.at("m"), len = p.at("l"), g = p.at("g");
  const double inertia = mass * len * len;
  const double mgl = mass * g * len;
  MechanicalModel m;
  m.dim = 1;
  m.metric.dim = 1;
  m.metric.mass = [inertia](const Vector&) { return Matrix::Constant(1, 1, inertia); };
  m.metric.mass_partials = [](const Vector&) { return Tensor3(1); };
  m.metric.mass_second_partials = [](const Vector&) { return Tensor4(1); };
  m.potential.value = [mgl](const Vector& q) { return -mgl * std::cos(q[0]); };
  m.potential.gradient = [mgl](const Vector& q) { return Vector::Constant(1, mgl * std::sin(q[0])); };
  m.potential.hessian = [mgl](const Vector& q) { return Matrix::Constant(1, 1, mgl * std::cos(q[0])); };
  m.domain_note = "angle from the downward vertical, any real value";
  m.domain_lower = Vector::Constant(1, -kPi);
  m.domain_upper = Vector::Constant(1, kPi);
  return m;
}

// Planar two-link chain with point masses at the link ends, relative joint
// angles: q1 from the downward vertical, q2 of link 2 relative to link 1.
MechanicalModel make_double_pendulum(const ParamMap& p) {
  const double m1 = p.at("m1"), m2 = p.at("m2"), l1 = p.at("l1"), l2 = p.at("l2"), g = p.at("g");
  const double a = (m1 + m2) * l1 * l1 + m2 * l2 * l2;
  const double b = m2 * l1 * l2;
  const double c = m2 * l2 * l2;
  const double g1 = (m1 + m2) * g * l1;
  const double g2 = m2 * g * l2;

  MechanicalModel m;
  m.dim = 2;
  m.metric.dim = 2;
  m.metric.mass = [=](const Vector& q) {
    const double cs = std::cos(q[1]);
    Matrix mm(2, 2);
    mm << a + 2.0 * b * cs, c + b * cs, c + b * cs, c;
    return mm;
  };
  m.metric.mass_partials = [=](const Vector& q) {
    const double sn = std::sin(q[1]);
    Tensor3 dm(2);
    dm(1, 0, 0) = -2.0 * b * sn;
    dm(1, 0, 1) = -b * sn;
    dm(1, 1, 0) = -b * sn;
    return dm;
  };
  m.metric.mass_second_partials = [=](const Vector& q) {
    const double cs = std::cos(q[1]);
    Tensor4 d2m(2);
    d2m(1, 1, 0, 0) = -2.0 * b * cs;
    d2m(1, 1, 0, 1) = -b * cs;
    d2m(1, 1, 1, 0) = -b * cs;
    return d2m;
  };
  m.potential.value = [=](const Vector& q) { return -g1 * std::cos(q[0]) - g2 * std::cos(q[0] + q[1]); };
  m.potential.gradient = [=](const Vector& q) {
    const double s12 = std::sin(q[0] + q[1]);
    Vector dv(2);
    dv << g1 * std::sin(q[0]) + g2 * s12, g2 * s12;
    return dv;
  };
  m.potential.hessian = [=](const Vector& q) {
    const double c12 = std::cos(q[0] + q[1]);
    Matrix h(2, 2);
    h << g1 * std::cos(q[0]) + g2 * c12, g2 * c12, g2 * c12, g2 * c12;
    return h;
  };
  m.domain_note = "relative joint angles, any real values";
  m.domain_lower = Vector::Constant(2, -kPi);
  m.domain_upper = Vector::Constant(2, kPi);
  return m;
}

// Round sphere in colatitude/longitude coordinates, V = 0.
MechanicalModel make_sphere(const ParamMap& p) {
  const double r2 = p.at("radius") * p.at("radius");
  MechanicalModel m;
  m.dim = 2;
  m.metric.dim = 2;
  m.metric.mass = [r2](const Vector& q) {
    const double s = std::sin(q[0]);
    Matrix mm(2, 2);
    mm << r2, 0.0, 0.0, r2 * s * s;
    return mm;
  };
  m.metric.mass_partials = [r2](const Vector& q) {
    Tensor3 dm(2);
    dm(0, 1, 1) = r2 * std::sin(2.0 * q[0]);
    return dm;
  };
  m.metric.mass_second_partials = [r2](const Vector& q) {
    Tensor4 d2m(2);
    d2m(0, 0, 1, 1) = 2.0 * r2 * std::cos(2.0 * q[0]);
    return d2m;
  };
  m.potential.value = [](const Vector&) { return 0.0; };
  m.potential.gradient = [](const Vector&) { return Vector::Zero(2); };
  m.potential.hessian = [](const Vector&) { return Matrix::Zero(2, 2); };
  m.domain_note = "colatitude strictly inside (0, pi); degenerate at the poles";
  m.domain_lower = (Vector(2) << 0.1, -kPi).finished();
  m.domain_upper = (Vector(2) << kPi - 0.1, kPi).finished();
  m.test_only = true;
  return m;
}

std::vector<Vector> spd_grid(const MechanicalModel& m) {
  std::vector<Vector> pts;
  const Vector span = m.domain_upper - m.domain_lower;
  if (m.dim == 1) {
    for (int i = 0; i < 100; ++i) pts.push_back(m.domain_lower + span * (i / 99.0));
  } else if (m.dim == 2) {
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        Vector q = m.domain_lower;
        q[0] += span[0] * (i / 9.0);
        q[1] += span[1] * (j / 9.0);
        pts.push_back(q);
      }
  } else {
    std::mt19937_64 rng(12345);
    for (int i = 0; i < 100; ++i) pts.push_back(sample_configuration(m, rng));
  }
  return pts;
}

double rel_gap(double analytic, double fd) { return std::abs(analytic - fd) / std::max(1.0, std::abs(analytic)); }

void validate(const MechanicalModel& m) {
  for (const Vector& q : spd_grid(m)) {
    Eigen::LLT<Matrix> llt(m.metric.mass(q));
    if (llt.info() != Eigen::Success) {
      throw ModelError("model '" + m.name + "': mass matrix not positive definite at " + format_vector(q));
    }
  }

  constexpr double kTol = 1e-6;
  const MetricProvider fd_metric = finite_difference_only(m.metric);
  const PotentialProvider fd_pot = finite_difference_only(m.potential);
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Vector q = sample_configuration(m, rng);
    const int n = m.dim;
    if (m.metric.mass_partials) {
      const Tensor3 an = m.metric.mass_partials(q);
      const Tensor3 fd = mass_partials(fd_metric, q);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) worst = std::max(worst, rel_gap(an(j, k, l), fd(j, k, l)));
    }
    if (m.metric.mass_second_partials && m.metric.mass_partials) {
      const Tensor4 an = m.metric.mass_second_partials(q);
      for (int i = 0; i < n; ++i) {
        const double h = m.metric.fd_step_second * std::max(1.0, std::abs(q[i]));
        Vector qp = q, qm = q;
        qp[i] += h;
        qm[i] -= h;
        const Tensor3 dp = m.metric.mass_partials(qp);
        const Tensor3 dmm = m.metric.mass_partials(qm);
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
              worst = std::max(worst, rel_gap(an(i, j, k, l), (dp(j, k, l) - dmm(j, k, l)) / (2.0 * h)));
      }
    }
    if (m.potential.gradient) {
      const Vector an = m.potential.gradient(q);
      const Vector fd = potential_gradient(fd_pot, q);
      for (int j = 0; j < n; ++j) worst = std::max(worst, rel_gap(an[j], fd[j]));
    }
    if (m.potential.hessian && m.potential.gradient) {
      PotentialProvider grad_only = m.potential;
      grad_only.hessian = nullptr;
      const Matrix an = m.potential.hessian(q);
      const Matrix fd = potential_hessian(grad_only, q);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) worst = std::max(worst, rel_gap(an(j, k), fd(j, k)));
    }
  }
  if (worst > kTol) {
    throw ModelError("model '" + m.name + "': analytic derivatives disagree with finite differences (" +
                     std::to_string(worst) + ")");
  }
}

}  // namespace

const std::vector<ModelSpec>& list_models() {
  static const std::vector<ModelSpec> catalog = {
      {"flat",
       "Euclidean point mass, M = I, V = stiffness/2 |q|^2",
       {{"n", 2.0, "dimension", true, true}, {"stiffness", 0.0, "spring constant [N/m]", false, false}}},
      {"pendulum",
       "single rigid pendulum, M = m l^2, V = -m g l cos q",
       {{"m", 1.0, "bob mass [kg]", true, false},
        {"l", 1.0, "rod length [m]", true, false},
        {"g", 9.81, "gravity [m/s^2]", false, false}}},
      {"double_pendulum",
       "planar two-link chain with point masses, relative joint angles",
       {{"m1", 1.0, "first mass [kg]", true, false},
        {"m2", 1.0, "second mass [kg]", true, false},
        {"l1", 1.0, "first link length [m]", true, false},
        {"l2", 1.0, "second link length [m]", true, false},
        {"g", 9.81, "gravity [m/s^2]", false, false}}},
      {"sphere",
       "round 2-sphere metric diag(r^2, r^2 sin^2 q1), V = 0 (test metric)",
       {{"radius", 1.0, "sphere radius", true, false}}},
  };
  return catalog;
}

MechanicalModel build_model(const std::string& name, const ParamMap& params) {
  const ModelSpec& spec = find_spec(name);
  const ParamMap resolved = resolve_params(spec, params);
  MechanicalModel m;
  if (name == "flat") {
    m = make_flat(resolved);
  } else if (name == "pendulum") {
    m = make_pendulum(resolved);
  } else if (name == "double_pendulum") {
    m = make_double_pendulum(resolved);
  } else {
    m = make_sphere(resolved);
  }
  m.name = name;
  m.params = resolved;
  validate(m);
  return m;
}

Vector sample_configuration(const MechanicalModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector q(model.dim);
  for (int j = 0; j < model.dim; ++j) {
    q[j] = model.domain_lower[j] + (model.domain_upper[j] - model.domain_lower[j]) * unit(rng);
  }
  return q;
}

}  // namespace covpmp
