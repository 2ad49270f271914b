#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "covpmp/checks.hpp"
#include "covpmp/geometry.hpp"
#include "covpmp/models.hpp"
#include "frozen_tables.hpp"

using namespace covpmp;
namespace ct = covpmp::testing;

namespace {

template <int R, std::size_t K>
double max_diff(const Tensor<R>& t, const double (&table)[K]) {
  EXPECT_EQ(t.size(), K);
  double m = 0.0;
  for (std::size_t i = 0; i < K; ++i) m = std::max(m, std::abs(t.data()[i] - table[i]));
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(Geometry, FlatHasNoConnection) {
  const MechanicalModel m = build_model("flat", {{"n", 2}});
  const GeometryEval g = eval_geometry(m.metric, vec({0.4, -1.3}));
  EXPECT_EQ(g.christoffel.max_abs(), 0.0);
  EXPECT_EQ(g.riemann.max_abs(), 0.0);
}

TEST(Geometry, PendulumHasNoConnection) {
  const MechanicalModel m = build_model("pendulum");
  const GeometryEval g = eval_geometry(m.metric, vec({0.9}));
  EXPECT_EQ(g.christoffel.max_abs(), 0.0);
  EXPECT_EQ(g.riemann.max_abs(), 0.0);
}

TEST(Geometry, SphereMatchesSymbolicTable) {
  const MechanicalModel m = build_model("sphere");
  const GeometryEval g = eval_geometry(m.metric, vec({std::numbers::pi / 4, 0.3}));
  EXPECT_LE(max_diff(g.christoffel, ct::kSphereChristoffelPiOver4), 1e-12);
  EXPECT_LE(max_diff(g.riemann, ct::kSphereRiemannPiOver4), 1e-8);
  EXPECT_NEAR(g.christoffel(0, 1, 1), -0.5, 1e-14);
  EXPECT_NEAR(g.christoffel(1, 0, 1), 1.0, 1e-14);
}

TEST(Geometry, SphereSectionalCurvature) {
  const MechanicalModel m = build_model("sphere");
  for (double theta : {0.3, std::numbers::pi / 4, 1.2, 2.5}) {
    const GeometryEval g = eval_geometry(m.metric, vec({theta, -0.7}));
    double r1212 = 0.0;
    for (int p = 0; p < 2; ++p) r1212 += g.metric(0, p) * g.riemann(p, 1, 0, 1);
    EXPECT_NEAR(r1212 / g.metric.determinant(), ct::kSphereSectionalCurvature[0], 1e-8) << "theta " << theta;
  }
}

TEST(Geometry, DoublePendulumMatchesSymbolicTable) {
  const MechanicalModel m = build_model("double_pendulum");
  const GeometryEval g = eval_geometry(m.metric, vec({0.3, 0.7}));
  EXPECT_LE(max_diff(g.christoffel, ct::kDoublePendulumChristoffelP1), 1e-12);
  EXPECT_LE(max_diff(g.riemann, ct::kDoublePendulumRiemannP1), 1e-10);
}

TEST(Geometry, IndexRaisingExamples) {
  const MechanicalModel flat = build_model("flat", {{"n", 2}});
  const GeometryEval g = eval_geometry(flat.metric, vec({0, 0}), GeometryLevel::Connection);
  EXPECT_TRUE(raise_index(g, vec({1, 2})).isApprox(vec({1, 2})));
  EXPECT_TRUE(lower_index(g, vec({1, 2})).isApprox(vec({1, 2})));

  MetricProvider diag;
  diag.dim = 2;
  diag.mass = [](const Vector&) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 2.0;
    m(1, 1) = 1.0;
    return m;
  };
  const GeometryEval gd = eval_geometry(diag, vec({0.1, 0.2}), GeometryLevel::Connection);
  EXPECT_LE((raise_index(gd, vec({1, 2})) - vec({0.5, 2})).norm(), 1e-15);
  EXPECT_LE((lower_index(gd, vec({0.5, 2})) - vec({1, 2})).norm(), 1e-15);
}

TEST(Geometry, CurvatureForceExamples) {
  const MechanicalModel flat = build_model("flat", {{"n", 2}});
  const GeometryEval gf = eval_geometry(flat.metric, vec({1, 1}));
  EXPECT_EQ(curvature_force(gf, vec({1, 2}), vec({3, 4})).norm(), 0.0);

  const MechanicalModel sphere = build_model("sphere");
  const GeometryEval gs = eval_geometry(sphere.metric, vec({std::numbers::pi / 4, 0}));
  EXPECT_EQ(curvature_force(gs, vec({0, 0}), vec({3, 4})).norm(), 0.0);

  // brute-force contraction of the frozen table
  const Vector zeta = vec({1, 0}), xi = vec({0, 1});
  Vector expected = Vector::Zero(2);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          expected[j] += ct::kSphereRiemannPiOver4[((i * 2 + k) * 2 + l) * 2 + j] * zeta[k] * zeta[l] * xi[i];
  EXPECT_LE((curvature_force(gs, zeta, xi) - expected).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(Geometry, CovariantHessianExamples) {
  MetricProvider flat_metric = build_model("flat", {{"n", 2}}).metric;
  PotentialProvider zero;
  zero.value = [](const Vector&) { return 0.0; };
  const GeometryEval g = eval_geometry(flat_metric, vec({0.2, 0.5}));
  EXPECT_EQ(covariant_hessian(g, zero).norm(), 0.0);

  const MechanicalModel spring = build_model("flat", {{"n", 2}, {"stiffness", 1.0}});
  const GeometryEval gs = eval_geometry(spring.metric, vec({0.2, 0.5}));
  EXPECT_LE((covariant_hessian(gs, spring.potential) - Matrix::Identity(2, 2)).norm(), 1e-12);

  // m g l = 1
  const MechanicalModel pend = build_model("pendulum", {{"g", 1.0}});
  const GeometryEval gp = eval_geometry(pend.metric, vec({0.0}));
  EXPECT_NEAR(covariant_hessian(gp, pend.potential)(0, 0), 1.0, 1e-14);
}

TEST(Geometry, CovariantTimeDerivativeReducesWithoutConnection) {
  const MechanicalModel flat = build_model("flat", {{"n", 2}});
  const GeometryEval g = eval_geometry(flat.metric, vec({0.2, 0.5}));
  EXPECT_EQ(covariant_time_derivative_covector(g, vec({1, 2}), vec({3, 4}), vec({5, 6})), vec({5, 6}));
  const MechanicalModel sphere = build_model("sphere");
  const GeometryEval gs = eval_geometry(sphere.metric, vec({1.0, 0.5}));
  EXPECT_EQ(covariant_time_derivative_covector(gs, vec({0, 0}), vec({3, 4}), vec({5, 6})), vec({5, 6}));
}

// d/dt (xi_j phi^j) splits into covariant rates along a sphere parallel.
TEST(Geometry, CovariantDerivativeProductRuleOnSphere) {
  const MechanicalModel sphere = build_model("sphere");
  auto q_of = [](double t) { return vec({1.0, 0.8 * t}); };
  const Vector zeta = vec({0.0, 0.8});
  auto xi_of = [](double t) { return vec({std::sin(t), std::cos(2 * t)}); };
  auto xi_dot = [](double t) { return vec({std::cos(t), -2 * std::sin(2 * t)}); };
  auto phi_of = [](double t) { return vec({t * t, 1.0 + t}); };
  const double t = 0.4, h = 1e-5;
  auto pairing = [&](double s) { return xi_of(s).dot(phi_of(s)); };
  const double lhs = (pairing(t + h) - pairing(t - h)) / (2 * h);
  const GeometryEval g = eval_geometry(sphere.metric, q_of(t), GeometryLevel::Connection);
  const Vector dxi = covariant_time_derivative_covector(g, zeta, xi_of(t), xi_dot(t));
  const Vector dphi = covariant_time_derivative_vector(g, zeta, phi_of(t), vec({2 * t, 1.0}));
  EXPECT_NEAR(lhs, dxi.dot(phi_of(t)) + xi_of(t).dot(dphi), 1e-8);
}

TEST(Geometry, RicciIdentityExamples) {
  const MechanicalModel flat = build_model("flat", {{"n", 3}});
  const RicciResidual rf = check_ricci_identity(flat.metric, vec({0.1, 0.2, 0.3}));
  EXPECT_EQ(rf.metric, 0.0);
  EXPECT_EQ(rf.inverse, 0.0);

  const MechanicalModel dp = build_model("double_pendulum");
  EXPECT_LE(check_ricci_identity(dp.metric, vec({0.3, 0.7})).max(), 1e-12);

  const MechanicalModel sphere = build_model("sphere");
  EXPECT_LE(check_ricci_identity(finite_difference_only(sphere.metric, 1e-5), vec({1.1, 0.4})).max(), 1e-8);
}

TEST(Geometry, FiniteDifferencePathMatchesAnalytic) {
  const MechanicalModel dp = build_model("double_pendulum");
  const Vector q = vec({0.3, 0.7});
  const GeometryEval a = eval_geometry(dp.metric, q);
  const GeometryEval f = eval_geometry(finite_difference_only(dp.metric), q);
  EXPECT_LE((f.christoffel - a.christoffel).max_abs(), 1e-8);
  EXPECT_LE((f.riemann - a.riemann).max_abs(), 1e-5);
}

class GeometrySuite : public ::testing::TestWithParam<std::string> {};

TEST_P(GeometrySuite, AllInvariantsHold) {
  const CheckReport r = run_geometry_checks(build_model(GetParam()));
  for (const CheckItem& it : r.items) EXPECT_TRUE(it.passed) << it.name << " = " << it.value << " > " << it.threshold;
  EXPECT_FALSE(r.items.empty());
}

INSTANTIATE_TEST_SUITE_P(Models, GeometrySuite, ::testing::Values("flat", "pendulum", "double_pendulum", "sphere"));
