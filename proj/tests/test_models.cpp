#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "covpmp/dynamics.hpp"
#include "covpmp/errors.hpp"
#include "covpmp/models.hpp"
#include "frozen_tables.hpp"

using namespace covpmp;
namespace ct = covpmp::testing;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

template <std::size_t K>
double max_diff(const Matrix& m, const double (&table)[K]) {
  double d = 0.0;
  for (std::size_t i = 0; i < K; ++i) d = std::max(d, std::abs(m(i / 2, i % 2) - table[i]));
  return d;
}

const ModelSpec* find(const std::string& name) {
  for (const ModelSpec& s : list_models())
    if (s.name == name) return &s;
  return nullptr;
}

}  // namespace

TEST(Models, CatalogContents) {
  const ModelSpec* dp = find("double_pendulum");
  ASSERT_NE(dp, nullptr);
  std::vector<std::string> names;
  for (const ParamSpec& p : dp->params) names.push_back(p.name);
  EXPECT_EQ(names, (std::vector<std::string>{"m1", "m2", "l1", "l2", "g"}));

  const ModelSpec* flat = find("flat");
  ASSERT_NE(flat, nullptr);
  EXPECT_TRUE(std::any_of(flat->params.begin(), flat->params.end(), [](const ParamSpec& p) { return p.name == "n"; }));
}

TEST(Models, EveryEntryBuildsWithDefaults) {
  for (const ModelSpec& s : list_models()) {
    const MechanicalModel m = build_model(s.name);
    EXPECT_EQ(m.name, s.name);
    EXPECT_GT(m.dim, 0);
    for (const ParamSpec& p : s.params) EXPECT_EQ(m.params.at(p.name), p.default_value) << s.name << "." << p.name;
  }
  EXPECT_TRUE(build_model("sphere").test_only);
}

TEST(Models, FlatIsIdentityWithZeroPotential) {
  const MechanicalModel m = build_model("flat", {{"n", 2}});
  EXPECT_EQ(m.metric.mass(vec({3, -1})), Matrix::Identity(2, 2));
  EXPECT_EQ(m.potential.value(vec({3, -1})), 0.0);
}

TEST(Models, PendulumUnitParameters) {
  const MechanicalModel m = build_model("pendulum", {{"m", 1}, {"l", 1}, {"g", 1}});
  EXPECT_EQ(m.metric.mass(vec({0.4}))(0, 0), 1.0);
  EXPECT_NEAR(m.potential.value(vec({0.4})), -std::cos(0.4), 1e-15);
}

TEST(Models, DoublePendulumMatchesSymbolicTable) {
  const MechanicalModel m = build_model("double_pendulum");
  EXPECT_LE(max_diff(m.metric.mass(vec({0, 0})), ct::kDoublePendulumMassOrigin), 1e-14);
  EXPECT_NEAR(m.potential.value(vec({0, 0})), ct::kDoublePendulumPotentialOrigin[0], 1e-12);
  EXPECT_LE(max_diff(m.metric.mass(vec({0.3, 0.7})), ct::kDoublePendulumMassP1), 1e-14);
  EXPECT_NEAR(m.potential.value(vec({0.3, 0.7})), ct::kDoublePendulumPotentialP1[0], 1e-12);

  const MechanicalModel c = build_model("double_pendulum", {{"m1", 1.5}, {"m2", 0.8}, {"l1", 1.2}, {"l2", 0.9}});
  EXPECT_LE(max_diff(c.metric.mass(vec({0.3, 0.7})), ct::kDoublePendulumMassCustomP1), 1e-14);
  EXPECT_NEAR(energy(c, PhaseState{vec({0.3, 0.7}), vec({0.5, -0.2})}), ct::kDoublePendulumEnergyCustomP1[0], 1e-12);
}

TEST(Models, MassMatrixIsPositiveDefiniteOnDomain) {
  std::mt19937_64 rng(7);
  for (const ModelSpec& s : list_models()) {
    const MechanicalModel m = build_model(s.name);
    for (int i = 0; i < 200; ++i) {
      const Matrix mass = m.metric.mass(sample_configuration(m, rng));
      EXPECT_LE((mass - mass.transpose()).norm(), 0.0);
      Eigen::SelfAdjointEigenSolver<Matrix> es(mass);
      EXPECT_GT(es.eigenvalues().minCoeff(), 0.0) << s.name;
    }
  }
}

TEST(Models, AnalyticModelsSatisfyRicciIdentity) {
  std::mt19937_64 rng(11);
  for (const std::string name : {"double_pendulum", "sphere"}) {
    const MechanicalModel m = build_model(name);
    for (int i = 0; i < 50; ++i) EXPECT_LE(check_ricci_identity(m.metric, sample_configuration(m, rng)).max(), 1e-12);
  }
}

TEST(Models, RejectsBadInput) {
  EXPECT_THROW(build_model("triple_pendulum"), ModelError);
  EXPECT_THROW(build_model("pendulum", {{"mass", 1}}), ModelError);
  EXPECT_THROW(build_model("pendulum", {{"m", -1}}), ModelError);
  EXPECT_THROW(build_model("flat", {{"n", 1.5}}), ModelError);
  EXPECT_THROW(build_model("flat", {{"n", 0}}), ModelError);
}
