#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "covpmp/cli.hpp"
#include "covpmp/config.hpp"
#include "covpmp/errors.hpp"
#include "covpmp/io.hpp"
#include "json.hpp"

using namespace covpmp;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "model": {"name": "flat", "params": {"n": 2}},
  "cost": {"kind": "quadratic_control"},
  "horizon_T": 1.0,
  "steps_N": 10,
  "boundary": {"case": "A", "q0": [0, 0], "zeta0": [1, 0]}
})";

std::string scenario_path(const std::string& name) {
  return std::string(COVPMP_SOURCE_DIR) + "/scenarios/" + name + ".json";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("covpmp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::vector<std::string>& args) {
    out_.str("");
    err_.str("");
    return run_command(args, out_, err_);
  }

  std::vector<std::string> with_outputs(std::vector<std::string> args, const std::string& tag) {
    args.insert(args.end(), {"--trajectory", (dir_ / (tag + ".csv")).string(), "--report",
                             (dir_ / (tag + ".json")).string()});
    return args;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST(Config, MinimalConfigGetsDefaults) {
  const ScenarioConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.model.name, "flat");
  EXPECT_EQ(c.solver.tol, 1e-9);
  EXPECT_EQ(c.solver.max_iter, 100);
  EXPECT_EQ(c.solver.integrator, Integrator::Rk4);
  EXPECT_EQ(c.solver.fd_step, 1e-7);
  EXPECT_EQ(c.output.trajectory_path, "trajectory.csv");
  EXPECT_EQ(c.output.report_path, "report.json");
  EXPECT_EQ(c.direct_steps(), 10);
}

TEST(Config, NegativeHorizonNamed) {
  auto j = nlohmann::json::parse(kMinimal);
  j["horizon_T"] = -1.0;
  EXPECT_TRUE(any_contains(problems_of(j.dump()), "horizon_T"));
}

TEST(Config, UnknownCostKindListsAllowed) {
  auto j = nlohmann::json::parse(kMinimal);
  j["cost"]["kind"] = "cubic";
  const auto p = problems_of(j.dump());
  ASSERT_EQ(p.size(), 1u);
  for (const std::string& k : cost_kind_names()) EXPECT_NE(p[0].find(k), std::string::npos) << p[0];
}

TEST(Config, CollectsEveryProblem) {
  auto j = nlohmann::json::parse(kMinimal);
  j["steps_N"] = "ten";
  j["solver"] = {{"tol", -1}, {"integrater", "rk4"}};
  j["boundary"]["q0"] = {0, 0, 0};
  const auto p = problems_of(j.dump());
  EXPECT_TRUE(any_contains(p, "steps_N: expected an integer"));
  EXPECT_TRUE(any_contains(p, "solver.tol"));
  EXPECT_TRUE(any_contains(p, "solver.integrater: unknown key"));
  EXPECT_TRUE(any_contains(p, "boundary.q0"));
  EXPECT_GE(p.size(), 4u);
}

TEST(Config, RejectsMalformedJsonAndBadModel) {
  EXPECT_THROW(parse_config("{ not json"), ConfigError);
  auto j = nlohmann::json::parse(kMinimal);
  j["model"]["name"] = "robot";
  EXPECT_TRUE(any_contains(problems_of(j.dump()), "model"));
}

TEST(Config, SerializeRoundTrip) {
  for (const std::string name : {"rest_to_rest", "double_pendulum_maneuver", "pendulum_velocity_penalty",
                                 "flat_endpoints", "double_pendulum_free", "sphere_geodesic"}) {
    const ScenarioConfig c = load_config(scenario_path(name));
    const std::string once = serialize_config(c);
    EXPECT_EQ(serialize_config(parse_config(once)), once) << name;
  }
}

TEST(Io, SingleNodeTrajectoryHasTwoLines) {
  Trajectory tr;
  tr.dim = 1;
  tr.t = {0.0};
  tr.states = {{Vector::Constant(1, 0.5), Vector::Constant(1, -1.0)}};
  tr.controls = {Vector::Zero(1)};
  tr.controls_cov = {Vector::Zero(1)};
  tr.energy = {0.5};
  tr.running_cost = {0.0};
  const std::string csv = trajectory_to_csv(tr);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.back(), '\n');
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,q_1,zeta_1,u_1,ucov_1,xi_1,pi_1,energy,running_cost");
}

TEST(Io, CsvRoundTripIsBitIdentical) {
  const ScenarioConfig c = load_config(scenario_path("double_pendulum_maneuver"));
  const MechanicalModel m = build_model(c);
  const Trajectory tr = integrate_coupled(m, c.cost, {c.boundary.q0, c.boundary.zeta0},
                                          {Vector::Constant(2, 0.7), Vector::Constant(2, -0.3)}, 1.0, 50);
  const std::string csv = trajectory_to_csv(tr);
  const Trajectory back = trajectory_from_csv(csv);
  ASSERT_EQ(back.size(), tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_EQ(back.t[i], tr.t[i]);
    EXPECT_EQ(back.states[i].q, tr.states[i].q);
    EXPECT_EQ(back.states[i].zeta, tr.states[i].zeta);
    EXPECT_EQ(back.adjoints[i].xi, tr.adjoints[i].xi);
    EXPECT_EQ(back.adjoints[i].pi, tr.adjoints[i].pi);
    EXPECT_EQ(back.controls[i], tr.controls[i]);
    EXPECT_EQ(back.energy[i], tr.energy[i]);
    EXPECT_EQ(back.running_cost[i], tr.running_cost[i]);
  }
  EXPECT_EQ(trajectory_to_csv(back), csv);
}

TEST(Io, UnwritablePathIsNamed) {
  try {
    write_text("/nonexistent_dir/x/out.csv", "x");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent_dir/x/out.csv"), std::string::npos);
  }
}

TEST_F(CliTest, CheckOnDoublePendulum) {
  const fs::path cfg = dir_ / "dp.json";
  std::ofstream(cfg) << R"({"model": {"name": "double_pendulum"}, "horizon_T": 1, "steps_N": 10,
    "boundary": {"case": "A", "q0": [0, 0], "zeta0": [0, 0]}})";
  EXPECT_EQ(run(with_outputs({"check", cfg.string()}, "check")), kExitOk) << err_.str();
  const auto rep = nlohmann::json::parse(slurp(dir_ / "check.json"));
  EXPECT_TRUE(rep["passed"].get<bool>());
  EXPECT_GE(rep["geometry"].size(), 5u);
}

TEST_F(CliTest, SolveRestToRest) {
  EXPECT_EQ(run(with_outputs({"solve", scenario_path("rest_to_rest")}, "r2r")), kExitOk) << err_.str();
  const Trajectory tr = read_trajectory((dir_ / "r2r.csv").string());
  EXPECT_NEAR(tr.controls.front()[0], 6.0, 1e-6);
  EXPECT_NEAR(tr.controls.back()[0], -6.0, 1e-6);
  const auto rep = nlohmann::json::parse(slurp(dir_ / "r2r.json"));
  EXPECT_TRUE(rep["shoot"]["converged"].get<bool>());
}

TEST_F(CliTest, SolveIterationLimitExitsTwo) {
  auto j = nlohmann::json::parse(slurp(scenario_path("double_pendulum_maneuver")));
  j["solver"]["max_iter"] = 1;
  const fs::path cfg = dir_ / "limited.json";
  std::ofstream(cfg) << j.dump();
  EXPECT_EQ(run(with_outputs({"solve", cfg.string()}, "lim")), kExitNotConverged);
  const auto rep = nlohmann::json::parse(slurp(dir_ / "lim.json"));
  EXPECT_FALSE(rep["shoot"]["converged"].get<bool>());
  EXPECT_EQ(rep["shoot"]["iterations"].get<int>(), 1);
  EXPECT_TRUE(fs::exists(dir_ / "lim.csv"));
}

TEST_F(CliTest, SimulateAndDirect) {
  EXPECT_EQ(run(with_outputs({"simulate", scenario_path("sphere_geodesic")}, "sim")), kExitOk) << err_.str();
  EXPECT_EQ(run(with_outputs({"direct", scenario_path("rest_to_rest")}, "dir")), kExitOk) << err_.str();
  const auto rep = nlohmann::json::parse(slurp(dir_ / "dir.json"));
  EXPECT_NEAR(rep["direct"]["cost"].get<double>(), 6.0, 0.06);
}

TEST_F(CliTest, CompareFlatEndpoints) {
  EXPECT_EQ(run(with_outputs({"compare", scenario_path("flat_endpoints")}, "cmp")), kExitOk) << err_.str();
  const auto rep = nlohmann::json::parse(slurp(dir_ / "cmp.json"));
  EXPECT_TRUE(rep["passed"].get<bool>());
}

TEST_F(CliTest, ConfigAndArgumentErrorsExitOne) {
  EXPECT_EQ(run({"solve", (dir_ / "missing.json").string()}), kExitConfig);
  EXPECT_EQ(run({"launch", scenario_path("rest_to_rest")}), kExitConfig);
  EXPECT_EQ(run({}), kExitConfig);
  const fs::path cfg = dir_ / "bad.json";
  std::ofstream(cfg) << R"({"model": {"name": "flat"}, "horizon_T": -2, "steps_N": 1})";
  EXPECT_EQ(run({"solve", cfg.string()}), kExitConfig);
  EXPECT_NE(err_.str().find("horizon_T"), std::string::npos);
  EXPECT_NE(err_.str().find("steps_N"), std::string::npos);
}

TEST_F(CliTest, OutputsAreDeterministic) {
  for (const std::string cmd : {"solve", "direct", "simulate"}) {
    ASSERT_EQ(run(with_outputs({cmd, scenario_path("pendulum_velocity_penalty")}, "a")), kExitOk) << cmd;
    ASSERT_EQ(run(with_outputs({cmd, scenario_path("pendulum_velocity_penalty")}, "b")), kExitOk) << cmd;
    EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv")) << cmd;
    EXPECT_EQ(slurp(dir_ / "a.json"), slurp(dir_ / "b.json")) << cmd;
  }
}
