#include "covpmp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "covpmp/checks.hpp"
#include "covpmp/config.hpp"
#include "covpmp/errors.hpp"
#include "covpmp/io.hpp"

namespace covpmp {

namespace {

using ojson = nlohmann::ordered_json;

ojson vec(const Vector& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ojson check_json(const CheckReport& r) {
  ojson a = ojson::array();
  for (const auto& c : r.items) {
    a.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"passed", c.passed}});
  }
  return a;
}

void print_checks(std::ostream& out, const CheckReport& r) {
  for (const auto& c : r.items) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << c.value << " (bound " << c.threshold << ")\n";
  }
}

ojson scenario_json(const ScenarioConfig& cfg, const MechanicalModel& model) {
  ojson params = ojson::object();
  for (const auto& [k, v] : model.params) params[k] = v;
  return {{"model", model.name},
          {"params", params},
          {"cost", to_string(cfg.cost.kind)},
          {"alpha", cfg.cost.alpha},
          {"boundary_case", to_string(cfg.boundary.kind)},
          {"horizon_T", cfg.horizon_T},
          {"steps_N", cfg.steps_N}};
}

ojson shoot_json(const ShootReport& rep, double optimality) {
  ojson h = ojson::array();
  for (double v : rep.newton_history) h.push_back(v);
  const auto& last = rep.trajectory.states.back();
  return {{"converged", rep.converged},
          {"message", rep.message},
          {"iterations", rep.iterations},
          {"residual_norm", rep.residual_norm},
          {"cost", rep.cost},
          {"optimality_residual", optimality},
          {"unknowns", vec(rep.unknowns)},
          {"q_T", vec(last.q)},
          {"zeta_T", vec(last.zeta)},
          {"newton_history", h}};
}

ojson direct_json(const DirectReport& rep) {
  ojson h = ojson::array();
  for (double v : rep.history) h.push_back(v);
  return {{"converged", rep.converged},
          {"exhausted", rep.exhausted},
          {"message", rep.message},
          {"iterations", rep.iterations},
          {"evaluations", rep.evaluations},
          {"initial_cost", rep.initial_cost},
          {"cost", rep.final.total},
          {"running_cost", rep.final.running},
          {"penalty", rep.final.penalty},
          {"terminal_residual", vec(rep.final.terminal_residual)},
          {"history", h}};
}

PhaseState initial_phase(const ScenarioConfig& cfg, int n) {
  PhaseState s{cfg.boundary.q0, cfg.boundary.zeta0};
  if (s.zeta.size() != n) s.zeta = Vector::Zero(n);
  return s;
}

DirectProblem direct_problem(const ScenarioConfig& cfg, const MechanicalModel& model) {
  DirectProblem p =
      make_direct_problem(model, cfg.cost, cfg.boundary, cfg.horizon_T, cfg.direct_steps(), cfg.direct.penalty_weight);
  p.interpolation = cfg.direct.interpolation;
  return p;
}

DirectOptions direct_options(const ScenarioConfig& cfg) {
  DirectOptions o;
  o.max_evals = cfg.direct.max_evals;
  o.max_iter = cfg.direct.max_iter;
  return o;
}

ShootOptions shoot_options(const ScenarioConfig& cfg) {
  ShootOptions o;
  o.tol = cfg.solver.tol;
  o.max_iter = cfg.solver.max_iter;
  o.integrator = cfg.solver.integrator;
  o.fd_step = cfg.solver.fd_step;
  return o;
}

struct Context {
  ScenarioConfig cfg;
  MechanicalModel model;
  std::string trajectory_path;
  std::string report_path;
  std::ostream& out;
};

void emit(const Context& c, const ojson& report) { write_text(c.report_path, report.dump(2) + "\n"); }

int cmd_check(Context& c) {
  const CheckReport geo = run_geometry_checks(c.model);
  const CheckReport cost = run_cost_checks(c.model, c.cfg.cost);
  const bool ok = geo.passed() && cost.passed();
  ojson rep{{"command", "check"}, {"scenario", scenario_json(c.cfg, c.model)}};
  rep["geometry"] = check_json(geo);
  rep["cost"] = check_json(cost);
  rep["passed"] = ok;
  emit(c, rep);
  print_checks(c.out, geo);
  print_checks(c.out, cost);
  return ok ? kExitOk : kExitCheckViolation;
}

int cmd_simulate(Context& c) {
  const int n = c.model.dim;
  const Vector u = c.cfg.control.size() == n ? c.cfg.control : Vector::Zero(n);
  const Trajectory traj = simulate(
      c.model, c.cfg.cost, initial_phase(c.cfg, n), c.cfg.horizon_T, c.cfg.steps_N,
      [&](double, const PhaseState&) { return u; }, c.cfg.solver.integrator);
  write_trajectory(traj, c.trajectory_path);

  const double e0 = traj.energy.front();
  double drift = 0.0;
  for (double e : traj.energy) drift = std::max(drift, std::abs(e - e0));
  ojson rep{{"command", "simulate"}, {"scenario", scenario_json(c.cfg, c.model)}};
  rep["control"] = vec(u);
  rep["q_T"] = vec(traj.states.back().q);
  rep["zeta_T"] = vec(traj.states.back().zeta);
  rep["energy_initial"] = e0;
  rep["energy_final"] = traj.energy.back();
  rep["max_energy_drift"] = drift;
  rep["relative_energy_drift"] = e0 != 0.0 ? drift / std::abs(e0) : drift;
  rep["cost"] = traj.cost();
  emit(c, rep);
  c.out << "simulate: T = " << c.cfg.horizon_T << ", N = " << c.cfg.steps_N << ", energy drift " << drift << "\n";
  return kExitOk;
}

int cmd_solve(Context& c) {
  const ShootReport rep =
      shoot(c.model, c.cfg.cost, c.cfg.boundary, c.cfg.horizon_T, c.cfg.steps_N, shoot_options(c.cfg),
            c.cfg.solver.initial_guess);
  write_trajectory(rep.trajectory, c.trajectory_path);
  const double opt = optimality_residual(c.model, c.cfg.cost, rep.trajectory);
  ojson out{{"command", "solve"}, {"scenario", scenario_json(c.cfg, c.model)}};
  out["shoot"] = shoot_json(rep, opt);
  emit(c, out);
  c.out << "solve: " << rep.message << ", iterations " << rep.iterations << ", residual " << rep.residual_norm
        << ", J = " << rep.cost << "\n";
  return rep.converged ? kExitOk : kExitNotConverged;
}

int cmd_direct(Context& c) {
  const DirectProblem p = direct_problem(c.cfg, c.model);
  const DirectReport rep = optimize(p, direct_options(c.cfg));
  DirectProblem solved = p;
  solved.control_grid = rep.control_grid;
  solved.zeta0 = rep.zeta0;
  write_trajectory(direct_trajectory(solved), c.trajectory_path);
  ojson out{{"command", "direct"}, {"scenario", scenario_json(c.cfg, c.model)}};
  out["direct_N"] = p.N;
  out["penalty_weight"] = p.penalty_weight;
  out["interpolation"] = to_string(p.interpolation);
  out["direct"] = direct_json(rep);
  emit(c, out);
  c.out << "direct: " << rep.message << ", iterations " << rep.iterations << ", J~ = " << rep.final.total << "\n";
  return rep.exhausted ? kExitNotConverged : kExitOk;
}

int cmd_compare(Context& c) {
  ojson out{{"command", "compare"}, {"scenario", scenario_json(c.cfg, c.model)}};
  const ShootReport ind = shoot(c.model, c.cfg.cost, c.cfg.boundary, c.cfg.horizon_T, c.cfg.steps_N,
                                shoot_options(c.cfg), c.cfg.solver.initial_guess);
  write_trajectory(ind.trajectory, c.trajectory_path);
  out["indirect"] = shoot_json(ind, optimality_residual(c.model, c.cfg.cost, ind.trajectory));
  if (!ind.converged) {
    emit(c, out);
    c.out << "compare: shooting did not converge (" << ind.message << ")\n";
    return kExitNotConverged;
  }

  const DirectProblem p = direct_problem(c.cfg, c.model);
  const DirectReport cold = optimize(p, direct_options(c.cfg));

  DirectProblem warm = p;
  warm.control_grid = sample_controls(ind.trajectory, c.cfg.horizon_T, p.N);
  warm.zeta0 = ind.trajectory.states.front().zeta;
  const DirectReport hot = optimize(warm, direct_options(c.cfg));

  const double j_ind = ind.cost;
  const double j_dir = cold.final.total;
  const double agree = std::abs(j_ind - j_dir);
  const double agree_bound = 1e-2 * (1.0 + j_ind);
  const double improve = hot.initial_cost - hot.final.total;
  const double improve_bound = 1e-6 * (1.0 + hot.initial_cost);
  const bool ok = agree <= agree_bound && improve <= improve_bound && !cold.exhausted && !hot.exhausted;

  out["direct_N"] = p.N;
  out["penalty_weight"] = p.penalty_weight;
  out["interpolation"] = to_string(p.interpolation);
  out["direct_from_zero"] = direct_json(cold);
  out["direct_from_indirect"] = direct_json(hot);
  out["agreement"] = {{"abs_difference", agree}, {"bound", agree_bound}, {"passed", agree <= agree_bound}};
  out["stationarity"] = {{"improvement", improve}, {"bound", improve_bound}, {"passed", improve <= improve_bound}};
  out["passed"] = ok;
  emit(c, out);
  c.out << "compare: J indirect = " << j_ind << ", J~ direct = " << j_dir << ", |diff| = " << agree
        << ", improvement from indirect = " << improve << (ok ? " (ok)" : " (VIOLATION)") << "\n";
  return ok ? kExitOk : kExitCheckViolation;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariant optimal control of mechanical systems", "covpmp"};
  app.require_subcommand(1);
  std::string config_path, trajectory_path, report_path;

  using Handler = int (*)(Context&);
  std::vector<std::pair<CLI::App*, Handler>> commands;
  auto add = [&](const char* name, const char* help, Handler h) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "scenario JSON file")->required();
    sub->add_option("--trajectory", trajectory_path, "override output.trajectory_path");
    sub->add_option("--report", report_path, "override output.report_path");
    commands.emplace_back(sub, h);
  };
  add("check", "geometry and cost invariant suite for the configured model", cmd_check);
  add("simulate", "forward integration under the configured constant control", cmd_simulate);
  add("solve", "shooting solution of the boundary value problem", cmd_solve);
  add("direct", "direct transcription optimum", cmd_direct);
  add("compare", "solve and direct, with agreement and stationarity bounds", cmd_compare);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    ScenarioConfig cfg = load_config(config_path);
    MechanicalModel model = build_model(cfg);
    Context ctx{cfg, model, trajectory_path.empty() ? cfg.output.trajectory_path : trajectory_path,
                report_path.empty() ? cfg.output.report_path : report_path, out};
    for (auto& [sub, handler] : commands) {
      if (sub->parsed()) return handler(ctx);
    }
  } catch (const ConfigError& e) {
    err << "config error:\n";
    for (const auto& p : e.problems()) err << "  " << p << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitNotConverged;
  }
  return kExitConfig;
}

}  // namespace covpmp
