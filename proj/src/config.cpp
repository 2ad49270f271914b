#include "covpmp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "covpmp/errors.hpp"

namespace covpmp {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

/// Typed field access that records every problem instead of stopping.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items()) {
      if (!allowed.count(key)) {
        std::vector<std::string> names(allowed.begin(), allowed.end());
        fail(join_path(path, key), "unknown key (allowed: " + join_names(names) + ")");
      }
    }
  }

  const json* object(const json& parent, const std::string& key, const std::string& path, bool required) {
    const std::string p = join_path(path, key);
    if (!parent.contains(key)) {
      if (required) fail(p, "missing required object");
      return nullptr;
    }
    const json& v = parent.at(key);
    if (!v.is_object()) {
      fail(p, "expected an object");
      return nullptr;
    }
    return &v;
  }

  std::optional<double> number(const json& parent, const std::string& key, const std::string& path, bool required) {
    const std::string p = join_path(path, key);
    if (!parent.contains(key)) {
      if (required) fail(p, "missing required number");
      return std::nullopt;
    }
    const json& v = parent.at(key);
    if (!v.is_number()) {
      fail(p, "expected a number, got " + std::string(v.type_name()));
      return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      fail(p, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<long> integer(const json& parent, const std::string& key, const std::string& path, bool required) {
    const std::string p = join_path(path, key);
    if (!parent.contains(key)) {
      if (required) fail(p, "missing required integer");
      return std::nullopt;
    }
    const json& v = parent.at(key);
    if (!v.is_number_integer()) {
      fail(p, "expected an integer, got " + std::string(v.type_name()));
      return std::nullopt;
    }
    return v.get<long>();
  }

  std::optional<std::string> string(const json& parent, const std::string& key, const std::string& path,
                                    bool required) {
    const std::string p = join_path(path, key);
    if (!parent.contains(key)) {
      if (required) fail(p, "missing required string");
      return std::nullopt;
    }
    const json& v = parent.at(key);
    if (!v.is_string()) {
      fail(p, "expected a string, got " + std::string(v.type_name()));
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<Vector> vector(const json& parent, const std::string& key, const std::string& path, bool required) {
    const std::string p = join_path(path, key);
    if (!parent.contains(key)) {
      if (required) fail(p, "missing required array");
      return std::nullopt;
    }
    const json& v = parent.at(key);
    if (!v.is_array()) {
      fail(p, "expected an array of numbers, got " + std::string(v.type_name()));
      return std::nullopt;
    }
    Vector out(static_cast<Eigen::Index>(v.size()));
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        fail(p + "[" + std::to_string(i) + "]", "expected a finite number");
        ok = false;
        continue;
      }
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    if (!ok) return std::nullopt;
    return out;
  }
};

void check_size(Reader& rd, const std::optional<Vector>& v, int n, const std::string& path) {
  if (v && n > 0 && v->size() != n) {
    rd.fail(path, "expected " + std::to_string(n) + " components, got " + std::to_string(v->size()));
  }
}

ojson vector_json(const Vector& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("invalid JSON: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"top level must be a JSON object"});

  Reader rd;
  ScenarioConfig cfg;
  rd.reject_unknown(root, "",
                    {"model", "cost", "horizon_T", "steps_N", "boundary", "solver", "control", "direct", "output"});

  // model
  int n = 0;
  if (const json* m = rd.object(root, "model", "", true)) {
    rd.reject_unknown(*m, "model", {"name", "params"});
    if (auto name = rd.string(*m, "name", "model", true)) cfg.model.name = *name;
    if (const json* params = rd.object(*m, "params", "model", false)) {
      for (const auto& [key, value] : params->items()) {
        if (auto d = rd.number(*params, key, "model.params", true)) cfg.model.params[key] = *d;
      }
    }
    if (!cfg.model.name.empty()) {
      try {
        n = covpmp::build_model(cfg.model.name, cfg.model.params).dim;
      } catch (const ModelError& e) {
        rd.fail("model", e.what());
      }
    }
  }

  // cost
  if (const json* c = rd.object(root, "cost", "", false)) {
    rd.reject_unknown(*c, "cost", {"kind", "weights"});
    if (auto kind = rd.string(*c, "kind", "cost", true)) {
      if (auto k = parse_cost_kind(*kind)) {
        cfg.cost.kind = *k;
      } else {
        rd.fail("cost.kind", "unknown cost kind '" + *kind + "' (allowed: " + join_names(cost_kind_names()) + ")");
      }
    }
    if (const json* w = rd.object(*c, "weights", "cost", false)) {
      rd.reject_unknown(*w, "cost.weights", {"alpha"});
      if (auto a = rd.number(*w, "alpha", "cost.weights", false)) {
        if (*a < 0.0) rd.fail("cost.weights.alpha", "must be >= 0");
        cfg.cost.alpha = *a;
      }
    }
  }

  if (auto T = rd.number(root, "horizon_T", "", true)) {
    if (!(*T > 0.0)) rd.fail("horizon_T", "must be > 0");
    cfg.horizon_T = *T;
  }
  if (auto N = rd.integer(root, "steps_N", "", true)) {
    if (*N < 2 || *N > 10'000'000) rd.fail("steps_N", "must be an integer in [2, 10000000]");
    cfg.steps_N = static_cast<int>(*N);
  }

  // boundary
  if (const json* b = rd.object(root, "boundary", "", true)) {
    rd.reject_unknown(*b, "boundary", {"case", "q0", "zeta0", "qT", "zetaT"});
    std::optional<BoundaryCase> kind;
    if (auto name = rd.string(*b, "case", "boundary", true)) {
      kind = parse_boundary_case(*name);
      if (!kind) {
        rd.fail("boundary.case",
                "unknown case '" + *name + "' (allowed: " + join_names(boundary_case_names()) + ")");
      }
    }
    const BoundaryCase k = kind.value_or(BoundaryCase::A);
    cfg.boundary.kind = k;
    auto q0 = rd.vector(*b, "q0", "boundary", true);
    auto zeta0 = rd.vector(*b, "zeta0", "boundary", kind && k != BoundaryCase::B);
    auto qT = rd.vector(*b, "qT", "boundary", kind && k != BoundaryCase::A);
    auto zetaT = rd.vector(*b, "zetaT", "boundary", kind && k == BoundaryCase::C);
    check_size(rd, q0, n, "boundary.q0");
    check_size(rd, zeta0, n, "boundary.zeta0");
    check_size(rd, qT, n, "boundary.qT");
    check_size(rd, zetaT, n, "boundary.zetaT");
    if (q0) cfg.boundary.q0 = *q0;
    if (zeta0) cfg.boundary.zeta0 = *zeta0;
    if (qT) cfg.boundary.qT = *qT;
    if (zetaT) cfg.boundary.zetaT = *zetaT;
  }

  // solver
  if (const json* s = rd.object(root, "solver", "", false)) {
    rd.reject_unknown(*s, "solver", {"tol", "max_iter", "integrator", "fd_step", "initial_guess"});
    if (auto tol = rd.number(*s, "tol", "solver", false)) {
      if (!(*tol > 0.0)) rd.fail("solver.tol", "must be > 0");
      cfg.solver.tol = *tol;
    }
    if (auto it = rd.integer(*s, "max_iter", "solver", false)) {
      if (*it < 1 || *it > 100000) rd.fail("solver.max_iter", "must be an integer in [1, 100000]");
      cfg.solver.max_iter = static_cast<int>(*it);
    }
    if (auto integ = rd.string(*s, "integrator", "solver", false)) {
      if (*integ == "rk4") {
        cfg.solver.integrator = Integrator::Rk4;
      } else if (*integ == "rk45") {
        cfg.solver.integrator = Integrator::Rk45;
      } else {
        rd.fail("solver.integrator", "unknown integrator '" + *integ + "' (allowed: rk4, rk45)");
      }
    }
    if (auto fd = rd.number(*s, "fd_step", "solver", false)) {
      if (!(*fd > 0.0)) rd.fail("solver.fd_step", "must be > 0");
      cfg.solver.fd_step = *fd;
    }
    if (auto g = rd.vector(*s, "initial_guess", "solver", false)) {
      check_size(rd, g, 2 * n, "solver.initial_guess");
      cfg.solver.initial_guess = *g;
    }
  }

  // control
  if (const json* c = rd.object(root, "control", "", false)) {
    rd.reject_unknown(*c, "control", {"u"});
    if (auto u = rd.vector(*c, "u", "control", true)) {
      check_size(rd, u, n, "control.u");
      cfg.control = *u;
    }
  }

  // direct
  if (const json* d = rd.object(root, "direct", "", false)) {
    rd.reject_unknown(*d, "direct", {"N", "penalty_weight", "max_evals", "max_iter", "interpolation"});
    if (auto N = rd.integer(*d, "N", "direct", false)) {
      if (*N < 2 || *N > 100000) rd.fail("direct.N", "must be an integer in [2, 100000]");
      cfg.direct.N = static_cast<int>(*N);
    }
    if (auto w = rd.number(*d, "penalty_weight", "direct", false)) {
      if (!(*w > 0.0)) rd.fail("direct.penalty_weight", "must be > 0");
      cfg.direct.penalty_weight = *w;
    }
    if (auto e = rd.integer(*d, "max_evals", "direct", false)) {
      if (*e < 1) rd.fail("direct.max_evals", "must be >= 1");
      cfg.direct.max_evals = *e;
    }
    if (auto it = rd.integer(*d, "max_iter", "direct", false)) {
      if (*it < 1 || *it > 1000000) rd.fail("direct.max_iter", "must be an integer in [1, 1000000]");
      cfg.direct.max_iter = static_cast<int>(*it);
    }
    if (auto interp = rd.string(*d, "interpolation", "direct", false)) {
      if (auto ci = parse_control_interpolation(*interp)) {
        cfg.direct.interpolation = *ci;
      } else {
        rd.fail("direct.interpolation", "unknown interpolation '" + *interp + "' (allowed: linear, cubic)");
      }
    }
  }

  // output
  if (const json* o = rd.object(root, "output", "", false)) {
    rd.reject_unknown(*o, "output", {"trajectory_path", "report_path"});
    if (auto p = rd.string(*o, "trajectory_path", "output", false)) {
      if (p->empty()) rd.fail("output.trajectory_path", "must not be empty");
      cfg.output.trajectory_path = *p;
    }
    if (auto p = rd.string(*o, "report_path", "output", false)) {
      if (p->empty()) rd.fail("output.report_path", "must not be empty");
      cfg.output.report_path = *p;
    }
  }

  if (!rd.errors.empty()) throw ConfigError(rd.errors);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
  ojson root;
  ojson params = ojson::object();
  for (const auto& [k, v] : cfg.model.params) params[k] = v;
  root["model"] = {{"name", cfg.model.name}, {"params", params}};
  root["cost"] = {{"kind", to_string(cfg.cost.kind)}, {"weights", {{"alpha", cfg.cost.alpha}}}};
  root["horizon_T"] = cfg.horizon_T;
  root["steps_N"] = cfg.steps_N;

  ojson b;
  b["case"] = to_string(cfg.boundary.kind);
  b["q0"] = vector_json(cfg.boundary.q0);
  if (cfg.boundary.zeta0.size()) b["zeta0"] = vector_json(cfg.boundary.zeta0);
  if (cfg.boundary.qT.size()) b["qT"] = vector_json(cfg.boundary.qT);
  if (cfg.boundary.zetaT.size()) b["zetaT"] = vector_json(cfg.boundary.zetaT);
  root["boundary"] = b;

  ojson s;
  s["tol"] = cfg.solver.tol;
  s["max_iter"] = cfg.solver.max_iter;
  s["integrator"] = to_string(cfg.solver.integrator);
  s["fd_step"] = cfg.solver.fd_step;
  if (cfg.solver.initial_guess) s["initial_guess"] = vector_json(*cfg.solver.initial_guess);
  root["solver"] = s;

  if (cfg.control.size()) root["control"] = {{"u", vector_json(cfg.control)}};

  ojson d;
  if (cfg.direct.N > 0) d["N"] = cfg.direct.N;
  d["penalty_weight"] = cfg.direct.penalty_weight;
  d["max_evals"] = cfg.direct.max_evals;
  d["max_iter"] = cfg.direct.max_iter;
  d["interpolation"] = to_string(cfg.direct.interpolation);
  root["direct"] = d;

  root["output"] = {{"trajectory_path", cfg.output.trajectory_path}, {"report_path", cfg.output.report_path}};
  return root.dump(2) + "\n";
}

MechanicalModel build_model(const ScenarioConfig& config) {
  return covpmp::build_model(config.model.name, config.model.params);
}

}  // namespace covpmp
