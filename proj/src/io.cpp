#include "covpmp/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "covpmp/errors.hpp"

namespace covpmp {

namespace {

void put(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void put_all(std::string& out, const Vector& v, int n) {
  for (int i = 0; i < n; ++i) {
    out += ',';
    put(out, v.size() == n ? v[i] : std::nan(""));
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, int line) {
  if (s == "nan") return std::nan("");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw IoError("trajectory CSV line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& traj) {
  const int n = traj.dim;
  std::string out = "t";
  for (const char* prefix : {"q_", "zeta_", "u_", "ucov_", "xi_", "pi_"}) {
    for (int i = 1; i <= n; ++i) out += "," + std::string(prefix) + std::to_string(i);
  }
  out += ",energy,running_cost\n";

  const Vector none;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    put(out, traj.t[k]);
    put_all(out, traj.states[k].q, n);
    put_all(out, traj.states[k].zeta, n);
    put_all(out, k < traj.controls.size() ? traj.controls[k] : none, n);
    put_all(out, k < traj.controls_cov.size() ? traj.controls_cov[k] : none, n);
    put_all(out, traj.has_adjoints() ? traj.adjoints[k].xi : none, n);
    put_all(out, traj.has_adjoints() ? traj.adjoints[k].pi : none, n);
    out += ',';
    put(out, k < traj.energy.size() ? traj.energy[k] : std::nan(""));
    out += ',';
    put(out, k < traj.running_cost.size() ? traj.running_cost[k] : std::nan(""));
    out += '\n';
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.close();
  if (!f) throw IoError("failed writing '" + path + "'");
}

void write_trajectory(const Trajectory& traj, const std::string& path) { write_text(path, trajectory_to_csv(traj)); }

Trajectory trajectory_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("trajectory CSV is empty");
  const auto header = split(line);
  const auto cols = header.size();
  if (cols < 3 || (cols - 3) % 6 != 0 || header.front() != "t" || header.back() != "running_cost") {
    throw IoError("trajectory CSV header not recognised");
  }
  const int n = static_cast<int>((cols - 3) / 6);

  Trajectory traj;
  traj.dim = n;
  bool any_adjoint = false;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != cols) {
      throw IoError("trajectory CSV line " + std::to_string(lineno) + ": expected " + std::to_string(cols) +
                    " fields");
    }
    Vector row(static_cast<Eigen::Index>(cols));
    for (std::size_t c = 0; c < cols; ++c) row[static_cast<Eigen::Index>(c)] = parse_number(fields[c], lineno);
    traj.t.push_back(row[0]);
    traj.states.push_back({row.segment(1, n), row.segment(1 + n, n)});
    traj.controls.push_back(row.segment(1 + 2 * n, n));
    traj.controls_cov.push_back(row.segment(1 + 3 * n, n));
    AdjointState a{row.segment(1 + 4 * n, n), row.segment(1 + 5 * n, n)};
    if (!a.xi.array().isNaN().all() || !a.pi.array().isNaN().all()) any_adjoint = true;
    traj.adjoints.push_back(std::move(a));
    traj.energy.push_back(row[1 + 6 * n]);
    traj.running_cost.push_back(row[2 + 6 * n]);
  }
  if (!any_adjoint) traj.adjoints.clear();
  return traj;
}

Trajectory read_trajectory(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return trajectory_from_csv(ss.str());
}

}  // namespace covpmp
