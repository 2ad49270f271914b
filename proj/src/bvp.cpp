#include "covpmp/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "covpmp/errors.hpp"

namespace covpmp {

namespace {

double max_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

/// Runs `fn`; any library error is rethrown as an IntegrationError naming
/// the Newton iteration.
template <class Fn>
auto at_iteration(int iteration, Fn&& fn) {
  try {
    return fn();
  } catch (const IntegrationError& e) {
    throw IntegrationError("Newton iteration " + std::to_string(iteration) + ": " + e.what(), e.step());
  } catch (const Error& e) {
    throw IntegrationError("Newton iteration " + std::to_string(iteration) + ": " + e.what(), -1);
  }
}

}  // namespace

std::string to_string(BoundaryCase c) {
  switch (c) {
    case BoundaryCase::A:
      return "A";
    case BoundaryCase::B:
      return "B";
    case BoundaryCase::C:
      return "C";
  }
  return "?";
}

const std::vector<std::string>& boundary_case_names() {
  static const std::vector<std::string> names = {"A", "B", "C"};
  return names;
}

std::optional<BoundaryCase> parse_boundary_case(const std::string& name) {
  if (name == "A") return BoundaryCase::A;
  if (name == "B") return BoundaryCase::B;
  if (name == "C") return BoundaryCase::C;
  return std::nullopt;
}

void validate(const BoundarySpec& bc, int n) {
  require(bc.q0.size() == n, "boundary: q0 must have " + std::to_string(n) + " components");
  const bool need_zeta0 = bc.kind != BoundaryCase::B;
  const bool need_qT = bc.kind != BoundaryCase::A;
  const bool need_zetaT = bc.kind == BoundaryCase::C;
  if (need_zeta0) require(bc.zeta0.size() == n, "boundary: case " + to_string(bc.kind) + " requires zeta0");
  if (need_qT) require(bc.qT.size() == n, "boundary: case " + to_string(bc.kind) + " requires qT");
  if (need_zetaT) require(bc.zetaT.size() == n, "boundary: case " + to_string(bc.kind) + " requires zetaT");
}

std::pair<PhaseState, AdjointState> initial_state(const BoundarySpec& bc, const Vector& unknowns) {
  const auto n = bc.q0.size();
  require(unknowns.size() == 2 * n, "shooting unknowns must have 2n components");
  const Vector first = unknowns.head(n);
  const Vector second = unknowns.tail(n);
  if (bc.kind == BoundaryCase::B) return {PhaseState{bc.q0, first}, AdjointState{Vector::Zero(n), second}};
  return {PhaseState{bc.q0, bc.zeta0}, AdjointState{first, second}};
}

Vector terminal_residual(const BoundarySpec& bc, const Trajectory& traj) {
  const PhaseState& s = traj.states.back();
  const AdjointState& a = traj.adjoints.back();
  const auto n = s.q.size();
  Vector r(2 * n);
  switch (bc.kind) {
    case BoundaryCase::A:
      r << a.xi, a.pi;
      break;
    case BoundaryCase::B:
      r << s.q - bc.qT, a.xi;
      break;
    case BoundaryCase::C:
      r << s.q - bc.qT, s.zeta - bc.zetaT;
      break;
  }
  return r;
}

Vector residual(const MechanicalModel& model, const CostModel& cost, const BoundarySpec& bc, const Vector& unknowns,
                double T, int N, Integrator method) {
  validate(bc, model.dim);
  const auto [s0, a0] = initial_state(bc, unknowns);
  return terminal_residual(bc, integrate_coupled(model, cost, s0, a0, T, N, method));
}

ShootReport shoot(const MechanicalModel& model, const CostModel& cost, const BoundarySpec& bc, double T, int N,
                  const ShootOptions& options, const std::optional<Vector>& initial_guess) {
  validate(bc, model.dim);
  if (!(T > 0.0)) throw Error("shoot: horizon must be positive");
  if (!(options.tol > 0.0)) throw Error("shoot: tolerance must be positive");
  const int m = 2 * model.dim;

  auto run = [&](const Vector& x) {
    const auto [s0, a0] = initial_state(bc, x);
    return integrate_coupled(model, cost, s0, a0, T, N, options.integrator);
  };

  ShootReport rep;
  Vector x = Vector::Zero(m);
  if (initial_guess) {
    require(initial_guess->size() == m, "shoot: initial guess must have 2n components");
    x = *initial_guess;
  }

  Trajectory traj = at_iteration(0, [&] { return run(x); });
  Vector r = terminal_residual(bc, traj);
  double rn = max_norm(r);

  int it = 0;
  for (; it < options.max_iter && !(rn <= options.tol); ++it) {
    rep.newton_history.push_back(rn);

    Matrix jac(m, m);
    for (int c = 0; c < m; ++c) {
      Vector xp = x;
      const double h = options.fd_step * (1.0 + std::abs(x[c]));
      xp[c] += h;
      const Vector rp = at_iteration(it + 1, [&] { return terminal_residual(bc, run(xp)); });
      jac.col(c) = (rp - r) / h;
    }
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) {
      rep.message = "singular shooting Jacobian at Newton iteration " + std::to_string(it + 1);
      break;
    }
    const Vector step = lu.solve(r);

    bool accepted = false;
    double scale = 1.0;
    for (int h = 0; h <= options.max_halvings; ++h, scale *= 0.5) {
      const Vector trial = x - scale * step;
      try {
        Trajectory tt = run(trial);
        Vector rt = terminal_residual(bc, tt);
        const double tn = max_norm(rt);
        if (std::isfinite(tn) && tn < rn) {
          x = trial;
          traj = std::move(tt);
          r = std::move(rt);
          rn = tn;
          accepted = true;
          break;
        }
      } catch (const Error&) {
        // A blown-up trial counts as a residual increase.
      }
    }
    if (!accepted) {
      rep.message = "line search failed at Newton iteration " + std::to_string(it + 1);
      ++it;
      break;
    }
  }
  rep.newton_history.push_back(rn);

  rep.converged = rn <= options.tol;
  rep.iterations = it;
  rep.residual_norm = rn;
  rep.unknowns = x;
  rep.cost = traj.cost();
  rep.trajectory = std::move(traj);
  if (rep.converged) {
    rep.message = "converged";
  } else if (rep.message.empty()) {
    rep.message = "maximum Newton iterations reached";
  }
  return rep;
}

double optimality_residual(const MechanicalModel& model, const CostModel& cost, const Trajectory& traj) {
  if (!traj.has_adjoints()) throw Error("optimality_residual needs a trajectory with adjoints");
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const GeometryEval g = eval_geometry(model.metric, traj.states[i].q, GeometryLevel::Connection);
    const Vector r = gamma_u_gradient(cost, g, traj.states[i].zeta, traj.controls[i]) - traj.adjoints[i].xi;
    worst = std::max(worst, max_norm(r));
  }
  return worst;
}

}  // namespace covpmp
