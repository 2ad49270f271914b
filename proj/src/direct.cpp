#include "covpmp/direct.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "covpmp/errors.hpp"

namespace covpmp {

namespace {

/// Node data of one forward sweep.
struct Sweep {
  std::vector<Vector> y;       ///< [q, zeta]
  std::vector<double> g;       ///< gamma at the node
  std::vector<double> prefix;  ///< trapezoid integral of gamma over [0, t_i]
};

class Transcription {
 public:
  explicit Transcription(const DirectProblem& p)
      : p_(p), n_(p.model.dim), h_(p.T / p.N), free_zeta0_(p.bc.kind == BoundaryCase::B) {}

  int dim() const { return n_; }
  double step() const { return h_; }
  long evaluations() const { return evals_; }

  int size() const { return (p_.N + 1) * n_ + (free_zeta0_ ? n_ : 0); }

  Vector pack(const Matrix& u, const Vector& zeta0) const {
    Vector x(size());
    for (int i = 0; i <= p_.N; ++i) x.segment(i * n_, n_) = u.row(i).transpose();
    if (free_zeta0_) x.tail(n_) = zeta0;
    return x;
  }

  void unpack(const Vector& x, Matrix& u, Vector& zeta0) const {
    u.resize(p_.N + 1, n_);
    for (int i = 0; i <= p_.N; ++i) u.row(i) = x.segment(i * n_, n_).transpose();
    zeta0 = free_zeta0_ ? Vector(x.tail(n_)) : initial_zeta();
  }

  Vector initial_zeta() const {
    if (p_.bc.zeta0.size() == n_) return p_.bc.zeta0;
    return Vector::Zero(n_);
  }

  /// Integrates from node `start` with state y and accumulated cost `prefix`.
  /// Linear interpolation pairs with the trapezoid rule on node values; cubic
  /// interpolation integrates gamma with the same RK4 stages as the state.
  DirectEvaluation run(const Matrix& u, int start, Vector y, double prefix, Sweep* record) {
    ++evals_;
    if (record) {
      record->y.assign(p_.N + 1, Vector());
      record->g.assign(p_.N + 1, 0.0);
      record->prefix.assign(p_.N + 1, 0.0);
    }
    double running = prefix;
    double g_prev = 0.0;
    for (int i = start; i <= p_.N; ++i) {
      if (!y.allFinite()) {
        throw IntegrationError("direct transcription: non-finite state at step " + std::to_string(i), i);
      }
      const GeometryEval geom = eval_geometry(p_.model.metric, y.head(n_), GeometryLevel::Connection);
      const Vector ui = u.row(i).transpose();
      const double gi = gamma(p_.cost, geom, y.tail(n_), ui);
      if (i > start && !cubic()) running += 0.5 * h_ * (g_prev + gi);
      if (record) {
        record->y[i] = y;
        record->g[i] = gi;
        record->prefix[i] = running;
      }
      g_prev = gi;
      if (i == p_.N) break;

      const Vector un = u.row(i + 1).transpose();
      const Vector um = midpoint(u, i);
      const Stage k1 = rate(geom, y, ui);
      const Stage k2 = rate(y + 0.5 * h_ * k1.dy, um);
      const Stage k3 = rate(y + 0.5 * h_ * k2.dy, um);
      const Stage k4 = rate(y + h_ * k3.dy, un);
      y += (h_ / 6.0) * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
      if (cubic()) running += (h_ / 6.0) * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g);
    }

    DirectEvaluation ev;
    ev.running = running;
    ev.terminal_residual = terminal(y);
    ev.penalty = ev.terminal_residual.size() ? p_.penalty_weight * ev.terminal_residual.squaredNorm() : 0.0;
    ev.total = ev.running + ev.penalty;
    return ev;
  }

  DirectEvaluation full(const Matrix& u, const Vector& zeta0, Sweep* record) {
    Vector y0(2 * n_);
    y0 << p_.bc.q0, zeta0;
    return run(u, 0, std::move(y0), 0.0, record);
  }

  /// Central-difference gradient of the total cost at x, given the sweep at x.
  /// The same probes give the Jacobian of the terminal residual.
  Vector gradient(const Vector& x, const Sweep& base, double fd_step, Matrix& residual_jac) {
    Matrix u;
    Vector zeta0;
    unpack(x, u, zeta0);
    Vector grad(size());
    residual_jac.resize(residual_size(), size());
    auto record = [&](int col, const DirectEvaluation& fp, const DirectEvaluation& fm) {
      grad[col] = (fp.total - fm.total) / (2.0 * fd_step);
      if (residual_jac.rows() > 0) {
        residual_jac.col(col) = (fp.terminal_residual - fm.terminal_residual) / (2.0 * fd_step);
      }
    };
    for (int k = 0; k <= p_.N; ++k) {
      const int start = first_affected(k);
      for (int c = 0; c < n_; ++c) {
        const double u0 = u(k, c);
        u(k, c) = u0 + fd_step;
        const DirectEvaluation fp = run(u, start, base.y[start], base.prefix[start], nullptr);
        u(k, c) = u0 - fd_step;
        const DirectEvaluation fm = run(u, start, base.y[start], base.prefix[start], nullptr);
        u(k, c) = u0;
        record(k * n_ + c, fp, fm);
      }
    }
    if (free_zeta0_) {
      for (int c = 0; c < n_; ++c) {
        Vector z = zeta0;
        z[c] += fd_step;
        const DirectEvaluation fp = full(u, z, nullptr);
        z[c] = zeta0[c] - fd_step;
        const DirectEvaluation fm = full(u, z, nullptr);
        record((p_.N + 1) * n_ + c, fp, fm);
      }
    }
    return grad;
  }

  /// Solves B0 d = v with B0 = D + 2 w Jr^T Jr, where D holds the
  /// quadrature-weighted blocks d2gamma/du2 (plus a small metric floor).
  Vector apply_inverse_model(const Vector& x, const Sweep& base, const Matrix& residual_jac, const Vector& v) const {
    std::vector<Eigen::LLT<Matrix>> blocks;
    blocks.reserve(p_.N + 1);
    for (int k = 0; k <= p_.N; ++k) {
      const double wk = (k == 0 || k == p_.N) ? 0.5 * h_ : h_;
      const GeometryEval geom = eval_geometry(p_.model.metric, base.y[k].head(n_), GeometryLevel::Connection);
      const Matrix huu = gamma_u_hessian(p_.cost, geom, base.y[k].tail(n_), x.segment(k * n_, n_));
      blocks.emplace_back(wk * (huu + 1e-6 * geom.metric));
    }
    auto d_inv = [&](const Vector& a) {
      Vector out = a;
      for (int k = 0; k <= p_.N; ++k) out.segment(k * n_, n_) = blocks[k].solve(a.segment(k * n_, n_));
      return out;
    };
    const Vector dv = d_inv(v);
    if (residual_jac.rows() == 0) return dv;
    Matrix dj(size(), residual_jac.rows());
    for (int r = 0; r < residual_jac.rows(); ++r) dj.col(r) = d_inv(residual_jac.row(r).transpose());
    Matrix small = residual_jac * dj;
    small.diagonal().array() += 1.0 / (2.0 * p_.penalty_weight);
    return dv - dj * small.ldlt().solve(residual_jac * dv);
  }

  int residual_size() const {
    switch (p_.bc.kind) {
      case BoundaryCase::A:
        return 0;
      case BoundaryCase::B:
        return n_;
      case BoundaryCase::C:
        return 2 * n_;
    }
    return 0;
  }

  long gradient_cost() const { return 2L * size(); }

 private:
  bool cubic() const { return p_.interpolation == ControlInterpolation::Cubic && p_.N >= 3; }

  /// Control at t_i + h/2.
  Vector midpoint(const Matrix& u, int i) const {
    if (!cubic()) return 0.5 * (u.row(i) + u.row(i + 1)).transpose();
    const int N = p_.N;
    if (i == 0) return ((5.0 * u.row(0) + 15.0 * u.row(1) - 5.0 * u.row(2) + u.row(3)) / 16.0).transpose();
    if (i == N - 1) {
      return ((u.row(N - 3) - 5.0 * u.row(N - 2) + 15.0 * u.row(N - 1) + 5.0 * u.row(N)) / 16.0).transpose();
    }
    return ((-u.row(i - 1) + 9.0 * u.row(i) + 9.0 * u.row(i + 1) - u.row(i + 2)) / 16.0).transpose();
  }

  /// First interval whose stages depend on node k.
  int first_affected(int k) const {
    if (!cubic()) return k > 0 ? k - 1 : 0;
    return k <= 3 ? 0 : k - 2;
  }

  struct Stage {
    Vector dy;
    double g;
  };

  Stage rate(const GeometryEval& geom, const Vector& y, const Vector& u) const {
    const PhaseState s{y.head(n_), y.tail(n_)};
    const PhaseRate r = forward_field(p_.model, geom, s, u);
    Stage out{Vector(2 * n_), cubic() ? gamma(p_.cost, geom, s.zeta, u) : 0.0};
    out.dy << r.dq, r.dzeta;
    return out;
  }

  Stage rate(const Vector& y, const Vector& u) const {
    return rate(eval_geometry(p_.model.metric, y.head(n_), GeometryLevel::Connection), y, u);
  }

  Vector terminal(const Vector& y) const {
    switch (p_.bc.kind) {
      case BoundaryCase::A:
        return Vector();
      case BoundaryCase::B:
        return y.head(n_) - p_.bc.qT;
      case BoundaryCase::C: {
        Vector r(2 * n_);
        r << y.head(n_) - p_.bc.qT, y.tail(n_) - p_.bc.zetaT;
        return r;
      }
    }
    return Vector();
  }

  const DirectProblem& p_;
  int n_;
  double h_;
  bool free_zeta0_;
  long evals_ = 0;
};

void check_problem(const DirectProblem& p) {
  if (!(p.T > 0.0) || p.N < 1) throw Error("direct problem: need T > 0 and N >= 1");
  if (!(p.penalty_weight > 0.0)) throw Error("direct problem: penalty_weight must be positive");
  validate(p.bc, p.model.dim);
  if (p.control_grid.rows() != p.N + 1 || p.control_grid.cols() != p.model.dim) {
    throw Error("direct problem: control grid must be (N + 1) x n");
  }
  if (!p.control_grid.allFinite()) throw Error("direct problem: control grid has non-finite entries");
}

}  // namespace

std::string to_string(ControlInterpolation c) { return c == ControlInterpolation::Linear ? "linear" : "cubic"; }

std::optional<ControlInterpolation> parse_control_interpolation(const std::string& name) {
  if (name == "linear") return ControlInterpolation::Linear;
  if (name == "cubic") return ControlInterpolation::Cubic;
  return std::nullopt;
}

DirectProblem make_direct_problem(const MechanicalModel& model, const CostModel& cost, const BoundarySpec& bc,
                                  double T, int N, double penalty_weight) {
  DirectProblem p{model, cost, bc, T, N, penalty_weight, Matrix::Zero(N + 1, model.dim), Vector(),
                  ControlInterpolation::Linear};
  p.zeta0 = bc.zeta0.size() == model.dim ? bc.zeta0 : Vector::Zero(model.dim);
  return p;
}

DirectEvaluation evaluate_cost(const DirectProblem& p) {
  check_problem(p);
  Transcription tr(p);
  const Vector zeta0 = p.bc.kind == BoundaryCase::B && p.zeta0.size() == p.model.dim ? p.zeta0 : tr.initial_zeta();
  return tr.full(p.control_grid, zeta0, nullptr);
}

Trajectory direct_trajectory(const DirectProblem& p) {
  check_problem(p);
  Transcription tr(p);
  const int n = p.model.dim;
  const Vector zeta0 = p.bc.kind == BoundaryCase::B && p.zeta0.size() == n ? p.zeta0 : tr.initial_zeta();
  Sweep sw;
  tr.full(p.control_grid, zeta0, &sw);

  Trajectory traj;
  traj.dim = n;
  traj.t = uniform_grid(p.T, p.N);
  for (int i = 0; i <= p.N; ++i) {
    PhaseState s{sw.y[i].head(n), sw.y[i].tail(n)};
    const Matrix m = p.model.metric.mass(s.q);
    Vector u = p.control_grid.row(i).transpose();
    traj.controls_cov.push_back(m * u);
    traj.controls.push_back(std::move(u));
    traj.energy.push_back(energy(p.model, s));
    traj.running_cost.push_back(sw.prefix[i]);
    traj.states.push_back(std::move(s));
  }
  return traj;
}

DirectReport optimize(const DirectProblem& p, const DirectOptions& options) {
  check_problem(p);
  Transcription tr(p);

  Vector zeta_init = p.bc.kind == BoundaryCase::B && p.zeta0.size() == p.model.dim ? p.zeta0 : tr.initial_zeta();
  Vector x = tr.pack(p.control_grid, zeta_init);
  Matrix u;
  Vector zeta0;

  auto eval = [&](const Vector& v, Sweep* sw) {
    tr.unpack(v, u, zeta0);
    return tr.full(u, zeta0, sw);
  };

  DirectReport rep;
  Sweep sweep;
  DirectEvaluation ev = eval(x, &sweep);
  double f = ev.total;
  rep.initial_cost = f;
  rep.history.push_back(f);

  struct Pair {
    Vector s, y;
    double rho;
  };
  std::deque<Pair> mem;

  Matrix jr;
  Vector g = tr.gradient(x, sweep, options.fd_step, jr);
  int it = 0;
  for (; it < options.max_iter; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= options.gtol * (1.0 + std::abs(f))) {
      rep.converged = true;
      rep.message = "gradient tolerance reached";
      break;
    }

    // Two-loop recursion.
    Vector d = -g;
    std::vector<double> alpha(mem.size());
    for (std::size_t i = mem.size(); i-- > 0;) {
      alpha[i] = mem[i].rho * mem[i].s.dot(d);
      d -= alpha[i] * mem[i].y;
    }
    d = tr.apply_inverse_model(x, sweep, jr, d);
    for (std::size_t i = 0; i < mem.size(); ++i) {
      const double beta = mem[i].rho * mem[i].y.dot(d);
      d += (alpha[i] - beta) * mem[i].s;
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      mem.clear();
      d = -tr.apply_inverse_model(x, sweep, jr, g);
      slope = g.dot(d);
    }

    // Armijo backtracking; accepted steps never raise J.
    bool accepted = false;
    double step = 1.0;
    Vector x_new;
    DirectEvaluation ev_new;
    Sweep sweep_new;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      if (tr.evaluations() + 1 > options.max_evals) break;
      x_new = x + step * d;
      try {
        ev_new = eval(x_new, &sweep_new);
      } catch (const Error&) {
        continue;
      }
      if (std::isfinite(ev_new.total) && ev_new.total <= f + 1e-4 * step * slope && ev_new.total <= f) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (tr.evaluations() + 1 > options.max_evals) {
        rep.exhausted = true;
        rep.message = "evaluation budget exhausted";
      } else {
        rep.message = "line search failed";
      }
      break;
    }

    const double decrease = f - ev_new.total;
    if (tr.evaluations() + tr.gradient_cost() > options.max_evals) {
      x = x_new;
      ev = ev_new;
      f = ev.total;
      rep.history.push_back(f);
      ++it;
      rep.exhausted = true;
      rep.message = "evaluation budget exhausted";
      break;
    }
    const Vector g_new = tr.gradient(x_new, sweep_new, options.fd_step, jr);
    Pair pr{x_new - x, g_new - g, 0.0};
    const double sy = pr.s.dot(pr.y);
    if (sy > 1e-12 * pr.s.norm() * pr.y.norm()) {
      pr.rho = 1.0 / sy;
      mem.push_back(std::move(pr));
      if (static_cast<int>(mem.size()) > options.memory) mem.pop_front();
    }
    x = std::move(x_new);
    g = g_new;
    ev = ev_new;
    sweep = std::move(sweep_new);
    f = ev.total;
    rep.history.push_back(f);

    if (decrease <= options.ftol * (1.0 + std::abs(f))) {
      ++it;
      rep.converged = true;
      rep.message = "cost stalled";
      break;
    }
  }
  if (it >= options.max_iter) {
    rep.exhausted = true;
    rep.message = "iteration limit reached";
  }

  tr.unpack(x, rep.control_grid, rep.zeta0);
  rep.final = ev;
  rep.iterations = it;
  rep.evaluations = tr.evaluations();
  return rep;
}

Matrix sample_controls(const Trajectory& traj, double T, int N) {
  if (traj.size() < 2 || traj.controls.size() != traj.size()) throw Error("sample_controls needs a sampled trajectory");
  const int n = traj.dim;
  Matrix out(N + 1, n);
  const auto grid = uniform_grid(T, N);
  std::size_t j = 0;
  for (int i = 0; i <= N; ++i) {
    const double t = grid[i];
    while (j + 2 < traj.size() && traj.t[j + 1] <= t) ++j;
    const double span = traj.t[j + 1] - traj.t[j];
    const double a = std::clamp((t - traj.t[j]) / span, 0.0, 1.0);
    out.row(i) = ((1.0 - a) * traj.controls[j] + a * traj.controls[j + 1]).transpose();
  }
  return out;
}

}  // namespace covpmp
