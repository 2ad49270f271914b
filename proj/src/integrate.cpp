#include "covpmp/integrate.hpp"

#include <boost/numeric/odeint.hpp>

#include "covpmp/errors.hpp"

namespace covpmp {

namespace {

void require_finite(const Vector& y, int step) {
  if (!y.allFinite()) {
    throw IntegrationError("integration produced a non-finite state at step " + std::to_string(step), step);
  }
}

IntegrationResult integrate_rk4(const Field& f, const Vector& y0, double T, int N) {
  IntegrationResult out;
  out.t = uniform_grid(T, N);
  out.y.reserve(static_cast<std::size_t>(N) + 1);
  out.y.push_back(y0);
  Vector y = y0;
  for (int i = 0; i < N; ++i) {
    const double h = out.t[i + 1] - out.t[i];
    y = rk4_step(f, out.t[i], y, h);
    require_finite(y, i + 1);
    out.y.push_back(y);
  }
  return out;
}

IntegrationResult integrate_rk45(const Field& f, const Vector& y0, double T, int N, const AdaptiveOptions& opt) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;

  IntegrationResult out;
  out.t = uniform_grid(T, N);
  out.y.reserve(static_cast<std::size_t>(N) + 1);

  const auto n = y0.size();
  int node = 0;
  auto system = [&](const State& x, State& dxdt, double t) {
    const Vector y = Eigen::Map<const Vector>(x.data(), n);
    require_finite(y, node);
    const Vector dy = f(t, y);
    dxdt.assign(dy.data(), dy.data() + n);
  };
  auto observer = [&](const State& x, double) {
    Vector y = Eigen::Map<const Vector>(x.data(), n);
    require_finite(y, node);
    out.y.push_back(std::move(y));
    ++node;
  };

  State x(y0.data(), y0.data() + n);
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
  try {
    odeint::integrate_times(stepper, system, x, out.t.begin(), out.t.end(), T / N, observer);
  } catch (const odeint::step_adjustment_error& e) {
    throw IntegrationError(std::string("adaptive integration failed near node ") + std::to_string(node) + ": " +
                               e.what(),
                           node);
  } catch (const odeint::no_progress_error& e) {
    throw IntegrationError(std::string("adaptive integration stalled near node ") + std::to_string(node) + ": " +
                               e.what(),
                           node);
  }
  return out;
}

}  // namespace

std::string to_string(Integrator method) { return method == Integrator::Rk4 ? "rk4" : "rk45"; }

std::vector<double> uniform_grid(double T, int N) {
  std::vector<double> t(static_cast<std::size_t>(N) + 1);
  for (int i = 0; i <= N; ++i) t[i] = T * static_cast<double>(i) / static_cast<double>(N);
  return t;
}

Vector rk4_step(const Field& f, double t, const Vector& y, double h) {
  const Vector k1 = f(t, y);
  const Vector k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const Vector k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const Vector k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

IntegrationResult integrate(const Field& f, const Vector& y0, double T, int N, Integrator method,
                            const AdaptiveOptions& adaptive) {
  if (!(T > 0.0) || N < 1) throw Error("integrate: need T > 0 and N >= 1");
  require_finite(y0, 0);
  if (method == Integrator::Rk4) return integrate_rk4(f, y0, T, N);
  return integrate_rk45(f, y0, T, N, adaptive);
}

}  // namespace covpmp
