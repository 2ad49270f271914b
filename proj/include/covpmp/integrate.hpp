#pragma once

#include <functional>
#include <string>
#include <vector>

#include "covpmp/tensor.hpp"

namespace covpmp {

enum class Integrator { Rk4, Rk45 };

std::string to_string(Integrator method);

/// dy/dt = f(t, y)
using Field = std::function<Vector(double, const Vector&)>;

struct AdaptiveOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
};

/// Node values on the uniform grid t_i = T i / N, i = 0..N.
struct IntegrationResult {
  std::vector<double> t;
  std::vector<Vector> y;
};

/// Uniform grid of N + 1 nodes on [0, T].
std::vector<double> uniform_grid(double T, int N);

/// One classical fourth-order Runge-Kutta step.
Vector rk4_step(const Field& f, double t, const Vector& y, double h);

/// Integrates from y(0) = y0 to T. Rk4 takes N fixed steps; Rk45 runs an
/// adaptive Dormand-Prince 5(4) pair that stops exactly on every grid node.
/// Throws IntegrationError naming the step when the state becomes non-finite.
IntegrationResult integrate(const Field& f, const Vector& y0, double T, int N, Integrator method = Integrator::Rk4,
                            const AdaptiveOptions& adaptive = {});

}  // namespace covpmp
