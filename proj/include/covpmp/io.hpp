#pragma once

#include <string>

#include "covpmp/dynamics.hpp"

namespace covpmp {

/// CSV with header
///   t,q_1..q_n,zeta_1..zeta_n,u_1..u_n,ucov_1..ucov_n,xi_1..xi_n,pi_1..pi_n,energy,running_cost
/// Every value is printed with 17 significant digits; adjoint columns hold
/// "nan" when the trajectory has no adjoints.
std::string trajectory_to_csv(const Trajectory& traj);

/// Writes trajectory_to_csv to `path`; throws IoError naming the path.
void write_trajectory(const Trajectory& traj, const std::string& path);

/// Parses a file written by write_trajectory. Adjoints are dropped when
/// every adjoint entry is "nan".
Trajectory read_trajectory(const std::string& path);
Trajectory trajectory_from_csv(const std::string& text);

/// Writes `text` to `path` byte for byte; throws IoError naming the path.
void write_text(const std::string& path, const std::string& text);

}  // namespace covpmp
