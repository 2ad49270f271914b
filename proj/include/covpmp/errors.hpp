#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "covpmp/tensor.hpp"

namespace covpmp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mass matrix failed the Cholesky factorization at a configuration.
class DegenerateMetricError : public Error {
 public:
  DegenerateMetricError(const std::string& what, Vector q) : Error(what), q_(std::move(q)) {}
  const Vector& configuration() const { return q_; }

 private:
  Vector q_;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

/// Newton failed to solve dgamma/du = xi for the control.
class InversionError : public Error {
 public:
  InversionError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double last_residual() const { return residual_; }

 private:
  double residual_;
};

/// Integration produced a non-finite state.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

std::string format_vector(const Vector& v);

}  // namespace covpmp
