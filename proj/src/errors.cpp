#include "covpmp/errors.hpp"

#include <sstream>

namespace covpmp {

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error([&] {
        std::ostringstream os;
        os << "invalid configuration:";
        for (const auto& p : problems) os << "\n  - " << p;
        return os.str();
      }()),
      problems_(std::move(problems)) {}

std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

}  // namespace covpmp
