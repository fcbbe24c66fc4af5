#include "graphflow/validation.hpp"

#include <sstream>

namespace graphflow {

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << subject << ": " << (passed() ? "pass" : "FAIL") << '\n';
  for (const auto& c : checks) {
    os << "  [" << (c.passed ? "ok  " : (c.hard ? "FAIL" : "warn")) << "] " << c.id << "  " << c.description
       << "  worst=" << c.worst << " bound=" << c.bound << " margin=" << c.margin;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << '\n';
  }
  if (!modulus.delta.empty()) {
    os << "  modulus:";
    for (std::size_t i = 0; i < modulus.delta.size(); ++i) os << " [" << modulus.delta[i] << ": " << modulus.modulus[i] << "]";
    os << '\n';
  }
  return os.str();
}

}  // namespace graphflow
