#pragma once

#include <string>
#include <utility>
#include <vector>

namespace graphflow {

// Outcome of one sampled assumption check. `worst` is the extreme sampled
// value of the checked quantity and `bound` what it was compared against;
// `margin` is positive when the check holds with room to spare.
struct CheckResult {
  CheckResult() = default;
  CheckResult(std::string id_, std::string description_) : id(std::move(id_)), description(std::move(description_)) {}

  std::string id;
  std::string description;
  bool passed = true;
  bool hard = false;  // a failure here makes the input unusable
  double worst = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  std::string detail;
};

// Empirical modulus of continuity: modulus[i] = max |f(a) - f(b)| over
// sampled pairs with distance <= delta[i].
struct ModulusTable {
  std::vector<double> delta;
  std::vector<double> modulus;
};

struct ValidationReport {
  std::string subject;
  std::vector<CheckResult> checks;
  ModulusTable modulus;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  bool hard_failure() const {
    for (const auto& c : checks)
      if (!c.passed && c.hard) return true;
    return false;
  }
  const CheckResult* find(const std::string& id) const {
    for (const auto& c : checks)
      if (c.id == id) return &c;
    return nullptr;
  }
  void add(CheckResult c) { checks.push_back(std::move(c)); }

  std::string summary() const;
};

}  // namespace graphflow
