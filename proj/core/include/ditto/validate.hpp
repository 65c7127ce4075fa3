#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ditto {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool passed() const;
};

/// Names accepted by run_validation_suite.
std::vector<std::string> validation_suites();

/// Oracle suites: "normal-gamma" (full pipeline vs analytic marginals),
/// "small-lattice" (importance sampling vs enumeration), "strauss" (gamma = 1
/// Poisson limit), "kernel-identity" (residual split vs independence MH).
SuiteReport run_validation_suite(std::string_view suite, std::uint64_t seed, int workers);

}  // namespace ditto
