#pragma once

// Acceptance checks at pinned seeds. Shared by `ddlab verify` and the
// acceptance test binary.

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace ddlab {

struct VerifyOptions {
  int threads = 1;
};

struct CheckResult {
  bool passed = false;
  std::string detail;  // observed vs expected and the tolerance
};

struct AcceptanceCheck {
  std::string name;
  std::string summary;
  std::function<CheckResult(const VerifyOptions&)> run;
};

const std::vector<AcceptanceCheck>& acceptance_checks();

/// Runs the checks named in `only` (all when empty), printing one
/// "PASS|FAIL <name>: <detail>" line per check. Returns the number of failures;
/// an unknown name is reported as a failure.
int run_acceptance(const std::vector<std::string>& only, const VerifyOptions& opts,
                   std::ostream& out);

}  // namespace ddlab
