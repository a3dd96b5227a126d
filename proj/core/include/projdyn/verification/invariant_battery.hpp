#ifndef PROJDYN_VERIFICATION_INVARIANT_BATTERY_HPP
#define PROJDYN_VERIFICATION_INVARIANT_BATTERY_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace projdyn::verification {

struct CheckResult {
  std::string name;
  std::string description;
  double max_residual = 0.0;
  double tolerance = 0.0;
  int samples = 0;
  bool passed = false;
};

struct BatteryOptions {
  std::uint64_t seed = 42;
  int samples = 200;
  double rank_tol = 1e-10;
  // Harness self-test: flips the sign of the -mu Lambda P term of Cbar in
  // the skew-symmetry check, which must then fail.
  bool inject_fault = false;
};

/// Runs every invariant suite. Deterministic for a given options value.
std::vector<CheckResult> run_battery(const BatteryOptions& options);

bool all_passed(const std::vector<CheckResult>& results);

/// JSON report: {"seed":..,"passed":..,"checks":[{name,...},...]}.
std::string battery_report_json(const std::vector<CheckResult>& results,
                                const BatteryOptions& options);

void print_battery_table(const std::vector<CheckResult>& results,
                         std::ostream& out);

}  // namespace projdyn::verification

#endif  // PROJDYN_VERIFICATION_INVARIANT_BATTERY_HPP
