#pragma once
// End-to-end verification gate: eight numbered checks, each pinning the
// quantitative contract of one layer of the toolkit -- exponent algebra,
// profile identities, boundary-flux constants, the zeta-moment limit, the
// pairing-constant cross-check, the particle-walk dichotomy, the lattice
// toy limits, and the kinetic solver's mass law -- with fixed tolerances
// and a wall-clock budget per check.  Failing measurements are reported,
// never silently relaxed.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace kfp::acceptance {

struct CheckResult {
  int index = 0;  // 1-based position in the battery
  std::string name;
  bool passed = false;
  double seconds = 0.0;    // measured wall time
  double budget_s = 0.0;   // wall-clock bound (a miss fails the check)
  std::vector<std::string> notes;  // measured numbers, one entry per line
};

int check_count();

// Run one check (index in [1, check_count()]).  The seed only affects the
// stochastic checks; everything else is deterministic.
// Throws ConfigError for an out-of-range index.
CheckResult run_check(int index, std::uint64_t seed);

// One verdict line plus the indented measurement notes.
void print_result(const CheckResult& res, std::ostream& os);

// Run the listed checks (all of them if `indices` is empty), streaming one
// verdict line plus indented measurements per check, then a summary line.
// Returns the number of failed checks.
int run_selected(const std::vector<int>& indices, std::ostream& os,
                 std::uint64_t seed);
int run_all(std::ostream& os, std::uint64_t seed);

}  // namespace kfp::acceptance
