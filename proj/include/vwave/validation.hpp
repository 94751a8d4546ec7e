#pragma once

// Built-in invariant checks run by `vwave validate`. They use small grids so
// the whole suite takes a few seconds.

#include "vwave/wave_system.hpp"

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace vw {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Smooth random state with Gaussian coefficients decaying like 1/(1 + k^2)
/// over the first `active` modes; eta is scaled by `amplitude` times the depth.
WaveState random_state(const CollocationGrid& grid, std::mt19937_64& rng, double amplitude,
                       double depth, int active = 8);

std::vector<CheckResult> run_validation(std::uint64_t seed);

/// Prints one PASS/FAIL line per check; returns true iff all pass.
bool report(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace vw
