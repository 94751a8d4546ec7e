#pragma once

// Run orchestration behind the command-line tool.
//
// continue      branch.csv, snapshot_<step>.json every snapshot_every points and
//               at the last point, summary.json
// single-solve  branch.csv (origin and the solution), snapshot_single.json,
//               summary.json
// validate      PASS/FAIL lines on `log`, no files
//
// Exit status: 0 success, 2 configuration or output error, 3 numerical
// failure, 4 guard-triggered termination (files are still written).

#include "vwave/config.hpp"

#include <cstdint>
#include <ostream>

namespace vw {

inline constexpr int exit_config_error = 2;

int run(const RunConfig& config, RunMode mode, std::ostream& log, std::ostream& err,
        std::uint64_t seed = 0);

}  // namespace vw
