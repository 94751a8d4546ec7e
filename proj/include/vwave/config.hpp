#pragma once

// Run configuration in INI form. Sections and keys:
//
//   [physical]        rho rho_bar g sigma d L y0 ybar0 kernel
//   [discretization]  N M
//   [continuation]    ds0 ds_min ds_max newton_tol newton_max max_steps norm_cap
//                     grow delta_guard gap_floor direction single_solve_epsilon
//   [output]          directory snapshot_every
//
// Every key is optional. Unknown sections or keys are rejected.

#include "vwave/continuation.hpp"
#include "vwave/wave_system.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace vw {

enum class RunMode { continue_branch, single_solve, validate };

struct RunConfig {
  PhysicalParameters physical{};
  Discretization discretization{};
  ContinuationSettings continuation{};
  Guards guards = Guards::for_depth(1.0);
  int direction = 1;
  double single_solve_epsilon = 1e-3;
  std::string output_directory = "vwave_out";
  int snapshot_every = 10;  ///< snapshot every n-th branch point (the last point always)

  /// Throws ValidationError.
  void validate() const;
};

/// Throws ParseError (malformed text, unknown key, bad value) or ValidationError.
RunConfig load_config(const std::string& text);
RunConfig load_config_file(const std::filesystem::path& path);

/// Canonical INI text with every key spelled out except the output directory, so
/// that results do not depend on where they are written. Loading it gives back
/// the same config up to the directory.
std::string echo_config(const RunConfig& config);

/// 64-bit FNV-1a of echo_config.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace vw
