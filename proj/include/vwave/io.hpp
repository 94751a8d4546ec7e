#pragma once

// Output files of a run.
//
// Branch table (CSV): a comment line
//   # vwave branch table schema=1 config_hash=0x<16 hex> direction=<+|->
// then a header row and one row per branch point, flushed as it is written.
//
// Snapshot (JSON, schema 1): grid metadata, the cosine coefficients of
// eta, xi_bar, xi, the speed c, eps, the residual norm and the config echo.
//
// Summary (JSON, schema 1): mode, termination, reason, exit code, point count
// and the config echo.

#include "vwave/config.hpp"
#include "vwave/continuation.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

namespace vw {

inline constexpr int schema_version = 1;

class BranchTableWriter {
 public:
  /// Throws Error if the file cannot be opened.
  BranchTableWriter(const std::filesystem::path& path, std::uint64_t config_hash, int direction);
  void write(const BranchPoint& point);

  static const char* header_row();

 private:
  std::ofstream out_;
};

struct Snapshot {
  int schema = schema_version;
  std::string config;  ///< echo_config text
  std::uint64_t config_hash = 0;
  int step = 0;
  double eps = 0.0;
  double half_period = 0.0;
  double depth = 0.0;
  int n_modes = 0;
  int vertical = 0;
  Eigen::VectorXd eta, xi_bar, xi;  ///< cosine coefficients 0..N
  double c = 0.0;
  double residual_norm = 0.0;  ///< |residual(state, eps)|

  WaveState state() const;
};

/// Evaluates and records the residual norm of the state on `system`.
Snapshot make_snapshot(const RunConfig& config, const WaveSystem& system, int step,
                       const WaveState& state, double eps);

void save_snapshot(const std::filesystem::path& path, const Snapshot& snapshot);
/// Throws ParseError on malformed or unsupported files.
Snapshot load_snapshot(const std::filesystem::path& path);

struct RunSummary {
  std::string mode;
  int direction = 1;
  std::string termination;  ///< Alternative name, or "Converged" for single solves
  std::string reason;
  int exit_code = 0;
  int points = 0;
};

void save_summary(const std::filesystem::path& path, const RunSummary& summary,
                  const RunConfig& config);

}  // namespace vw
