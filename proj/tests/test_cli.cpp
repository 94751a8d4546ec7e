#include "catch_amalgamated.hpp"

#include "vwave/config.hpp"
#include "vwave/errors.hpp"
#include "vwave/io.hpp"
#include "vwave/run.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vw;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vwave_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

RunConfig small_config(const fs::path& dir) {
  RunConfig c = load_config("[discretization]\nN = 16\nM = 12\n[continuation]\nmax_steps = 4\n");
  c.output_directory = dir.string();
  return c;
}

}  // namespace

TEST_CASE("empty config gives the documented defaults", "[cli]") {
  const RunConfig c = load_config("");
  CHECK(c.physical.rho == 1.0);
  CHECK(c.physical.rho_bar == 0.9);
  CHECK(c.physical.gravity == 1.0);
  CHECK(c.physical.surface_tension == 0.1);
  CHECK(c.physical.depth == 1.0);
  CHECK(c.physical.half_period == pi);
  CHECK(c.physical.pair.lower.y == -0.5);
  CHECK(c.physical.pair.upper.y == 0.5);
  CHECK(c.physical.kernel == KernelChoice::periodized);
  CHECK(c.discretization.n_modes == 64);
  CHECK(c.discretization.vertical == 32);
  CHECK(c.guards.vortex_distance == 0.05);
  CHECK(c.guards.gap_floor == 0.02);
  CHECK(c.direction == 1);
}

TEST_CASE("config values and guard scaling", "[cli]") {
  const RunConfig c = load_config(
      "; comment\n[physical]\nd = 2\ny0 = -0.4\nkernel = free_space\n"
      "[continuation]\ndirection = -\nmax_steps = 5\n[output]\ndirectory = x\n");
  CHECK(c.physical.depth == 2.0);
  CHECK(c.physical.pair.lower.y == -0.4);
  CHECK(c.physical.kernel == KernelChoice::free_space);
  CHECK(c.guards.vortex_distance == 0.1);
  CHECK(c.direction == -1);
  CHECK(c.continuation.max_steps == 5);
  CHECK(c.output_directory == "x");
}

TEST_CASE("config errors carry context", "[cli]") {
  CHECK_THROWS_WITH(load_config("[physical]\nrho_bar = 1.2\nrho = 1.0\n"),
                    Catch::Matchers::ContainsSubstring("(ρ̄−ρ)g < 0 required"));
  CHECK_THROWS_WITH(load_config("[discretization]\nN = 7\n"),
                    Catch::Matchers::ContainsSubstring("N must be even, ≥ 8"));
  CHECK_THROWS_AS(load_config("[discretization]\nN = 7\n"), ValidationError);
  CHECK_THROWS_WITH(load_config("[physical]\nrho = 1\n\n[discretization]\nK = 3\n"),
                    Catch::Matchers::ContainsSubstring("line 5") && Catch::Matchers::ContainsSubstring("discretization.K"));
  CHECK_THROWS_AS(load_config("[physical]\nrho = 1\n\n[discretization]\nK = 3\n"), ParseError);
  CHECK_THROWS_AS(load_config("[nope]\na = 1\n"), ParseError);
  CHECK_THROWS_AS(load_config("[physical]\nrho = abc\n"), ParseError);
  CHECK_THROWS_AS(load_config("[physical\nrho = 1\n"), ParseError);
  CHECK_THROWS_AS(load_config("[physical]\nkernel = gaussian\n"), ParseError);
}

TEST_CASE("config echo round trips", "[cli]") {
  const RunConfig c = load_config("[physical]\nsigma = 0.123456789012345\n[continuation]\nds0 = 3e-4\n");
  const RunConfig d = load_config(echo_config(c));
  CHECK(echo_config(d) == echo_config(c));
  CHECK(config_hash(d) == config_hash(c));
  CHECK(d.physical.surface_tension == c.physical.surface_tension);
  CHECK(config_hash(load_config("")) != config_hash(c));
}

TEST_CASE("continue run writes a valid table, snapshots and summary", "[cli]") {
  const fs::path dir = scratch("continue");
  RunConfig c = small_config(dir);
  c.snapshot_every = 2;
  std::ostringstream log, err;
  CHECK(run(c, RunMode::continue_branch, log, err) == 0);

  const std::string table = read_file(dir / "branch.csv");
  CHECK(table.rfind("# vwave branch table schema=1 config_hash=0x", 0) == 0);
  std::istringstream lines(table);
  std::string comment, header, first;
  std::getline(lines, comment);
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == BranchTableWriter::header_row());
  CHECK(first.rfind("0,0,0,0,0,0,", 0) == 0);
  int rows = 0;
  for (std::string l; std::getline(lines, l);) ++rows;
  CHECK(rows == 4);

  CHECK(fs::exists(dir / "snapshot_00000.json"));
  CHECK(fs::exists(dir / "snapshot_00002.json"));
  CHECK(fs::exists(dir / "snapshot_00004.json"));
  const std::string summary = read_file(dir / "summary.json");
  CHECK(summary.find("\"termination\": \"MaxStepsReached\"") != std::string::npos);
  CHECK(summary.find("[discretization]") != std::string::npos);
}

TEST_CASE("snapshots reproduce their residual norm", "[cli]") {
  const fs::path dir = scratch("snapshot");
  const RunConfig c = small_config(dir);
  std::ostringstream log, err;
  REQUIRE(run(c, RunMode::continue_branch, log, err) == 0);
  const Snapshot s = load_snapshot(dir / "snapshot_00004.json");
  CHECK(s.n_modes == 16);
  CHECK(s.eta.size() == 17);
  const RunConfig back = load_config(s.config);
  const WaveSystem system(back.physical, back.discretization, back.guards);
  const double norm = system.residual(s.state(), s.eps).norm();
  CHECK(std::abs(norm - s.residual_norm) <= 1e-13);
  CHECK(config_hash(back) == s.config_hash);
}

TEST_CASE("malformed snapshots are rejected", "[cli]") {
  const fs::path dir = scratch("bad_snapshot");
  fs::create_directories(dir);
  std::ofstream(dir / "a.json") << "{\"schema\": 2}";
  CHECK_THROWS_AS(load_snapshot(dir / "a.json"), ParseError);
  std::ofstream(dir / "b.json") << "not json";
  CHECK_THROWS_AS(load_snapshot(dir / "b.json"), ParseError);
  CHECK_THROWS_AS(load_snapshot(dir / "missing.json"), ParseError);
}

TEST_CASE("single solve is deterministic", "[cli]") {
  const fs::path a = scratch("single_a"), b = scratch("single_b");
  std::ostringstream log, err;
  RunConfig c = small_config(a);
  REQUIRE(run(c, RunMode::single_solve, log, err) == 0);
  c.output_directory = b.string();
  REQUIRE(run(c, RunMode::single_solve, log, err) == 0);
  CHECK(read_file(a / "branch.csv") == read_file(b / "branch.csv"));
  CHECK(fs::exists(a / "snapshot_single.json"));
  // The snapshot echoes the output directory, which differs here.
  CHECK(load_snapshot(a / "snapshot_single.json").eta == load_snapshot(b / "snapshot_single.json").eta);
}

TEST_CASE("command-line tool", "[cli]") {
  const fs::path dir = scratch("tool");
  fs::create_directories(dir);
  const std::string exe = VWAVE_CLI;
  std::ofstream(dir / "bad.ini") << "[physical]\nrho_bar = 1.5\n";
  CHECK(WEXITSTATUS(std::system((exe + " continue --config " + (dir / "bad.ini").string() + " 2>/dev/null").c_str())) == 2);
  CHECK(WEXITSTATUS(std::system((exe + " bogus 2>/dev/null >/dev/null").c_str())) == 2);
  CHECK(WEXITSTATUS(std::system((exe + " continue --config " + (dir / "missing.ini").string() + " 2>/dev/null").c_str())) == 2);

  std::ofstream(dir / "small.ini") << "[discretization]\nN = 16\nM = 12\n";
  const std::string cmd = exe + " continue --config " + (dir / "small.ini").string() + " --out " +
                          (dir / "out").string() + " --direction - --max-steps 2 > /dev/null";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  const std::string table = read_file(dir / "out" / "branch.csv");
  CHECK(table.find("direction=-") != std::string::npos);
}
