#include "vwave/run.hpp"

#include "vwave/errors.hpp"
#include "vwave/io.hpp"
#include "vwave/validation.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <optional>

namespace vw {

namespace fs = std::filesystem;

namespace {

fs::path prepare_directory(const RunConfig& config) {
  const fs::path dir(config.output_directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Error(fmt::format("cannot create output directory {}", dir.string()));
  return dir;
}

std::string snapshot_name(int step) { return fmt::format("snapshot_{:05d}.json", step); }

int run_continue(const RunConfig& config, std::ostream& log, std::ostream& err) {
  const fs::path dir = prepare_directory(config);
  const WaveSystem system(config.physical, config.discretization, config.guards);
  BranchTableWriter table(dir / "branch.csv", config_hash(config), config.direction);

  std::optional<BranchPoint> last;
  int last_saved = -1;
  auto on_point = [&](const BranchPoint& p) {
    table.write(p);
    if (p.step % config.snapshot_every == 0) {
      save_snapshot(dir / snapshot_name(p.step), make_snapshot(config, system, p.step, p.state, p.eps));
      last_saved = p.step;
    }
    last = p;
    log << fmt::format("step {:4d}  eps {:+.6e}  c {:+.6e}  |eta|inf {:.3e}  iters {}  det {:+d}\n", p.step,
                       p.eps, p.state.c, p.diagnostics.eta_sup, p.diagnostics.newton_iterations,
                       p.diagnostics.det_sign);
  };
  const Branch branch = continue_branch(system, config.continuation, config.direction, on_point);
  if (last && last->step != last_saved)
    save_snapshot(dir / snapshot_name(last->step), make_snapshot(config, system, last->step, last->state, last->eps));

  const int code = exit_code(branch.termination);
  save_summary(dir / "summary.json",
               {"continue", config.direction, to_string(branch.termination), branch.reason, code,
                static_cast<int>(branch.points.size())},
               config);
  const std::string line = fmt::format("terminated: {} ({})", to_string(branch.termination), branch.reason);
  (code == 0 ? log : err) << line << '\n';
  return code;
}

int run_single(const RunConfig& config, std::ostream& log, std::ostream& err) {
  const fs::path dir = prepare_directory(config);
  const WaveSystem system(config.physical, config.discretization, config.guards);
  const WaveProblem problem(system);
  const double eps = config.single_solve_epsilon;
  BranchTableWriter table(dir / "branch.csv", config_hash(config), eps >= 0.0 ? 1 : -1);

  auto finish = [&](const std::string& termination, const std::string& reason, int code, int points) {
    save_summary(dir / "summary.json", {"single-solve", eps >= 0.0 ? 1 : -1, termination, reason, code, points},
                 config);
    (code == 0 ? log : err) << fmt::format("{}: {}\n", termination, reason);
    return code;
  };

  try {
    const PathPoint origin = start_path(problem, Eigen::VectorXd::Zero(system.dimension()), 0.0, eps >= 0.0 ? 1 : -1);
    BranchPoint p0;
    p0.state = WaveState::unpack(system.grid(), origin.x);
    p0.diagnostics = diagnose(system, p0.state, 0.0, origin.lin.jacobian, origin.residual_norm, 0);
    table.write(p0);

    // Tangent predictor to eps, then Newton at fixed eps.
    const int n = system.dimension();
    const Eigen::VectorXd guess = origin.tangent.head(n) * (eps / origin.tangent[n]);
    const NewtonResult sol = newton_solve(problem, guess, eps, config.continuation);

    BranchPoint p1;
    p1.step = 1;
    p1.state = WaveState::unpack(system.grid(), sol.x);
    p1.eps = eps;
    p1.diagnostics = diagnose(system, p1.state, eps, system.jacobian(p1.state, eps), sol.residual_norm,
                              sol.iterations);
    table.write(p1);
    save_snapshot(dir / "snapshot_single.json", make_snapshot(config, system, 1, p1.state, eps));
    return finish("Converged", fmt::format("{} Newton iterations, residual {:.3e}", sol.iterations, sol.residual_norm),
                  0, 2);
  } catch (const VortexTooClose& e) {
    return finish(to_string(Alternative::vortex_near_interface), e.what(), 4, 0);
  } catch (const PointOutsideLayer& e) {
    return finish(to_string(Alternative::vortex_near_interface), e.what(), 4, 0);
  } catch (const DegenerateStrip& e) {
    return finish(to_string(Alternative::interface_touches_boundary), e.what(), 4, 0);
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    return finish(to_string(Alternative::newton_failure), e.what(), 3, 0);
  }
}

}  // namespace

int run(const RunConfig& config, RunMode mode, std::ostream& log, std::ostream& err, std::uint64_t seed) {
  try {
    switch (mode) {
      case RunMode::validate:
        return report(run_validation(seed), log) ? 0 : 3;
      case RunMode::single_solve:
        return run_single(config, log, err);
      case RunMode::continue_branch:
        return run_continue(config, log, err);
    }
  } catch (const ParseError& e) {
    err << "configuration error: " << e.what() << '\n';
  } catch (const ValidationError& e) {
    err << "configuration error: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  }
  return exit_config_error;
}

}  // namespace vw
