// Command-line driver: vwave continue | single-solve | validate

#include "vwave/config.hpp"
#include "vwave/errors.hpp"
#include "vwave/run.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Steady two-layer interfacial waves with a point-vortex pair"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::string> direction;
  std::optional<int> max_steps;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "INI configuration file (defaults if omitted)");
    cmd->add_option("--out", out_dir, "output directory");
  };
  CLI::App* cont = app.add_subcommand("continue", "trace a branch from the origin");
  add_common(cont);
  cont->add_option("--direction", direction, "direction of eps")->check(CLI::IsMember({"+", "-"}));
  cont->add_option("--max-steps", max_steps, "number of continuation steps")->check(CLI::NonNegativeNumber);
  CLI::App* single = app.add_subcommand("single-solve", "solve once at single_solve_epsilon");
  add_common(single);
  CLI::App* validate = app.add_subcommand("validate", "run the built-in invariant checks");
  validate->add_option("--seed", seed, "seed of the randomized checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vw::exit_config_error;
  }

  vw::RunConfig config;
  try {
    config = config_path.empty() ? vw::load_config("") : vw::load_config_file(config_path);
    if (out_dir) config.output_directory = *out_dir;
    if (direction) config.direction = *direction == "-" ? -1 : 1;
    if (max_steps) config.continuation.max_steps = *max_steps;
    config.validate();
  } catch (const vw::Error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return vw::exit_config_error;
  }

  vw::RunMode mode = vw::RunMode::continue_branch;
  if (*single) mode = vw::RunMode::single_solve;
  if (*validate) mode = vw::RunMode::validate;
  return vw::run(config, mode, std::cout, std::cerr, seed);
}
