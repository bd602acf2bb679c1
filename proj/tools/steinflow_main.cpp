#include <cstdint>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "steinflow/common.hpp"
#include "steinflow/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"steinflow: Stein variational particle inference with adaptive kernels"};
  app.require_subcommand(1);

  std::string config_path;
  steinflow::CliOverrides cli;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  CLI::App* run = app.add_subcommand("run", "execute one configured run");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out, "override the output directory");
  run->add_flag("--desk", cli.desk, "desk scale: nsteps/20 (and M=50 for ode-inverse)");

  CLI::App* sweep = app.add_subcommand("sweep", "execute a sweep config");
  sweep->add_option("config", config_path, "config file")->required();
  sweep->add_option("--jobs", cli.jobs, "worker threads across independent runs")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "override the output directory");
  sweep->add_flag("--desk", cli.desk, "desk scale: nsteps/20 (and M=50 for ode-inverse)");

  CLI::App* validate = app.add_subcommand("validate", "validate and echo a config");
  validate->add_option("config", config_path, "config file")->required();

  app.add_subcommand("presets", "list built-in presets");

  CLI11_PARSE(app, argc, argv);
  cli.seed = seed;
  cli.out = out;

  if (run->parsed()) return steinflow::cmd_run(config_path, cli);
  if (sweep->parsed()) return steinflow::cmd_sweep(config_path, cli);
  if (validate->parsed()) return steinflow::cmd_validate(config_path);
  return steinflow::cmd_presets();
}
