// Experiment driver: offline basis construction, online solver sweeps,
// figure-data sweeps, and a built-in property check suite.
//
// Configuration values resolve in three layers: built-in defaults, then an
// optional --config key=value file, then --set key=value overrides.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rom/experiment.hpp"

namespace {

rom::ExperimentConfig resolve_config(const std::string& config_file,
                                     const std::vector<std::string>& overrides) {
  rom::ExperimentConfig config;
  if (!config_file.empty()) {
    rom::apply_config_file(config, config_file);
  }
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    const std::string& item = overrides[i];
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw rom::ConfigError("--set expects key=value, got '" + item + "'");
    }
    rom::apply_override(config, item.substr(0, eq), item.substr(eq + 1),
                        "--set[" + std::to_string(i) + "]");
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-order driven-cavity flow experiments"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> overrides;
  app.add_option("--config", config_file, "key=value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--set", overrides,
                 "override a configuration key, e.g. --set n=16 (repeatable)");

  auto* offline = app.add_subcommand(
      "offline", "Build the reduced basis and hyper-reduction bundle");
  auto* online = app.add_subcommand(
      "online", "Sweep the configured models/solvers over parameter samples");
  auto* figure = app.add_subcommand(
      "figure-data", "Emit CSV sweeps of the error indicator");
  std::string sweep = "ndeim-sweep";
  figure->add_option("--sweep", sweep,
                     "strategy-comparison | ndeim-sweep | gappy-vs-deim");
  auto* verify = app.add_subcommand("verify", "Run the built-in property checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      return rom::run_verify(std::cout) ? 0 : 1;
    }
    const rom::ExperimentConfig config = resolve_config(config_file, overrides);
    if (offline->parsed()) {
      rom::run_offline(config, std::cout);
    } else if (online->parsed()) {
      rom::run_online(config, std::cout);
    } else if (figure->parsed()) {
      rom::run_figure_data(config, sweep, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
