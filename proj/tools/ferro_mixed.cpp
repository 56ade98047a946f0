// Command line front end: ferro-mixed run <config.json> [--out DIR] [--threads N] [--log-level L]
//
// Exit codes: 0 success, 2 non-convergence, 1 configuration, mesh or I/O errors.

#include <iostream>

#include <CLI11.hpp>

#include "ferro/log.hpp"
#include "ferro/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mixed finite element solver for ferroelectric polarization"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "run the scenario described by a JSON config");
  std::string config_path, out_dir, level = "info";
  int threads = 0;
  run->add_option("config", config_path, "run configuration (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--threads", threads, "assembly threads (overrides the config)")
      ->check(CLI::PositiveNumber);
  run->add_option("--log-level", level, "error, warn, info or debug");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ferro::set_log_level(ferro::parse_log_level(level));
    ferro::RunConfig config = ferro::load_config(config_path);
    if (!out_dir.empty()) config.output.directory = out_dir;
    if (threads > 0) config.newton.threads = threads;
    ferro::run_scenario(config);
  } catch (const ferro::NewtonError& e) {
    ferro::log(ferro::LogLevel::Error, "no convergence: ", e.what());
    return 2;
  } catch (const ferro::ConvergenceError& e) {
    ferro::log(ferro::LogLevel::Error, "no convergence: ", e.what());
    return 2;
  } catch (const std::exception& e) {
    ferro::log(ferro::LogLevel::Error, e.what());
    return 1;
  }
  return 0;
}
