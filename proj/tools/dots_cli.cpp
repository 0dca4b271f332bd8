// Command-line harness for DOTS benchmark runs, ablation suites,
// convergence-ratio checks and evaluator protocol probes.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dots/bench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"DOTS derivative-free stochastic tree search benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "execute a benchmark config (repeated seeded runs)");
  run->add_option("config", config_path, "path to key = value config file")->required();

  std::string ablate_config;
  auto* ablate = app.add_subcommand("ablate", "run full DOTS plus the four ablations");
  ablate->add_option("config", ablate_config, "path to key = value config file")->required();

  std::string ratio_dir;
  double target = 0.0, tol = 1e-9;
  auto* ratio = app.add_subcommand("ratio", "convergence ratio over emitted history CSVs");
  ratio->add_option("dir", ratio_dir, "directory containing *_history.csv files")->required();
  ratio->add_option("--target", target, "known optimum value (default 0)");
  ratio->add_option("--tol", tol, "convergence tolerance (default 1e-9)");

  std::string transport;
  long timeout_ms = 5000;
  auto* check = app.add_subcommand("check-evaluator", "probe an external evaluator for protocol conformance");
  check->add_option("transport", transport, "cmd:\"<program>\" or tcp:<host>:<port>")->required();
  check->add_option("--timeout-ms", timeout_ms, "per-message timeout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return dots::cmd_run(config_path, std::cout);
    if (ablate->parsed()) return dots::cmd_ablate(ablate_config, std::cout);
    if (ratio->parsed()) return dots::cmd_ratio(ratio_dir, target, tol, std::cout);
    if (check->parsed()) return dots::cmd_check_evaluator(transport, std::cout, timeout_ms);
  } catch (const dots::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const dots::ProtocolError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
