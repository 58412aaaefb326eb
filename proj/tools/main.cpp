#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace ftvs::cli;

  CLI::App app{"Fault-tolerant visual servoing simulator"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and write CSV artifacts");
  run_cmd->add_option("scenario", run.scenario, "Scenario TOML file")->required();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--out", run.out_dir, "Output directory")->capture_default_str();

  BatchOptions batch;
  auto* batch_cmd = app.add_subcommand("batch", "Run many scenarios and print the capture table");
  batch_cmd->add_option("inputs", batch.inputs, "Scenario directories, files or globs")
      ->required();
  batch_cmd->add_option("--jobs", batch.jobs, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  batch_cmd->add_option("--seeds", batch.seeds, "Sweep each scenario over N consecutive seeds")
      ->check(CLI::NonNegativeNumber);
  batch_cmd->add_option("--csv", batch.csv_path, "Also write per-case results as CSV");

  MarginOptions margin;
  auto* margin_cmd =
      app.add_subcommand("margin", "Longest terminal blackout that still meets the envelope");
  margin_cmd->add_option("scenario", margin.scenario, "Scenario TOML file")->required();
  margin_cmd->add_option("--envelope", margin.envelope, "Capture envelope (m)")->required();
  margin_cmd->add_option("--resolution", margin.resolution, "Bisection resolution (s)")
      ->capture_default_str();
  margin_cmd->add_option("--seed", margin.seed, "Override the scenario seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  if (*run_cmd) return run_command(run, std::cout, std::cerr);
  if (*batch_cmd) return batch_command(batch, std::cout, std::cerr);
  return margin_command(margin, std::cout, std::cerr);
}
