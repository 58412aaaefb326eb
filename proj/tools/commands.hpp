#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ftvs::cli {

enum ExitCode : int { kExitOk = 0, kExitScenarioFailure = 2, kExitConfigError = 3 };

struct RunOptions {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
};

struct BatchOptions {
  std::vector<std::string> inputs;
  int jobs = 1;
  int seeds = 0;  // > 0: sweep each scenario over this many consecutive seeds
  std::optional<std::string> csv_path;
};

struct MarginOptions {
  std::string scenario;
  double envelope = 0.04;  // m
  double resolution = 0.5;  // s
  std::optional<std::uint64_t> seed;
};

/// Each command returns an ExitCode. Configuration problems are reported on
/// `err` and map to kExitConfigError.
int run_command(const RunOptions& opt, std::ostream& out, std::ostream& err);
int batch_command(const BatchOptions& opt, std::ostream& out, std::ostream& err);
int margin_command(const MarginOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace ftvs::cli
