#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ftvs/scenario.hpp"

namespace ftvs {

struct BatchCase {
  std::string label;
  ScenarioConfig config;
};

struct BatchRow {
  std::string label;
  RunReport report;
};

struct BatchSummary {
  int cases = 0;
  int successes = 0;
  int intercepts = 0;
  double mean_position_error = 0.0;  // m, over intercepted cases
  double mean_relative_speed = 0.0;  // m/s, over intercepted cases
  double mean_prediction_error = 0.0;  // m, over all cases with a finite value
  double success_rate() const { return cases ? static_cast<double>(successes) / cases : 0.0; }
};

/// Runs every case on up to `jobs` worker threads; rows come back in case order.
std::vector<BatchRow> run_batch(const std::vector<BatchCase>& cases, int jobs = 1);

/// Copies of `base` with seeds first, first+1, ...
std::vector<BatchCase> seed_sweep(const ScenarioConfig& base, std::uint64_t first, int count);

BatchSummary summarize(const std::vector<BatchRow>& rows);

/// Per-case capture errors plus the average row (cm and mm/s).
void write_batch_table(std::ostream& out, const std::vector<BatchRow>& rows);
void write_batch_csv(std::ostream& out, const std::vector<BatchRow>& rows);

struct MarginResult {
  double margin = 0.0;           // s
  bool baseline_ok = false;      // zero-length blackout meets the envelope
  std::vector<std::pair<double, double>> probes;  // (blackout, position error)
};

/// Longest terminal blackout keeping the capture position error within
/// `envelope`, by bisection on [0, duration] to `resolution` seconds.
MarginResult occlusion_margin(const ScenarioConfig& cfg, double envelope, double resolution = 0.5);

}  // namespace ftvs
