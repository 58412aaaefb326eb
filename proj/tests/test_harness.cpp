#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ftvs/batch.hpp"
#include "ftvs/scenario.hpp"
#include "support.hpp"

namespace ftvs {
namespace {

std::string epoch_csv(const RunResult& r) {
  std::ostringstream out;
  write_epoch_csv(out, r.epochs);
  return out.str();
}

std::string report_text(const RunReport& r) {
  std::ostringstream out;
  write_report(out, r);
  return out.str();
}

const RunResult& analog_run() {
  static const RunResult r = run_scenario(analog_scenario());
  return r;
}

TEST(DeriveSeed, StableAndStreamSeparated) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(2, 2, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
}

TEST(RunScenario, RepeatedRunsAreByteIdentical) {
  const RunResult again = run_scenario(analog_scenario());
  EXPECT_EQ(epoch_csv(again), epoch_csv(analog_run()));
  EXPECT_EQ(report_text(again.report), report_text(analog_run().report));
  ASSERT_TRUE(again.plan && analog_run().plan);
  std::ostringstream a, b;
  write_trajectory_csv(a, *again.plan);
  write_trajectory_csv(b, *analog_run().plan);
  EXPECT_EQ(a.str(), b.str());
}

TEST(RunScenario, DifferentSeedsDiffer) {
  ScenarioConfig c = analog_scenario();
  c.seed = 2;
  c.duration = 10.0;
  ScenarioConfig d = c;
  d.seed = 3;
  EXPECT_NE(epoch_csv(run_scenario(c)), epoch_csv(run_scenario(d)));
}

TEST(RunScenario, AnalogCapturesInsideEnvelope) {
  const RunReport& r = analog_run().report;
  EXPECT_TRUE(r.success) << r.failure_stage;
  ASSERT_TRUE(r.converged_at && r.departure_at && r.occlusion_at && r.intercept_at);
  EXPECT_LE(*r.converged_at, *r.departure_at);
  EXPECT_LT(*r.occlusion_at, *r.intercept_at);
  EXPECT_NEAR(*r.intercept_at - *r.occlusion_at, 10.0, 1.0);
  EXPECT_LE(r.position_error_at_capture, 0.04);
  EXPECT_LE(r.relative_speed_at_capture, 0.01);
  EXPECT_FALSE(r.constraint_violated);
  EXPECT_LT(r.max_abs_sigma, 1.0);
}

TEST(RunScenario, InterceptHorizonMatchesExperimentTimeline) {
  const RunReport& r = analog_run().report;
  ASSERT_TRUE(r.departure_at && r.intercept_at);
  const double horizon = *r.intercept_at - *r.departure_at;
  EXPECT_GE(horizon, 0.8 * 37.4);
  EXPECT_LE(horizon, 1.2 * 37.4);
}

TEST(RunScenario, EpochsFollowSensorRate) {
  const auto& epochs = analog_run().epochs;
  ASSERT_GT(epochs.size(), 10u);
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    EXPECT_NEAR(epochs[i].t, 0.5 * static_cast<double>(i), 1e-12);
  }
}

TEST(RunScenario, BlackoutEpochsAreGatedWithEmptyClouds) {
  const RunResult& run = analog_run();
  int blackout = 0;
  for (const auto& e : run.epochs) {
    if (!e.blackout) continue;
    ++blackout;
    EXPECT_EQ(e.cloud_points, 0u);
    EXPECT_FALSE(e.gamma);
    EXPECT_TRUE(std::isinf(e.fit_error));
    EXPECT_EQ(e.outcome, UpdateOutcome::kGated);
  }
  EXPECT_GE(blackout, 18);
  EXPECT_GE(run.report.gated_epochs, blackout);
}

TEST(RunScenario, HealthyEpochsHaveSmallFitError) {
  for (const auto& e : analog_run().epochs) {
    if (e.gamma && e.filter_ready) {
      EXPECT_LT(e.fit_error, 1.2e-5);
    }
  }
}

TEST(RunScenario, IdealConditionsCaptureWithinOneMillimetre) {
  const RunResult r = run_scenario(test::ideal_scenario());
  EXPECT_TRUE(r.report.success) << r.report.failure_stage;
  EXPECT_LT(r.report.position_error_at_capture, 1e-3);
}

TEST(RunScenario, TotalBlackoutNeverConverges) {
  ScenarioConfig c = analog_scenario();
  c.duration = 30.0;
  c.terminal_blackout = 0.0;
  c.faults = FaultSchedule({{0.0, 31.0, FaultMode::kBlackout, 1.0}});
  const RunResult r = run_scenario(c);
  EXPECT_FALSE(r.report.success);
  EXPECT_EQ(r.report.failure_stage, "no convergence");
  EXPECT_FALSE(r.plan.has_value());
  for (const auto& e : r.epochs) EXPECT_FALSE(e.filter_ready);
}

TEST(RunScenario, MidRunBlackoutIsRidden) {
  ScenarioConfig c = analog_scenario();
  c.faults = FaultSchedule({{40.0, 46.0, FaultMode::kBlackout, 1.0}});
  const RunResult r = run_scenario(c);
  EXPECT_TRUE(r.report.success) << r.report.failure_stage;
  for (const auto& e : r.epochs) {
    if (e.t >= 40.0 && e.t < 46.0) {
      EXPECT_EQ(e.cloud_points, 0u);
      EXPECT_FALSE(e.gamma);
    }
  }
}

TEST(RunScenario, RejectsInvalidConfig) {
  ScenarioConfig c = analog_scenario();
  c.rates.sensor = 3.0;
  EXPECT_THROW(run_scenario(c), ConfigError);
}

TEST(RunScenario, TomlBaselineMatchesBuiltIn) {
  ScenarioConfig toml = load_scenario(std::string(FTVS_DATA_DIR) + "/scenarios/analog.toml");
  toml.duration = 40.0;
  ScenarioConfig builtin = analog_scenario();
  builtin.duration = 40.0;
  const RunResult a = run_scenario(toml);
  const RunResult b = run_scenario(builtin);
  ASSERT_EQ(a.epochs.size(), b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    EXPECT_LT((a.epochs[i].estimate.body.rho_o - b.epochs[i].estimate.body.rho_o).norm(), 1e-9);
    EXPECT_EQ(a.epochs[i].gamma, b.epochs[i].gamma);
  }
}

TEST(EpochCsv, HeaderAndPrecision) {
  const std::string csv = epoch_csv(analog_run());
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_EQ(header.rfind("t,", 0), 0u);
  EXPECT_NE(header.find("fit_error"), std::string::npos);
  EXPECT_NE(header.find("gamma"), std::string::npos);
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  EXPECT_EQ(static_cast<std::size_t>(lines), analog_run().epochs.size() + 1);
}

TEST(Batch, JobsDoNotChangeResults) {
  ScenarioConfig base = analog_scenario();
  base.duration = 20.0;
  const auto cases = seed_sweep(base, 5, 4);
  ASSERT_EQ(cases.size(), 4u);
  EXPECT_EQ(cases[3].config.seed, 8u);
  const auto serial = run_batch(cases, 1);
  const auto parallel = run_batch(cases, 3);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].label, parallel[i].label);
    EXPECT_EQ(report_text(serial[i].report), report_text(parallel[i].report));
  }
}

TEST(Batch, ShippedCasesTable) {
  std::vector<BatchCase> cases;
  for (int i = 1; i <= 4; ++i) {
    const std::string path =
        std::string(FTVS_DATA_DIR) + "/scenarios/cases/case" + std::to_string(i) + ".toml";
    cases.push_back({"case" + std::to_string(i), load_scenario(path)});
  }
  const auto rows = run_batch(cases, 2);
  const BatchSummary s = summarize(rows);
  EXPECT_EQ(s.cases, 4);
  EXPECT_EQ(s.successes, 4);
  EXPECT_LE(s.mean_position_error, 0.04);
  EXPECT_LE(s.mean_relative_speed, 0.01);
  std::ostringstream table, csv;
  write_batch_table(table, rows);
  write_batch_csv(csv, rows);
  for (int i = 1; i <= 4; ++i) {
    EXPECT_NE(table.str().find("case" + std::to_string(i)), std::string::npos);
  }
  EXPECT_NE(table.str().find("average"), std::string::npos);
  const std::string csv_text = csv.str();
  EXPECT_EQ(std::count(csv_text.begin(), csv_text.end(), '\n'), 5);
}

TEST(Batch, SummaryOfEmptyBatch) {
  const BatchSummary s = summarize({});
  EXPECT_EQ(s.cases, 0);
  EXPECT_EQ(s.success_rate(), 0.0);
}

TEST(Margin, UnboundedEnvelopeGivesFullDuration) {
  ScenarioConfig c = analog_scenario();
  c.duration = 150.0;
  const MarginResult m = occlusion_margin(c, 1e9, 10.0);
  EXPECT_TRUE(m.baseline_ok);
  EXPECT_EQ(m.margin, c.duration);
  EXPECT_EQ(m.probes.size(), 2u);
}

TEST(Margin, ZeroEnvelopeFailsBaseline) {
  ScenarioConfig c = analog_scenario();
  c.duration = 150.0;
  const MarginResult m = occlusion_margin(c, 0.0, 10.0);
  EXPECT_FALSE(m.baseline_ok);
  EXPECT_EQ(m.margin, 0.0);
  ASSERT_EQ(m.probes.size(), 1u);
  EXPECT_EQ(m.probes[0].first, 0.0);
}

TEST(Margin, FailingScenarioHasZeroMargin) {
  ScenarioConfig c = analog_scenario();
  c.duration = 30.0;
  c.faults = FaultSchedule({{0.0, 31.0, FaultMode::kBlackout, 1.0}});
  const MarginResult m = occlusion_margin(c, 0.04, 1.0);
  EXPECT_FALSE(m.baseline_ok);
  EXPECT_EQ(m.margin, 0.0);
  EXPECT_TRUE(std::isinf(m.probes[0].second));
  EXPECT_THROW(occlusion_margin(c, 0.04, 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace ftvs
