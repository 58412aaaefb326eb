#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>

#include "ftvs/batch.hpp"
#include "ftvs/observability.hpp"
#include "ftvs/scenario.hpp"
#include "paths.hpp"

namespace ftvs::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError(path.string() + ": cannot open for writing");
  return f;
}

ScenarioConfig load_with_seed(const std::string& path, const std::optional<std::uint64_t>& seed) {
  ScenarioConfig cfg = load_scenario(path);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

void print_summary(std::ostream& out, const RunReport& r) {
  out << r.name << " (seed " << r.seed << "): "
      << (r.success ? "capture" : "FAILED: " + r.failure_stage);
  if (r.intercept_at) {
    out << std::fixed << std::setprecision(2) << ", t_f = " << *r.intercept_at
        << " s, position error = " << r.position_error_at_capture * 100.0
        << " cm, relative speed = " << r.relative_speed_at_capture * 1000.0 << " mm/s";
    out.unsetf(std::ios::floatfield);
  }
  out << '\n';
}

}  // namespace

int run_command(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const ScenarioConfig cfg = load_with_seed(opt.scenario, opt.seed);
    const fs::path dir(opt.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError(dir.string() + ": " + ec.message());

    const RunResult res = run_scenario(cfg);
    {
      auto f = open_output(dir / "epochs.csv");
      write_epoch_csv(f, res.epochs);
    }
    if (res.plan) {
      auto f = open_output(dir / "trajectory.csv");
      write_trajectory_csv(f, *res.plan);
    }
    {
      ObservabilityStudyConfig oc;
      oc.duration = cfg.duration;
      oc.measurement_period = 1.0 / cfg.rates.sensor;
      auto f = open_output(dir / "observability.csv");
      write_observability_csv(f, observability_study(cfg.initial_target(), oc));
    }
    {
      auto f = open_output(dir / "report.txt");
      write_report(f, res.report);
    }
    print_summary(out, res.report);
    return res.report.success ? kExitOk : kExitScenarioFailure;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

int batch_command(const BatchOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    std::vector<BatchCase> cases;
    for (const auto& file : expand_scenario_inputs(opt.inputs)) {
      ScenarioConfig cfg = load_scenario(file.string());
      cfg.validate();
      const std::string label = file.stem().string();
      if (opt.seeds > 0) {
        for (auto& c : seed_sweep(cfg, cfg.seed, opt.seeds)) {
          c.label = label + "#" + std::to_string(c.config.seed);
          cases.push_back(std::move(c));
        }
      } else {
        cases.push_back({label, std::move(cfg)});
      }
    }
    const auto rows = run_batch(cases, opt.jobs);
    write_batch_table(out, rows);
    if (opt.csv_path) {
      auto f = open_output(*opt.csv_path);
      write_batch_csv(f, rows);
    }
    return summarize(rows).successes == static_cast<int>(rows.size()) ? kExitOk
                                                                       : kExitScenarioFailure;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

int margin_command(const MarginOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (!(opt.envelope >= 0.0)) throw ConfigError("--envelope must be non-negative");
    if (!(opt.resolution > 0.0)) throw ConfigError("--resolution must be positive");
    const ScenarioConfig cfg = load_with_seed(opt.scenario, opt.seed);
    const MarginResult m = occlusion_margin(cfg, opt.envelope, opt.resolution);
    const auto prec = out.precision(17);
    out << "blackout_s,position_error_m\n";
    for (const auto& [blackout, error] : m.probes) out << blackout << ',' << error << '\n';
    out.precision(prec);
    if (!m.baseline_ok) {
      out << "baseline without blackout exceeds the envelope\n";
      return kExitScenarioFailure;
    }
    out << "margin = " << m.margin << " s\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace ftvs::cli
