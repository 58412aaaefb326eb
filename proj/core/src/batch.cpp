#include "ftvs/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

namespace ftvs {

std::vector<BatchRow> run_batch(const std::vector<BatchCase>& cases, int jobs) {
  std::vector<BatchRow> rows(cases.size());
  std::vector<std::exception_ptr> errors(cases.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      try {
        rows[i] = {cases[i].label, run_scenario(cases[i].config).report};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(cases.size(), 1)));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

std::vector<BatchCase> seed_sweep(const ScenarioConfig& base, std::uint64_t first, int count) {
  std::vector<BatchCase> out;
  for (int i = 0; i < count; ++i) {
    BatchCase c{base.name + "#" + std::to_string(first + i), base};
    c.config.seed = first + static_cast<std::uint64_t>(i);
    out.push_back(std::move(c));
  }
  return out;
}

BatchSummary summarize(const std::vector<BatchRow>& rows) {
  BatchSummary s;
  s.cases = static_cast<int>(rows.size());
  int predictions = 0;
  for (const auto& r : rows) {
    if (r.report.success) ++s.successes;
    if (r.report.intercept_at) {
      ++s.intercepts;
      s.mean_position_error += r.report.position_error_at_capture;
      s.mean_relative_speed += r.report.relative_speed_at_capture;
    }
    if (std::isfinite(r.report.terminal_prediction_error)) {
      ++predictions;
      s.mean_prediction_error += r.report.terminal_prediction_error;
    }
  }
  if (s.intercepts) {
    s.mean_position_error /= s.intercepts;
    s.mean_relative_speed /= s.intercepts;
  }
  if (predictions) s.mean_prediction_error /= predictions;
  return s;
}

void write_batch_table(std::ostream& out, const std::vector<BatchRow>& rows) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::left << std::setw(24) << "case" << std::right << std::setw(18) << "position [cm]"
      << std::setw(18) << "velocity [mm/s]" << std::setw(10) << "capture" << '\n';
  out << std::fixed << std::setprecision(2);
  for (const auto& r : rows) {
    out << std::left << std::setw(24) << r.label << std::right;
    if (r.report.intercept_at) {
      out << std::setw(18) << r.report.position_error_at_capture * 100.0 << std::setw(18)
          << r.report.relative_speed_at_capture * 1000.0;
    } else {
      out << std::setw(18) << "-" << std::setw(18) << "-";
    }
    out << std::setw(10) << (r.report.success ? "yes" : "no") << '\n';
  }
  const BatchSummary s = summarize(rows);
  out << std::left << std::setw(24) << "average" << std::right << std::setw(18)
      << s.mean_position_error * 100.0 << std::setw(18) << s.mean_relative_speed * 1000.0
      << std::setw(9) << s.success_rate() * 100.0 << "%\n";
  out.flags(flags);
  out.precision(prec);
}

void write_batch_csv(std::ostream& out, const std::vector<BatchRow>& rows) {
  const auto prec = out.precision(17);
  out << "case,seed,success,failure_stage,converged_at,departure_at,occlusion_at,intercept_at,"
         "position_error,relative_speed,terminal_prediction_error\n";
  auto opt = [&](const std::optional<double>& v) {
    out << ',';
    if (v) out << *v;
  };
  for (const auto& r : rows) {
    const auto& p = r.report;
    out << r.label << ',' << p.seed << ',' << (p.success ? 1 : 0) << ',' << p.failure_stage;
    opt(p.converged_at);
    opt(p.departure_at);
    opt(p.occlusion_at);
    opt(p.intercept_at);
    out << ',' << p.position_error_at_capture << ',' << p.relative_speed_at_capture << ','
        << p.terminal_prediction_error << '\n';
  }
  out.precision(prec);
}

MarginResult occlusion_margin(const ScenarioConfig& cfg, double envelope, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("occlusion_margin: resolution must be positive");
  MarginResult res;
  auto ok = [&](double blackout) {
    ScenarioConfig c = cfg;
    c.terminal_blackout = blackout;
    const RunReport r = run_scenario(c).report;
    const double err = r.intercept_at ? r.position_error_at_capture
                                      : std::numeric_limits<double>::infinity();
    res.probes.emplace_back(blackout, err);
    return err <= envelope;
  };
  res.baseline_ok = ok(0.0);
  if (!res.baseline_ok) return res;
  double lo = 0.0;
  double hi = cfg.duration;
  if (ok(hi)) {
    res.margin = hi;
    return res;
  }
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  res.margin = lo;
  return res;
}

}  // namespace ftvs
