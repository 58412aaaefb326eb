#include "ftvs/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace ftvs {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ index);
}

namespace {

constexpr std::uint64_t kTruthStream = 1;
constexpr std::uint64_t kScanStream = 2;
constexpr std::uint64_t kAcquisitionStream = 3;

bool integer_ratio(double a, double b) {
  const double r = a / b;
  return r >= 1.0 - 1e-9 && std::abs(r - std::round(r)) < 1e-9;
}

}  // namespace

void ScenarioConfig::validate() const {
  auto bad = [&](const std::string& what) { throw ConfigError(name + ": " + what); };
  if (!(duration > 0.0)) bad("duration must be positive");
  if (!(rates.sensor > 0.0) || !(rates.planner > 0.0) || !(rates.plant > 0.0)) {
    bad("rates must be positive");
  }
  if (!integer_ratio(rates.plant, rates.sensor) || !integer_ratio(rates.plant, rates.planner)) {
    bad("plant rate must be an integer multiple of the sensor and planner rates");
  }
  if (!(noise.substep > 0.0) || noise.substep > 1.0 / rates.plant + 1e-12) {
    bad("noise.substep must be positive and no longer than one plant period");
  }
  if (!(a_max > 0.0)) bad("a_max must be positive");
  if (!(capture_envelope >= 0.0) || !(capture_velocity_max >= 0.0)) {
    bad("capture tolerances must be non-negative");
  }
  if (!(terminal_blackout >= 0.0)) bad("terminal_blackout must be non-negative");
  if (!(departure_hold >= 0.0) || !(replan_freeze >= 0.0)) bad("hold times must be non-negative");
  if (estimator.window < 1) bad("estimator.window must be >= 1");
  if (estimator.convergence_hold < 1) bad("estimator.convergence_hold must be >= 1");
  if (icp.max_iterations < 1 || !(icp.correspondence_cutoff > 0.0)) bad("icp settings invalid");
  try {
    sigma_from_inertia(inertia);
  } catch (const std::invalid_argument& e) {
    bad(e.what());
  }
  SensorConfig s = sensor;
  s.rate = rates.sensor;
  s.validate();
}

TargetState ScenarioConfig::initial_target() const {
  TargetState x;
  x.body = initial;
  x.sigma = sigma_from_inertia(inertia);
  x.varrho = varrho;
  x.mu = mu;
  return x;
}

SurfaceModel ScenarioConfig::surface_model() const {
  return model_path ? load_obj(*model_path) : default_mock_satellite();
}

ScenarioConfig analog_scenario() {
  ScenarioConfig c;
  c.name = "analog";
  c.seed = 1;
  c.duration = 200.0;
  c.inertia = {14.0, 10.0, 6.0};
  c.varrho = Vec3(-0.15, 0.03, -0.05);
  c.mu = UnitQuaternion::from_axis_angle(Vec3(1.0, 2.0, -1.0), 4.0 * M_PI / 180.0);
  c.initial.q = UnitQuaternion::from_axis_angle(Vec3(0.3, -1.0, 0.2), 0.6);
  c.initial.omega = Vec3(0.15, -0.18, -0.12);
  c.initial.rho_o = Vec3(-0.4, 0.3, 2.0);
  c.initial.rho_o_dot = Vec3(0.006, -0.004, 0.005);
  c.noise = ProcessNoise::isotropic(2e-6, 3e-5, 0.01);
  c.sensor = SensorConfig{};
  c.terminal_blackout = 10.0;
  c.a_max = 0.02;
  c.chaser_r0 = Vec3(0.5, -0.5, -3.0);
  c.chaser_r0_dot = Vec3::Zero();
  return c;
}

ScenarioConfig scenario_from_document(const ConfigDocument& d, const std::string& base_dir) {
  ScenarioConfig c = analog_scenario();
  c.name = d.string_or("name", c.name);
  if (d.has("seed")) {
    const double s = d.number("seed");
    if (s < 0.0 || s != std::floor(s)) throw ConfigError(d.origin() + ": seed must be a non-negative integer");
    c.seed = static_cast<std::uint64_t>(s);
  }
  c.duration = d.number_or("duration", c.duration);

  if (d.has("target.inertia")) {
    const Vec3 I = d.vec3_or("target.inertia", Vec3::Zero());
    c.inertia = {I.x(), I.y(), I.z()};
  }
  c.varrho = d.vec3_or("target.varrho", c.varrho);
  auto quat = [&](const std::string& key, const UnitQuaternion& fallback) {
    if (!d.has(key)) return fallback;
    try {
      return UnitQuaternion::from_vec4(d.vec4_or(key, fallback.coeffs()));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(d.origin() + ": " + key + ": " + e.what());
    }
  };
  c.mu = quat("target.mu", c.mu);
  c.initial.q = quat("target.q", c.initial.q);
  c.initial.omega = d.vec3_or("target.omega", c.initial.omega);
  c.initial.rho_o = d.vec3_or("target.rho_o", c.initial.rho_o);
  c.initial.rho_o_dot = d.vec3_or("target.rho_o_dot", c.initial.rho_o_dot);

  c.noise = ProcessNoise::isotropic(d.number_or("noise.force_var", c.noise.force_cov(0, 0)),
                                    d.number_or("noise.torque_var", c.noise.torque_cov(0, 0)),
                                    d.number_or("noise.substep", c.noise.substep));

  c.rates.sensor = d.number_or("rates.sensor", c.rates.sensor);
  c.rates.planner = d.number_or("rates.planner", c.rates.planner);
  c.rates.plant = d.number_or("rates.plant", c.rates.plant);
  c.sensor.rate = c.rates.sensor;
  c.sensor.noise_std = d.number_or("sensor.noise_std", c.sensor.noise_std);
  c.sensor.outlier_fraction = d.number_or("sensor.outlier_fraction", c.sensor.outlier_fraction);
  c.sensor.outlier_box = d.number_or("sensor.outlier_box", c.sensor.outlier_box);
  c.sensor.max_points = static_cast<int>(d.number_or("sensor.max_points", c.sensor.max_points));
  c.sensor.fov_halfangle = d.number_or("sensor.fov_halfangle", c.sensor.fov_halfangle);
  c.sensor.hidden_surface = d.boolean_or("sensor.hidden_surface", c.sensor.hidden_surface);
  if (auto m = d.string("sensor.model")) {
    std::filesystem::path p(*m);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    c.model_path = p.string();
    if (!std::filesystem::is_regular_file(p)) {
      throw ConfigError("sensor.model: no such file: " + p.string());
    }
    load_obj(*c.model_path);
  }

  std::vector<FaultInterval> faults;
  if (d.has("faults.blackouts")) {
    for (const auto& row : d.number_rows("faults.blackouts")) {
      if (row.size() != 2) throw ConfigError(d.origin() + ": faults.blackouts rows are [start, end]");
      faults.push_back({row[0], row[1], FaultMode::kBlackout, 1.0});
    }
  }
  if (d.has("faults.degraded")) {
    for (const auto& row : d.number_rows("faults.degraded")) {
      if (row.size() != 3) {
        throw ConfigError(d.origin() + ": faults.degraded rows are [start, end, noise_multiplier]");
      }
      faults.push_back({row[0], row[1], FaultMode::kDegraded, row[2]});
    }
  }
  c.faults = FaultSchedule(std::move(faults));
  c.terminal_blackout = d.number_or("faults.terminal_blackout", c.terminal_blackout);

  c.chaser_r0 = d.vec3_or("chaser.r0", c.chaser_r0);
  c.chaser_r0_dot = d.vec3_or("chaser.r0_dot", c.chaser_r0_dot);
  c.a_max = d.number_or("chaser.a_max", c.a_max);
  c.capture_envelope = d.number_or("chaser.capture_envelope", c.capture_envelope);
  c.capture_velocity_max = d.number_or("chaser.capture_velocity_max", c.capture_velocity_max);
  c.departure_hold = d.number_or("chaser.departure_hold", c.departure_hold);
  c.replan_freeze = d.number_or("chaser.replan_freeze", c.replan_freeze);

  auto& e = c.estimator;
  e.constrained = d.boolean_or("estimator.constrained", e.constrained);
  e.adaptive = d.boolean_or("estimator.adaptive", e.adaptive);
  e.window = static_cast<int>(d.number_or("estimator.window", e.window));
  e.char_length = d.number_or("estimator.char_length", e.char_length);
  e.alpha_gate_scale = d.number_or("estimator.alpha_gate_scale", e.alpha_gate_scale);
  e.r_floor = d.number_or("estimator.r_floor", e.r_floor);
  e.box_margin = d.number_or("estimator.box_margin", e.box_margin);
  e.max_step = d.number_or("estimator.max_step", e.max_step);
  e.r0_position_std = d.number_or("estimator.r0_position_std", e.r0_position_std);
  e.r0_attitude_std = d.number_or("estimator.r0_attitude_std", e.r0_attitude_std);
  auto& u = e.initial;
  u.attitude = d.number_or("estimator.initial_attitude_std", u.attitude);
  u.omega = d.number_or("estimator.initial_omega_std", u.omega);
  u.position = d.number_or("estimator.initial_position_std", u.position);
  u.velocity = d.number_or("estimator.initial_velocity_std", u.velocity);
  u.sigma = d.number_or("estimator.initial_sigma_std", u.sigma);
  u.varrho = d.number_or("estimator.initial_varrho_std", u.varrho);
  u.mu = d.number_or("estimator.initial_mu_std", u.mu);
  e.convergence_threshold = d.number_or("estimator.convergence_threshold", e.convergence_threshold);
  e.convergence_hold = static_cast<int>(d.number_or("estimator.convergence_hold", e.convergence_hold));

  auto& i = c.icp;
  if (d.has("icp.eps_threshold")) i.eps_threshold = d.number("icp.eps_threshold");
  i.max_iterations = static_cast<int>(d.number_or("icp.max_iterations", i.max_iterations));
  i.correspondence_cutoff = d.number_or("icp.correspondence_cutoff", i.correspondence_cutoff);
  i.convergence_tol = d.number_or("icp.convergence_tol", i.convergence_tol);
  i.acquisition_angle =
      d.number_or("icp.acquisition_angle_deg", i.acquisition_angle * 180.0 / M_PI) * M_PI / 180.0;
  i.acquisition_offset = d.number_or("icp.acquisition_offset", i.acquisition_offset);

  auto& s = c.solver;
  s.tolerance = d.number_or("planner.tolerance", s.tolerance);
  s.max_iterations = static_cast<int>(d.number_or("planner.max_iterations", s.max_iterations));
  if (d.has("planner.start_horizons")) s.start_horizons = d.numbers("planner.start_horizons");
  s.sample_period = d.number_or("planner.sample_period", s.sample_period);

  const auto unused = d.unused_keys();
  if (!unused.empty()) {
    std::string list;
    for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError(d.origin() + ": unknown keys: " + list);
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  const ConfigDocument doc = ConfigDocument::load(path);
  const std::string base = std::filesystem::path(path).parent_path().string();
  return scenario_from_document(doc, base.empty() ? "." : base);
}

namespace {

Pose perturbed_pose(const Pose& p, double angle, double offset, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  Vec3 axis;
  for (int k = 0; k < 3; ++k) axis(k) = n01(rng);
  Vec3 shift;
  for (int k = 0; k < 3; ++k) shift(k) = n01(rng);
  Pose out;
  out.attitude = quat_product(UnitQuaternion::from_axis_angle(axis.normalized(), angle), p.attitude);
  out.position = p.position + offset * shift.normalized();
  return out;
}

class ClosedLoop {
 public:
  explicit ClosedLoop(const ScenarioConfig& cfg)
      : cfg_(cfg),
        model_(cfg.surface_model()),
        nearest_(model_),
        truth_(cfg.initial_target()),
        truth_rng_(derive_seed(cfg.seed, kTruthStream)),
        monitor_(cfg.estimator.convergence_threshold, cfg.estimator.convergence_hold),
        r_(cfg.chaser_r0),
        r_dot_(cfg.chaser_r0_dot) {
    sensor_ = cfg.sensor;
    sensor_.rate = cfg.rates.sensor;
    icp_ = IcpConfig::defaults_for(sensor_, model_);
    if (cfg.icp.eps_threshold) icp_.eps_threshold = *cfg.icp.eps_threshold;
    icp_.max_iterations = cfg.icp.max_iterations;
    icp_.correspondence_cutoff = cfg.icp.correspondence_cutoff;
    icp_.convergence_tol = cfg.icp.convergence_tol;

    est_ = EstimatorConfig::from_noise(cfg.noise);
    const auto& e = cfg.estimator;
    est_.max_step = e.max_step;
    est_.window = e.window;
    est_.char_length = e.char_length;
    est_.alpha_gate_scale = e.alpha_gate_scale;
    est_.r_floor = e.r_floor;
    est_.box_margin = e.box_margin;
    est_.constrained = e.constrained;
    est_.adaptive = e.adaptive;
    MeasVec r0;
    r0.head<3>().setConstant(e.r0_position_std * e.r0_position_std);
    r0.tail<3>().setConstant(e.r0_attitude_std * e.r0_attitude_std);
    est_.R0 = r0.asDiagonal();

    report_.name = cfg.name;
    report_.seed = cfg.seed;
  }

  RunResult run() {
    const double dt = 1.0 / cfg_.rates.plant;
    const long per_scan = std::lround(cfg_.rates.plant / cfg_.rates.sensor);
    const long per_plan = std::lround(cfg_.rates.plant / cfg_.rates.planner);
    const long last_tick = static_cast<long>(std::floor(cfg_.duration * cfg_.rates.plant + 1e-9));

    for (long i = 0; i <= last_tick; ++i) {
      const double t = static_cast<double>(i) * dt;
      if (plan_ && !blackout_start_ && cfg_.terminal_blackout > 0.0 &&
          t >= plan_->tf() - cfg_.terminal_blackout) {
        blackout_start_ = t;
        report_.occlusion_at = t;
      }
      if (i % per_scan == 0) sensor_epoch(t);
      if (i % per_plan == 0) planner_tick(t);
      if (departed_ && t + dt >= plan_->tf()) {
        advance(t, std::max(0.0, plan_->tf() - t));
        capture(plan_->tf());
        return finish();
      }
      if (i == last_tick) break;
      advance(t, dt);
    }
    end_without_intercept(static_cast<double>(last_tick) * dt);
    return finish();
  }

 private:
  void sensor_epoch(double t) {
    EpochRecord rec;
    rec.t = t;
    rec.truth = grapple_pose(truth_);
    rec.blackout = blackout_start_ && t >= *blackout_start_;
    PointCloud cloud;
    cloud.timestamp = t;
    if (!rec.blackout) {
      cloud = render_scan(model_, rec.truth, sensor_, cfg_.faults, t,
                          derive_seed(cfg_.seed, kScanStream, scan_index_));
    }
    rec.cloud_points = cloud.size();

    RegistrationResult reg;
    if (!filter_) {
      const Pose seed_pose =
          perturbed_pose(rec.truth, cfg_.icp.acquisition_angle, cfg_.icp.acquisition_offset,
                         derive_seed(cfg_.seed, kAcquisitionStream, scan_index_));
      reg = icp_register(cloud, nearest_, seed_pose, icp_);
      rec.gamma = reg.healthy;
      if (reg.healthy) {
        filter_ = initialize_filter(reg.pose(), t, default_initial_covariance(cfg_.estimator.initial), est_);
        rec.outcome = UpdateOutcome::kApplied;
      }
    } else {
      *filter_ = propagate(*filter_, t - filter_->time, est_);
      reg = icp_register(cloud, nearest_, initial_pose_from_prediction(filter_->xhat), icp_);
      std::optional<Innovation> innov;
      Measurement z = Measurement::from_registration(reg, t);
      if (reg.has_pose()) {
        z.healthy = true;
        innov = innovation(*filter_, z);
      }
      z.healthy = detect_fault(reg, innov, icp_.eps_threshold, est_);
      rec.gamma = z.healthy;
      const UpdateResult up = update(*filter_, z, est_);
      rec.outcome = up.outcome;
      *filter_ = up.state;
      if (up.outcome == UpdateOutcome::kApplied || up.outcome == UpdateOutcome::kProjected) {
        *filter_ = adapt_R(*filter_, up.residual, est_);
      } else {
        ++report_.gated_epochs;
      }
      if (up.outcome == UpdateOutcome::kProjected) ++report_.projected_updates;
      const double m = std::max(std::abs(filter_->xhat.sigma.sigma1),
                                std::abs(filter_->xhat.sigma.sigma2));
      report_.max_abs_sigma = std::max(report_.max_abs_sigma, m);
      if (m >= 1.0) report_.constraint_violated = true;
      if (monitor_.observe(*filter_) && !report_.converged_at) {
        report_.converged_at = monitor_.latched_at();
      }
    }
    ++scan_index_;

    rec.icp = reg.pose();
    rec.fit_error = reg.fit_error;
    rec.icp_iterations = reg.iterations;
    rec.filter_ready = filter_.has_value();
    if (filter_) {
      rec.estimate = filter_->xhat;
      rec.trace_P = filter_->P.trace();
      rec.parameter_trace = parameter_trace(filter_->P);
    }
    rec.converged = monitor_.latched();
    rec.chaser_r = r_;
    rec.chaser_r_dot = r_dot_;
    rec.plan_tf = plan_ ? plan_->tf() : 0.0;
    epochs_.push_back(rec);
  }

  // Chaser state at `t_start` and target prediction there; before departure
  // the chaser coasts, so its state is extrapolated ballistically.
  RendezvousProblem problem_at(double t_start) const {
    RendezvousProblem pb;
    pb.r0 = r_ + r_dot_ * (t_start - now_);
    pb.r0_dot = r_dot_;
    pb.a_max = cfg_.a_max;
    pb.t = t_start;
    pb.target = propagate_noise_free(filter_->xhat, t_start - filter_->time, 0.01);
    return pb;
  }

  void planner_tick(double t) {
    if (!filter_ || !monitor_.latched()) return;
    if (!departed_) {
      // Guidance starts at the latch; the chaser leaves at the first tick
      // past the hold, so the plan is solved for that departure instant.
      const double per_plan = 1.0 / cfg_.rates.planner;
      const double ready = *monitor_.latched_at() + cfg_.departure_hold;
      const double t_dep = std::max(t, per_plan * std::ceil(ready / per_plan - 1e-9));
      bool solved = true;
      if (plan_) {
        plan_ = replan(problem_at(t_dep), *plan_, cfg_.solver, &solved);
      } else {
        try {
          plan_ = solve_rendezvous(problem_at(t_dep), cfg_.solver);
        } catch (const SolverFailure&) {
          solved = false;
        }
      }
      if (!solved) {
        ++report_.planner_failures;
      } else if (t_dep <= t + 1e-9) {
        departed_ = true;
        report_.departure_at = t;
      }
      return;
    }
    if (plan_->tf() - t <= cfg_.replan_freeze) return;
    bool replaced = false;
    plan_ = replan(problem_at(t), *plan_, cfg_.solver, &replaced);
    if (!replaced) ++report_.planner_failures;
  }

  void advance(double t, double h) {
    if (h <= 0.0) return;
    Vec3 u = Vec3::Zero();
    if (departed_) {
      u = plan_->control(t + 0.5 * h);
      const double n = u.norm();
      if (n > cfg_.a_max) u *= cfg_.a_max / n;
    }
    std::tie(r_, r_dot_) = step_chaser(r_, r_dot_, u, h, cfg_.a_max);
    truth_ = propagate_truth(truth_, h, cfg_.noise, truth_rng_);
    now_ = t + h;
  }

  double prediction_error(double t) const {
    if (!filter_) return std::numeric_limits<double>::infinity();
    const TargetState x = propagate_noise_free(filter_->xhat, t - filter_->time, 0.01);
    return (grapple_position(x) - grapple_position(truth_)).norm();
  }

  void capture(double tf) {
    report_.intercept_at = tf;
    report_.position_error_at_capture = (r_ - grapple_position(truth_)).norm();
    report_.relative_speed_at_capture = (r_dot_ - grapple_velocity(truth_)).norm();
    report_.terminal_prediction_error = prediction_error(tf);
    report_.success = report_.position_error_at_capture <= cfg_.capture_envelope &&
                      report_.relative_speed_at_capture <= cfg_.capture_velocity_max;
    if (!report_.success) report_.failure_stage = "capture envelope exceeded";
  }

  void end_without_intercept(double t) {
    report_.success = false;
    report_.position_error_at_capture = std::numeric_limits<double>::infinity();
    report_.relative_speed_at_capture = std::numeric_limits<double>::infinity();
    report_.terminal_prediction_error = prediction_error(t);
    if (!monitor_.latched()) {
      report_.failure_stage = "no convergence";
    } else if (!departed_) {
      report_.failure_stage = "planner failure";
    } else {
      report_.failure_stage = "no intercept";
    }
  }

  RunResult finish() {
    RunResult res;
    res.report = report_;
    res.epochs = std::move(epochs_);
    res.plan = plan_;
    return res;
  }

  const ScenarioConfig& cfg_;
  SurfaceModel model_;
  NearestSurface nearest_;
  SensorConfig sensor_;
  IcpConfig icp_;
  EstimatorConfig est_;
  TargetState truth_;
  std::mt19937_64 truth_rng_;
  std::optional<FilterState> filter_;
  ConvergenceMonitor monitor_;
  Vec3 r_;
  Vec3 r_dot_;
  std::optional<RendezvousSolution> plan_;
  bool departed_ = false;
  double now_ = 0.0;
  std::optional<double> blackout_start_;
  std::uint64_t scan_index_ = 0;
  std::vector<EpochRecord> epochs_;
  RunReport report_;
};

void put(std::ostream& o, const Vec3& v) { o << ',' << v.x() << ',' << v.y() << ',' << v.z(); }
void put(std::ostream& o, const UnitQuaternion& q) {
  put(o, q.vec());
  o << ',' << q.scalar();
}

const char* outcome_name(UpdateOutcome o) {
  switch (o) {
    case UpdateOutcome::kApplied: return "applied";
    case UpdateOutcome::kProjected: return "projected";
    case UpdateOutcome::kGated: return "gated";
    case UpdateOutcome::kDegenerate: return "degenerate";
  }
  return "unknown";
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  return ClosedLoop(cfg).run();
}

void write_epoch_csv(std::ostream& out, const std::vector<EpochRecord>& epochs) {
  const auto prec = out.precision(17);
  out << "t,truth_rho_x,truth_rho_y,truth_rho_z,truth_eta_x,truth_eta_y,truth_eta_z,truth_eta_w,"
         "cloud_points,icp_rho_x,icp_rho_y,icp_rho_z,icp_eta_x,icp_eta_y,icp_eta_z,icp_eta_w,"
         "fit_error,icp_iterations,gamma,update,filter_ready,"
         "est_rho_x,est_rho_y,est_rho_z,est_q_x,est_q_y,est_q_z,est_q_w,"
         "est_omega_x,est_omega_y,est_omega_z,est_sigma1,est_sigma2,"
         "est_varrho_x,est_varrho_y,est_varrho_z,trace_P,parameter_trace,converged,blackout,"
         "chaser_r_x,chaser_r_y,chaser_r_z,chaser_rdot_x,chaser_rdot_y,chaser_rdot_z,plan_tf\n";
  for (const auto& e : epochs) {
    out << e.t;
    put(out, e.truth.position);
    put(out, e.truth.attitude);
    out << ',' << e.cloud_points;
    put(out, e.icp.position);
    put(out, e.icp.attitude);
    out << ',' << e.fit_error << ',' << e.icp_iterations << ',' << (e.gamma ? 1 : 0) << ','
        << outcome_name(e.outcome) << ',' << (e.filter_ready ? 1 : 0);
    put(out, grapple_position(e.estimate));
    put(out, e.estimate.body.q);
    put(out, e.estimate.body.omega);
    out << ',' << e.estimate.sigma.sigma1 << ',' << e.estimate.sigma.sigma2;
    put(out, e.estimate.varrho);
    out << ',' << e.trace_P << ',' << e.parameter_trace << ',' << (e.converged ? 1 : 0) << ','
        << (e.blackout ? 1 : 0);
    put(out, e.chaser_r);
    put(out, e.chaser_r_dot);
    out << ',' << e.plan_tf << '\n';
  }
  out.precision(prec);
}

void write_report(std::ostream& out, const RunReport& r) {
  const auto prec = out.precision(17);
  auto opt = [&](const char* key, const std::optional<double>& v) {
    out << key << " = ";
    if (v) {
      out << *v;
    } else {
      out << "none";
    }
    out << '\n';
  };
  out << "name = " << r.name << '\n' << "seed = " << r.seed << '\n';
  opt("converged_at", r.converged_at);
  opt("departure_at", r.departure_at);
  opt("occlusion_at", r.occlusion_at);
  opt("intercept_at", r.intercept_at);
  out << "position_error_at_capture = " << r.position_error_at_capture << '\n'
      << "relative_speed_at_capture = " << r.relative_speed_at_capture << '\n'
      << "terminal_prediction_error = " << r.terminal_prediction_error << '\n'
      << "success = " << (r.success ? "true" : "false") << '\n'
      << "failure_stage = " << (r.failure_stage.empty() ? "none" : r.failure_stage) << '\n'
      << "gated_epochs = " << r.gated_epochs << '\n'
      << "projected_updates = " << r.projected_updates << '\n'
      << "planner_failures = " << r.planner_failures << '\n'
      << "max_abs_sigma = " << r.max_abs_sigma << '\n';
  out.precision(prec);
}

}  // namespace ftvs
