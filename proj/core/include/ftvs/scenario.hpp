#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ftvs/config.hpp"
#include "ftvs/estimator.hpp"
#include "ftvs/icp.hpp"
#include "ftvs/rendezvous.hpp"
#include "ftvs/sensor.hpp"
#include "ftvs/surface_model.hpp"
#include "ftvs/truth.hpp"

namespace ftvs {

struct Rates {
  double sensor = 2.0;    // Hz
  double planner = 1.0;   // Hz
  double plant = 100.0;   // Hz
};

struct EstimatorSettings {
  bool constrained = true;
  bool adaptive = true;
  int window = 30;
  double char_length = 1.0;
  double alpha_gate_scale = 5.0;
  double r_floor = 1e-8;
  double box_margin = 1e-3;
  double max_step = 0.05;
  double r0_position_std = 0.003;  // m
  double r0_attitude_std = 0.01;   // rad
  InitialUncertainty initial;
  double convergence_threshold = 2e-4;
  int convergence_hold = 5;
};

struct IcpSettings {
  std::optional<double> eps_threshold;  // default derived from sensor noise
  int max_iterations = 200;
  double correspondence_cutoff = 0.05;
  double convergence_tol = 1e-6;
  double acquisition_angle = 0.0872664626;  // rad, error of the first coarse pose
  double acquisition_offset = 0.02;          // m
};

struct ScenarioConfig {
  std::string name = "analog";
  std::uint64_t seed = 1;
  double duration = 200.0;  // s

  Inertia inertia{14.0, 10.0, 6.0};
  Vec3 varrho{-0.15, 0.03, -0.05};
  UnitQuaternion mu;
  BodyState initial;

  SensorConfig sensor;
  FaultSchedule faults;
  double terminal_blackout = 0.0;  // s before the planned intercept
  std::optional<std::string> model_path;

  ProcessNoise noise;
  double a_max = 0.02;
  Vec3 chaser_r0 = Vec3::Zero();
  Vec3 chaser_r0_dot = Vec3::Zero();
  double capture_envelope = 0.04;      // m
  double capture_velocity_max = 0.01;  // m/s

  Rates rates;
  double departure_hold = 5.0;  // s after convergence
  double replan_freeze = 2.0;   // s, no re-plans closer than this to t_f

  EstimatorSettings estimator;
  IcpSettings icp;
  SolverConfig solver;

  /// Throws ConfigError on invalid rates, durations or inertia.
  void validate() const;
  TargetState initial_target() const;
  SurfaceModel surface_model() const;
};

/// Built-in desk-scale analog of the tumbling micro-satellite experiment.
ScenarioConfig analog_scenario();

/// Overlays a parsed document on analog_scenario(); relative model paths
/// resolve against `base_dir`. Unknown keys are errors.
ScenarioConfig scenario_from_document(const ConfigDocument& doc, const std::string& base_dir);
ScenarioConfig load_scenario(const std::string& path);

struct EpochRecord {
  double t = 0.0;
  Pose truth;
  std::size_t cloud_points = 0;
  Pose icp;
  double fit_error = 0.0;
  int icp_iterations = 0;
  bool gamma = false;
  bool filter_ready = false;
  UpdateOutcome outcome = UpdateOutcome::kGated;
  TargetState estimate;
  double trace_P = 0.0;
  double parameter_trace = 0.0;
  bool converged = false;
  bool blackout = false;
  Vec3 chaser_r = Vec3::Zero();
  Vec3 chaser_r_dot = Vec3::Zero();
  double plan_tf = 0.0;  // 0 until the first plan
};

struct RunReport {
  std::string name;
  std::uint64_t seed = 0;
  std::optional<double> converged_at;
  std::optional<double> departure_at;
  std::optional<double> occlusion_at;
  std::optional<double> intercept_at;
  double position_error_at_capture = 0.0;
  double relative_speed_at_capture = 0.0;
  double terminal_prediction_error = 0.0;
  bool success = false;
  std::string failure_stage;  // empty on success
  int gated_epochs = 0;
  int projected_updates = 0;
  int planner_failures = 0;
  double max_abs_sigma = 0.0;  // largest |σ̂ᵢ| seen after any update
  bool constraint_violated = false;
};

struct RunResult {
  RunReport report;
  std::vector<EpochRecord> epochs;
  std::optional<RendezvousSolution> plan;  // last adopted plan
};

/// Sequential closed loop: scan, register, gate, update, adapt, plan, plant.
RunResult run_scenario(const ScenarioConfig& cfg);

void write_epoch_csv(std::ostream& out, const std::vector<EpochRecord>& epochs);
void write_report(std::ostream& out, const RunReport& report);

/// Stable per-purpose seed derivation (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace ftvs
