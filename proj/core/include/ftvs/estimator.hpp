#pragma once

#include <deque>
#include <optional>

#include "ftvs/icp.hpp"
#include "ftvs/rigid_body.hpp"
#include "ftvs/truth.hpp"

namespace ftvs {

using MeasVec = Eigen::Matrix<double, kMeasDim, 1>;
using MeasCov = Eigen::Matrix<double, kMeasDim, kMeasDim>;
using GainMat = Eigen::Matrix<double, kStateDim, kMeasDim>;

struct EstimatorConfig {
  Mat6 process_psd = Mat6::Zero();  // continuous spectral density, noise order [ε_τ, ε_f]
  double max_step = 0.05;           // s, covariance propagation substep
  int window = 30;                  // w, adaptation window
  double char_length = 1.0;         // L, m/rad
  double alpha_gate_scale = 5.0;    // α_th = scale·√tr(W S W)
  double r_floor = 1e-8;            // λ_floor
  double box_margin = 1e-3;         // δ_box
  bool constrained = true;
  bool adaptive = true;
  MeasCov R0 = MeasCov::Identity() * 1e-4;

  static EstimatorConfig from_noise(const ProcessNoise& noise);
};

struct FilterState {
  TargetState xhat;
  StateMat P = StateMat::Identity();
  MeasCov Sigma_innov = MeasCov::Zero();
  std::deque<MeasVec> residual_window;
  int residual_count = 0;  // healthy residuals seen so far
  MeasCov R_hat = MeasCov::Identity() * 1e-4;
  long k = 0;
  double time = 0.0;
};

struct Measurement {
  Vec3 rho_bar = Vec3::Zero();
  UnitQuaternion eta_bar;
  bool healthy = false;
  double timestamp = 0.0;

  static Measurement from_registration(const RegistrationResult& r, double t);
};

struct Innovation {
  MeasVec alpha = MeasVec::Zero();
  MeasCov S = MeasCov::Zero();
  MeasMat H = MeasMat::Zero();
};

enum class UpdateOutcome { kApplied, kProjected, kGated, kDegenerate };

struct UpdateResult {
  FilterState state;
  UpdateOutcome outcome = UpdateOutcome::kGated;
  MeasVec residual = MeasVec::Zero();
  GainMat gain = GainMat::Zero();
};

/// One-sigma initial uncertainty per error-state block.
struct InitialUncertainty {
  double attitude = 0.05;  // rad
  double omega = 0.3;      // rad/s
  double position = 0.2;   // m
  double velocity = 0.05;  // m/s
  double sigma = 1.0;
  double varrho = 0.2;     // m
  double mu = 0.05;        // rad
};

/// Filter start from a registered pose: q̂ = η̄, ρ̂_o = ρ̄, every other
/// block at its neutral value. P0 is diagonal.
FilterState initialize_filter(const Pose& first_pose, double t, const StateMat& P0,
                              const EstimatorConfig& cfg);
StateMat default_initial_covariance(const InitialUncertainty& u = {});

/// Φ ≈ I + FΔt + ½(FΔt)² at x̂; Q_k = G Q_c Gᵀ Δt.
StateMat transition_matrix(const TargetState& x, double dt);
FilterState propagate(const FilterState& fs, double dt, const EstimatorConfig& cfg);

/// Observation sensitivity at the reset linearization point (δq = δμ = 0).
MeasMat observation_matrix(const TargetState& x);
/// Full nonlinear observation of an error state about x: [ρ_o+A(δq⊗q)ϱ; vec(δμ⊗δq)].
MeasVec observe_error_state(const TargetState& x, const StateVec& dx);
/// Measurement vector [ρ̄; vec(μ̂⁻¹ ⊗ η̄ ⊗ q̂⁻¹)].
MeasVec measurement_vector(const TargetState& x, const Measurement& z);

/// Throws std::invalid_argument for an unhealthy measurement.
Innovation innovation(const FilterState& fs, const Measurement& z);

/// Gated, optionally constrained update. γ = 0 returns the input state untouched.
UpdateResult update(const FilterState& fs, const Measurement& z, const EstimatorConfig& cfg);

/// Gain projection on the σ rows so that the posterior stays inside the box.
/// Returns true when any row was scaled.
bool project_gain(const TargetState& prior, const MeasVec& alpha, double box_margin, GainMat& K);

/// Pushes a residual and refreshes Σ and R̂.
FilterState adapt_R(const FilterState& fs, const MeasVec& residual, const EstimatorConfig& cfg);

/// Recursive window average: growing mean until `window` samples, sliding after.
void window_average_push(std::deque<MeasVec>& buf, int& count, MeasCov& Sigma, const MeasVec& e,
                         int window);

/// ‖diag(I, L·I) α‖.
double weighted_innovation_norm(const MeasVec& alpha, double char_length);

/// γ: false when registration failed outright, or when the fit error and
/// the weighted innovation both exceed their thresholds.
bool detect_fault(const RegistrationResult& result, const std::optional<Innovation>& innov,
                  double eps_threshold, const EstimatorConfig& cfg);

/// Latches once the parameter-block (σ, ϱ, μ_v) covariance trace stays below
/// `threshold` for `hold` consecutive epochs.
class ConvergenceMonitor {
 public:
  ConvergenceMonitor(double threshold, int hold) : threshold_(threshold), hold_(hold) {}
  bool observe(const FilterState& fs);
  bool latched() const { return latched_; }
  std::optional<double> latched_at() const { return latched_at_; }

 private:
  double threshold_;
  int hold_;
  int streak_ = 0;
  bool latched_ = false;
  std::optional<double> latched_at_;
};

double parameter_trace(const StateMat& P);

}  // namespace ftvs
