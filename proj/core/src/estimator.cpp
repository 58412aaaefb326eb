#include "ftvs/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace ftvs {

namespace {

constexpr double kSMaxCondition = 1e12;

StateMat symmetrized(const StateMat& P) { return 0.5 * (P + P.transpose()); }

}  // namespace

EstimatorConfig EstimatorConfig::from_noise(const ProcessNoise& noise) {
  EstimatorConfig c;
  c.process_psd = noise.spectral_density();
  return c;
}

Measurement Measurement::from_registration(const RegistrationResult& r, double t) {
  Measurement m;
  m.rho_bar = r.rho_bar;
  m.eta_bar = r.eta_bar;
  m.healthy = r.healthy;
  m.timestamp = t;
  return m;
}

StateMat default_initial_covariance(const InitialUncertainty& u) {
  StateVec d;
  d.segment<3>(idx::kAtt).setConstant(u.attitude * u.attitude);
  d.segment<3>(idx::kOmega).setConstant(u.omega * u.omega);
  d.segment<3>(idx::kPos).setConstant(u.position * u.position);
  d.segment<3>(idx::kVel).setConstant(u.velocity * u.velocity);
  d.segment<2>(idx::kSigma).setConstant(u.sigma * u.sigma);
  d.segment<3>(idx::kVarrho).setConstant(u.varrho * u.varrho);
  d.segment<3>(idx::kMu).setConstant(u.mu * u.mu);
  return d.asDiagonal();
}

FilterState initialize_filter(const Pose& first_pose, double t, const StateMat& P0,
                              const EstimatorConfig& cfg) {
  FilterState fs;
  fs.xhat.body.q = first_pose.attitude;
  fs.xhat.body.rho_o = first_pose.position;
  fs.P = P0;
  fs.R_hat = cfg.R0;
  fs.time = t;
  return fs;
}

StateMat transition_matrix(const TargetState& x, double dt) {
  const StateMat Fd = jacobian_F(x) * dt;
  return StateMat::Identity() + Fd + 0.5 * Fd * Fd;
}

FilterState propagate(const FilterState& fs, double dt, const EstimatorConfig& cfg) {
  if (!(dt >= 0.0)) throw std::invalid_argument("propagate: dt must be non-negative");
  FilterState out = fs;
  if (dt == 0.0) return out;
  const int n = static_cast<int>(std::ceil(dt / cfg.max_step - 1e-9));
  const double h = dt / n;
  for (int i = 0; i < n; ++i) {
    const StateMat Phi = transition_matrix(out.xhat, h);
    const NoiseMat G = jacobian_G(out.xhat);
    const StateMat Q = G * cfg.process_psd * G.transpose() * h;
    out.P = symmetrized(Phi * out.P * Phi.transpose() + Q);
    out.xhat = propagate_noise_free(out.xhat, h, 0.01);
  }
  out.time += dt;
  return out;
}

MeasMat observation_matrix(const TargetState& x) {
  MeasMat H = MeasMat::Zero();
  const Mat3 A = rotation_matrix(x.body.q);
  H.block<3, 3>(0, idx::kAtt) = -2.0 * A * skew(x.varrho);
  H.block<3, 3>(0, idx::kPos) = Mat3::Identity();
  H.block<3, 3>(0, idx::kVarrho) = A;
  H.block<3, 3>(3, idx::kAtt) = Mat3::Identity();
  H.block<3, 3>(3, idx::kMu) = Mat3::Identity();
  return H;
}

MeasVec observe_error_state(const TargetState& x, const StateVec& dx) {
  const UnitQuaternion dq = UnitQuaternion::from_error_vector(dx.segment<3>(idx::kAtt));
  const UnitQuaternion dmu = UnitQuaternion::from_error_vector(dx.segment<3>(idx::kMu));
  MeasVec h;
  h.head<3>() = x.body.rho_o + dx.segment<3>(idx::kPos) +
                rotation_matrix(quat_product(dq, x.body.q)) *
                    (x.varrho + dx.segment<3>(idx::kVarrho));
  h.tail<3>() = quat_product(dmu, dq).vec();
  return h;
}

MeasVec measurement_vector(const TargetState& x, const Measurement& z) {
  MeasVec v;
  v.head<3>() = z.rho_bar;
  v.tail<3>() =
      quat_product(quat_product(x.mu.inverse(), z.eta_bar), x.body.q.inverse()).canonical().vec();
  return v;
}

Innovation innovation(const FilterState& fs, const Measurement& z) {
  if (!z.healthy) throw std::invalid_argument("innovation: measurement flagged unhealthy");
  Innovation in;
  in.H = observation_matrix(fs.xhat);
  in.alpha = measurement_vector(fs.xhat, z);
  in.alpha.head<3>() -= grapple_position(fs.xhat);
  in.S = in.H * fs.P * in.H.transpose() + fs.R_hat;
  in.S = 0.5 * (in.S + in.S.transpose());
  return in;
}

bool project_gain(const TargetState& prior, const MeasVec& alpha, double box_margin, GainMat& K) {
  const double bound = 1.0 - box_margin;
  const double prior_sigma[2] = {prior.sigma.sigma1, prior.sigma.sigma2};
  bool scaled = false;
  for (int i = 0; i < 2; ++i) {
    const int row = idx::kSigma + i;
    const double step = K.row(row).dot(alpha);
    const double post = prior_sigma[i] + step;
    if (std::abs(post) <= bound) continue;
    const double target = std::copysign(bound, post);
    double beta = (target - prior_sigma[i]) / step;
    beta = std::clamp(beta, 0.0, 1.0);
    K.row(row) *= beta;
    scaled = true;
  }
  return scaled;
}

UpdateResult update(const FilterState& fs, const Measurement& z, const EstimatorConfig& cfg) {
  UpdateResult res;
  res.state = fs;
  if (!z.healthy) {
    res.outcome = UpdateOutcome::kGated;
    return res;
  }
  const Innovation in = innovation(fs, z);
  Eigen::SelfAdjointEigenSolver<MeasCov> es(in.S, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  const double lmax = es.eigenvalues()(kMeasDim - 1);
  if (!(lmin > 0.0) || lmax / lmin > kSMaxCondition) {
    res.outcome = UpdateOutcome::kDegenerate;
    return res;
  }
  GainMat K = in.S.ldlt().solve(in.H * fs.P).transpose();
  const bool projected = cfg.constrained && project_gain(fs.xhat, in.alpha, cfg.box_margin, K);

  const StateVec dx = K * in.alpha;
  FilterState& out = res.state;
  out.xhat = apply_error(fs.xhat, dx);
  const StateMat IKH = StateMat::Identity() - K * in.H;
  if (projected) {
    // The projected gain is no longer optimal, so the short form would misstate P.
    out.P = IKH * fs.P * IKH.transpose() + K * fs.R_hat * K.transpose();
  } else {
    out.P = IKH * fs.P;
  }
  out.P = symmetrized(out.P);
  out.k = fs.k + 1;
  res.outcome = projected ? UpdateOutcome::kProjected : UpdateOutcome::kApplied;
  res.residual = in.alpha - in.H * dx;
  res.gain = K;
  return res;
}

void window_average_push(std::deque<MeasVec>& buf, int& count, MeasCov& Sigma, const MeasVec& e,
                         int window) {
  if (window < 1) throw std::invalid_argument("window_average_push: window must be >= 1");
  buf.push_back(e);
  ++count;
  if (count <= window) {
    Sigma += (e * e.transpose() - Sigma) / static_cast<double>(count);
    return;
  }
  const MeasVec old = buf.front();
  buf.pop_front();
  Sigma += (e * e.transpose() - old * old.transpose()) / static_cast<double>(window);
}

FilterState adapt_R(const FilterState& fs, const MeasVec& residual, const EstimatorConfig& cfg) {
  FilterState out = fs;
  window_average_push(out.residual_window, out.residual_count, out.Sigma_innov, residual,
                      cfg.window);
  if (!cfg.adaptive) return out;
  const MeasMat H = observation_matrix(out.xhat);
  MeasCov R = out.Sigma_innov + H * out.P * H.transpose();
  R = 0.5 * (R + R.transpose());
  Eigen::SelfAdjointEigenSolver<MeasCov> es(R, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < cfg.r_floor) R += cfg.r_floor * MeasCov::Identity();
  out.R_hat = R;
  return out;
}

double weighted_innovation_norm(const MeasVec& alpha, double char_length) {
  MeasVec w = alpha;
  w.tail<3>() *= char_length;
  return w.norm();
}

bool detect_fault(const RegistrationResult& result, const std::optional<Innovation>& innov,
                  double eps_threshold, const EstimatorConfig& cfg) {
  if (!result.has_pose()) return false;
  const bool fit_bad = !(result.fit_error < eps_threshold);
  if (!innov) return !fit_bad;
  MeasVec wdiag = MeasVec::Ones();
  wdiag.tail<3>().setConstant(cfg.char_length);
  const double gate =
      cfg.alpha_gate_scale * std::sqrt((wdiag.asDiagonal() * innov->S * wdiag.asDiagonal()).trace());
  const bool innov_bad = weighted_innovation_norm(innov->alpha, cfg.char_length) >= gate;
  return !(fit_bad && innov_bad);
}

double parameter_trace(const StateMat& P) {
  return P.block<8, 8>(idx::kSigma, idx::kSigma).trace();
}

bool ConvergenceMonitor::observe(const FilterState& fs) {
  if (latched_) return true;
  if (parameter_trace(fs.P) < threshold_) {
    ++streak_;
  } else {
    streak_ = 0;
  }
  if (streak_ >= hold_) {
    latched_ = true;
    latched_at_ = fs.time;
  }
  return latched_;
}

}  // namespace ftvs
