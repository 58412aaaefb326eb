#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "ftvs/estimator.hpp"
#include "ftvs/scenario.hpp"
#include "support.hpp"

namespace ftvs {
namespace {

constexpr double kChi2Lo12 = 4.404;
constexpr double kChi2Hi12 = 23.337;

Measurement perfect_measurement(const TargetState& x, double t = 0.0) {
  const Pose p = grapple_pose(x);
  Measurement z;
  z.rho_bar = p.position;
  z.eta_bar = p.attitude;
  z.healthy = true;
  z.timestamp = t;
  return z;
}

FilterState filter_at(const TargetState& x) {
  FilterState fs;
  fs.xhat = x;
  fs.P = default_initial_covariance();
  fs.R_hat = MeasCov::Identity() * 1e-4;
  return fs;
}

void expect_healthy_covariance(const StateMat& P) {
  EXPECT_LT((P - P.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::SelfAdjointEigenSolver<StateMat> es(0.5 * (P + P.transpose()),
                                                   Eigen::EigenvaluesOnly);
  EXPECT_GE(es.eigenvalues()(0), -1e-10);
}

TEST(ObservationMatrix, MatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    const TargetState x = test::random_state(rng);
    const MeasMat fd = test::finite_difference_H(x);
    EXPECT_LT((observation_matrix(x) - fd).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(ObservationMatrix, PositionRowCarriesAttitudeMatrixInOffsetColumn) {
  std::mt19937_64 rng(2);
  const TargetState x = test::random_state(rng);
  const MeasMat H = observation_matrix(x);
  EXPECT_TRUE((H.block<3, 3>(0, idx::kVarrho) == rotation_matrix(x.body.q)));
  EXPECT_TRUE((H.block<3, 3>(0, idx::kPos) == Mat3::Identity()));
  EXPECT_TRUE((H.block<3, 3>(3, idx::kAtt) == Mat3::Identity()));
  EXPECT_TRUE((H.block<3, 3>(3, idx::kMu) == Mat3::Identity()));
  EXPECT_TRUE((H.block<6, 3>(0, idx::kOmega).isZero(0.0)));
  EXPECT_TRUE((H.block<6, 3>(0, idx::kVel).isZero(0.0)));
  EXPECT_TRUE((H.block<6, 2>(0, idx::kSigma).isZero(0.0)));
}

TEST(Innovation, PerfectMeasurementGivesZero) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const TargetState x = test::random_state(rng);
    const Innovation in = innovation(filter_at(x), perfect_measurement(x));
    EXPECT_LT(in.alpha.norm(), 1e-14);
  }
}

TEST(Innovation, UnhealthyMeasurementIsContractViolation) {
  std::mt19937_64 rng(4);
  Measurement z = perfect_measurement(test::random_state(rng));
  z.healthy = false;
  EXPECT_THROW(innovation(filter_at(test::random_state(rng)), z), std::invalid_argument);
}

TEST(Propagate, ZeroStepIsIdentity) {
  std::mt19937_64 rng(5);
  EstimatorConfig cfg = EstimatorConfig::from_noise(ProcessNoise::isotropic(1e-6, 1e-4));
  const FilterState fs = filter_at(test::random_state(rng));
  const FilterState out = propagate(fs, 0.0, cfg);
  EXPECT_EQ(out.P, fs.P);
  EXPECT_EQ(out.xhat.body.q.coeffs(), fs.xhat.body.q.coeffs());
  EXPECT_THROW(propagate(fs, -1.0, cfg), std::invalid_argument);
}

TEST(Propagate, ZeroRateAttitudeGrowsOnlyThroughRateCoupling) {
  TargetState x;
  x.sigma = sigma_from_inertia(14, 10, 6);
  FilterState fs = filter_at(x);
  StateVec d = StateVec::Zero();
  d.segment<3>(idx::kOmega).setConstant(0.01);
  fs.P = d.asDiagonal();
  EstimatorConfig cfg;
  const FilterState out = propagate(fs, 1.0, cfg);
  // δq̇ = ½ δω: variance ¼ σ_ω² t².
  EXPECT_NEAR(out.P(idx::kAtt, idx::kAtt), 0.25 * 0.01, 1e-12);
  EXPECT_NEAR(out.P(idx::kAtt, idx::kOmega), 0.5 * 0.01, 1e-12);
  EXPECT_EQ(out.P(idx::kPos, idx::kPos), 0.0);
}

TEST(Propagate, KeepsCovarianceHealthyAndTracksTime) {
  std::mt19937_64 rng(6);
  EstimatorConfig cfg = EstimatorConfig::from_noise(ProcessNoise::isotropic(1e-6, 1e-4));
  for (int i = 0; i < 50; ++i) {
    FilterState fs = filter_at(test::random_state(rng));
    fs.time = 3.0;
    const FilterState out = propagate(fs, 0.5, cfg);
    expect_healthy_covariance(out.P);
    EXPECT_DOUBLE_EQ(out.time, 3.5);
  }
}

Eigen::MatrixXd sample_covariance(const std::vector<StateVec>& e) {
  StateMat c = StateMat::Zero();
  StateVec mean = StateVec::Zero();
  for (const auto& v : e) mean += v / static_cast<double>(e.size());
  for (const auto& v : e) c += (v - mean) * (v - mean).transpose();
  return c / static_cast<double>(e.size() - 1);
}

TargetState analog_like_state() {
  TargetState x = analog_scenario().initial_target();
  return x;
}

TEST(Propagate, CovarianceMatchesLinearizedMonteCarlo) {
  const TargetState x = analog_like_state();
  StateVec sd;
  sd << 0.01, 0.01, 0.01, 0.003, 0.003, 0.003, 0.005, 0.005, 0.005, 0.001, 0.001, 0.001, 0.02,
      0.02, 0.005, 0.005, 0.005, 0.01, 0.01, 0.01;
  FilterState fs = filter_at(x);
  fs.P = sd.cwiseProduct(sd).asDiagonal();
  EstimatorConfig cfg;
  const double dt = 2.0;
  const StateMat P = propagate(fs, dt, cfg).P;

  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  std::vector<StateVec> ensemble;
  const TargetState nominal = propagate_noise_free(x, dt);
  for (int i = 0; i < 10000; ++i) {
    StateVec dx;
    for (int k = 0; k < kStateDim; ++k) dx(k) = sd(k) * n01(rng);
    ensemble.push_back(state_difference(propagate_noise_free(apply_error(x, dx), dt), nominal));
  }
  const Eigen::MatrixXd C = sample_covariance(ensemble);
  EXPECT_LT((C - P).norm() / P.norm(), 0.15);
}

TEST(Propagate, ProcessNoiseMatchesHeldDrawEnsemble) {
  const TargetState x = analog_like_state();
  const ProcessNoise noise = ProcessNoise::isotropic(1e-6, 1e-4, 0.01);
  FilterState fs = filter_at(x);
  fs.P.setZero();
  const EstimatorConfig cfg = EstimatorConfig::from_noise(noise);
  const double dt = 2.0;
  const StateMat P = propagate(fs, dt, cfg).P;

  std::mt19937_64 rng(8);
  const TargetState nominal = propagate_noise_free(x, dt);
  std::vector<StateVec> ensemble;
  for (int i = 0; i < 4000; ++i) {
    ensemble.push_back(state_difference(propagate_truth(x, dt, noise, rng), nominal));
  }
  const Eigen::MatrixXd C = sample_covariance(ensemble);
  EXPECT_LT((C.topLeftCorner(12, 12) - P.topLeftCorner(12, 12)).norm() /
                P.topLeftCorner(12, 12).norm(),
            0.15);
}

TEST(Update, GatedMeasurementLeavesStateBitIdentical) {
  std::mt19937_64 rng(9);
  const FilterState fs = filter_at(test::random_state(rng));
  Measurement z = perfect_measurement(test::random_state(rng));
  z.healthy = false;
  const UpdateResult r = update(fs, z, EstimatorConfig{});
  EXPECT_EQ(r.outcome, UpdateOutcome::kGated);
  EXPECT_EQ(r.state.P, fs.P);
  EXPECT_EQ(r.state.xhat.body.q.coeffs(), fs.xhat.body.q.coeffs());
  EXPECT_EQ(r.state.xhat.body.omega, fs.xhat.body.omega);
  EXPECT_EQ(r.state.xhat.body.rho_o, fs.xhat.body.rho_o);
  EXPECT_EQ(r.state.xhat.sigma.vec(), fs.xhat.sigma.vec());
  EXPECT_EQ(r.state.xhat.varrho, fs.xhat.varrho);
  EXPECT_EQ(r.state.xhat.mu.coeffs(), fs.xhat.mu.coeffs());
  EXPECT_EQ(r.state.k, fs.k);
}

TEST(Update, ZeroInnovationKeepsStateAndShrinksCovariance) {
  std::mt19937_64 rng(10);
  const TargetState x = test::random_state(rng);
  EstimatorConfig cfg;
  cfg.constrained = false;
  const FilterState fs = filter_at(x);
  const UpdateResult r = update(fs, perfect_measurement(x), cfg);
  EXPECT_EQ(r.outcome, UpdateOutcome::kApplied);
  EXPECT_LT(state_difference(r.state.xhat, x).norm(), 1e-13);
  const MeasMat H = observation_matrix(x);
  const StateMat expected = (StateMat::Identity() - r.gain * H) * fs.P;
  EXPECT_LT((r.state.P - 0.5 * (expected + expected.transpose())).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(r.state.P.trace(), fs.P.trace());
}

TEST(Update, GainMatchesKalmanFormula) {
  std::mt19937_64 rng(11);
  const TargetState x = test::random_state(rng);
  const FilterState fs = filter_at(x);
  const Innovation in = innovation(fs, perfect_measurement(test::random_state(rng)));
  EstimatorConfig cfg;
  cfg.constrained = false;
  Measurement z = perfect_measurement(x);
  const UpdateResult r = update(fs, z, cfg);
  const GainMat K = fs.P * in.H.transpose() * in.S.inverse();
  EXPECT_LT((r.gain - K).cwiseAbs().maxCoeff(), 1e-10 * K.cwiseAbs().maxCoeff());
}

TEST(ProjectGain, LandsViolatingComponentOnBoundary) {
  TargetState prior;
  prior.sigma = {0.9, 0.1};
  GainMat K = GainMat::Zero();
  MeasVec alpha = MeasVec::Zero();
  alpha(0) = 1.0;
  K(idx::kSigma, 0) = 0.3;      // σ₁: 0.9 → 1.2 unconstrained
  K(idx::kSigma + 1, 0) = 0.2;  // σ₂: 0.1 → 0.3, inside
  K(idx::kPos, 0) = 0.5;
  ASSERT_TRUE(project_gain(prior, alpha, 1e-3, K));
  EXPECT_NEAR(prior.sigma.sigma1 + K.row(idx::kSigma).dot(alpha), 0.999, 1e-15);
  EXPECT_EQ(K(idx::kSigma + 1, 0), 0.2);
  EXPECT_EQ(K(idx::kPos, 0), 0.5);
}

// One-dimensional oracle: min (s − s_unc)² subject to |s| ≤ 1 − δ is the clamp.
TEST(ProjectGain, AgreesWithConstrainedLeastSquaresOnScalarProblem) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-0.99, 0.99), step(-1.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    TargetState prior;
    prior.sigma = {u(rng), u(rng)};
    GainMat K = GainMat::Zero();
    MeasVec alpha = MeasVec::Zero();
    alpha(2) = 1.0;
    K(idx::kSigma, 2) = step(rng);
    K(idx::kSigma + 1, 2) = step(rng);
    const double s1 = prior.sigma.sigma1 + K(idx::kSigma, 2);
    const double s2 = prior.sigma.sigma2 + K(idx::kSigma + 1, 2);
    project_gain(prior, alpha, 1e-3, K);
    auto clamp = [](double s, double p) {
      // Prior already past the bound: the gain is zeroed, so the prior stays.
      if (std::abs(p) > 0.999 && std::abs(s) > 0.999) return p;
      return std::clamp(s, -0.999, 0.999);
    };
    EXPECT_NEAR(prior.sigma.sigma1 + K(idx::kSigma, 2), clamp(s1, prior.sigma.sigma1), 1e-14);
    EXPECT_NEAR(prior.sigma.sigma2 + K(idx::kSigma + 1, 2), clamp(s2, prior.sigma.sigma2), 1e-14);
  }
}

TEST(Update, ConstrainedUpdateStaysInBox) {
  std::mt19937_64 rng(13);
  EstimatorConfig cfg;
  int projected = 0;
  for (int i = 0; i < 2000; ++i) {
    TargetState x = test::random_state(rng);
    FilterState fs = filter_at(x);
    TargetState other = test::random_state(rng);
    other.body.rho_o = x.body.rho_o + Vec3(0.3, -0.2, 0.1);
    const UpdateResult r = update(fs, perfect_measurement(other), cfg);
    if (r.outcome == UpdateOutcome::kProjected) ++projected;
    EXPECT_LT(std::abs(r.state.xhat.sigma.sigma1), 1.0);
    EXPECT_LT(std::abs(r.state.xhat.sigma.sigma2), 1.0);
    expect_healthy_covariance(r.state.P);
  }
  EXPECT_GT(projected, 0);
}

TEST(WindowAverage, RecursiveEqualsBatch) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n01;
  for (int window : {1, 7, 30, 199, 250}) {
    std::vector<MeasVec> residuals;
    std::deque<MeasVec> buf;
    int count = 0;
    MeasCov Sigma = MeasCov::Zero();
    for (int k = 0; k < 200; ++k) {
      MeasVec e;
      for (int j = 0; j < kMeasDim; ++j) e(j) = 0.01 * n01(rng);
      residuals.push_back(e);
      window_average_push(buf, count, Sigma, e, window);
      const MeasCov batch = test::batch_window_average(residuals, residuals.size(), window);
      ASSERT_LT((Sigma - batch).cwiseAbs().maxCoeff(), 1e-12) << "window " << window << " k " << k;
    }
  }
}

TEST(WindowAverage, ConstantResidualGivesOuterProduct) {
  MeasVec e;
  e << 0.001, -0.002, 0.003, 1e-4, 2e-4, -3e-4;
  std::deque<MeasVec> buf;
  int count = 0;
  MeasCov Sigma = MeasCov::Zero();
  for (int k = 0; k < 100; ++k) window_average_push(buf, count, Sigma, e, 30);
  EXPECT_LT((Sigma - e * e.transpose()).cwiseAbs().maxCoeff(), 1e-18);
  EXPECT_EQ(buf.size(), 30u);
}

TEST(WindowAverage, WhiteResidualsRecoverCovariance) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> n01;
  MeasCov C = MeasVec(4e-6, 1e-6, 9e-6, 1e-5, 2e-5, 5e-6).asDiagonal();
  C(0, 1) = C(1, 0) = 1e-6;
  const Eigen::LLT<MeasCov> llt(C);
  const int w = 1000;
  std::deque<MeasVec> buf;
  int count = 0;
  MeasCov Sigma = MeasCov::Zero();
  for (int k = 0; k < 10 * w; ++k) {
    MeasVec g;
    for (int j = 0; j < kMeasDim; ++j) g(j) = n01(rng);
    window_average_push(buf, count, Sigma, MeasVec(llt.matrixL() * g), w);
  }
  EXPECT_LT((Sigma - C).norm() / C.norm(), 0.2);
}

TEST(AdaptR, FloorsNearSingularEstimate) {
  FilterState fs;
  fs.P.setZero();
  EstimatorConfig cfg;
  const FilterState out = adapt_R(fs, MeasVec::Zero(), cfg);
  EXPECT_LT((out.R_hat - cfg.r_floor * MeasCov::Identity()).cwiseAbs().maxCoeff(), 1e-24);
  const Eigen::SelfAdjointEigenSolver<MeasCov> es(out.R_hat);
  EXPECT_GT(es.eigenvalues()(0), 0.0);
}

TEST(AdaptR, AddsProjectedCovarianceToResidualAverage) {
  std::mt19937_64 rng(16);
  FilterState fs = filter_at(test::random_state(rng));
  MeasVec e;
  e << 0.01, 0.0, 0.0, 0.0, 0.0, 0.0;
  EstimatorConfig cfg;
  const FilterState out = adapt_R(fs, e, cfg);
  const MeasMat H = observation_matrix(fs.xhat);
  const MeasCov expected = e * e.transpose() + H * fs.P * H.transpose();
  EXPECT_LT((out.R_hat - 0.5 * (expected + expected.transpose())).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(out.residual_count, 1);
}

TEST(AdaptR, NonAdaptiveKeepsR) {
  std::mt19937_64 rng(17);
  FilterState fs = filter_at(test::random_state(rng));
  EstimatorConfig cfg;
  cfg.adaptive = false;
  const FilterState out = adapt_R(fs, MeasVec::Ones(), cfg);
  EXPECT_EQ(out.R_hat, fs.R_hat);
  EXPECT_EQ(out.residual_count, 1);
}

RegistrationResult registration(double fit, RegistrationStatus status = RegistrationStatus::kOk) {
  RegistrationResult r;
  r.fit_error = fit;
  r.status = status;
  r.healthy = status == RegistrationStatus::kOk && fit < 1e-5;
  return r;
}

Innovation innovation_of_size(double alpha_norm) {
  Innovation in;
  in.S = MeasCov::Identity() * 1e-6;
  in.alpha(0) = alpha_norm;
  return in;
}

TEST(DetectFault, Cases) {
  EstimatorConfig cfg;
  const double eps_th = 1e-5;
  // α_th = 5·√(tr S) = 5·√(6e-6) ≈ 0.0122.
  EXPECT_TRUE(detect_fault(registration(1e-6), innovation_of_size(1e-4), eps_th, cfg));
  EXPECT_FALSE(detect_fault(registration(INFINITY, RegistrationStatus::kEmptyCloud), std::nullopt,
                            eps_th, cfg));
  EXPECT_FALSE(detect_fault(registration(INFINITY, RegistrationStatus::kEmptyCorrespondence),
                            std::nullopt, eps_th, cfg));
  EXPECT_TRUE(detect_fault(registration(1.01e-5), innovation_of_size(1e-4), eps_th, cfg));
  EXPECT_TRUE(detect_fault(registration(1e-6), innovation_of_size(1.0), eps_th, cfg));
  EXPECT_FALSE(detect_fault(registration(1.01e-5), innovation_of_size(1.0), eps_th, cfg));
  EXPECT_FALSE(detect_fault(registration(1.01e-5), std::nullopt, eps_th, cfg));
}

TEST(WeightedInnovationNorm, ScalesAttitudeRows) {
  MeasVec a;
  a << 3, 0, 0, 0, 0, 2;
  EXPECT_DOUBLE_EQ(weighted_innovation_norm(a, 2.0), 5.0);
}

TEST(ConvergenceMonitorTest, LatchesAfterHoldAndNeverReverts) {
  ConvergenceMonitor m(1e-3, 3);
  FilterState fs;
  fs.P = StateMat::Identity();
  EXPECT_FALSE(m.observe(fs));
  fs.P = StateMat::Identity() * 1e-6;
  fs.time = 1.0;
  EXPECT_FALSE(m.observe(fs));
  fs.time = 2.0;
  EXPECT_FALSE(m.observe(fs));
  fs.P = StateMat::Identity();
  EXPECT_FALSE(m.observe(fs));
  fs.P = StateMat::Identity() * 1e-6;
  for (int i = 0; i < 3; ++i) {
    fs.time = 10.0 + i;
    m.observe(fs);
  }
  EXPECT_TRUE(m.latched());
  EXPECT_EQ(m.latched_at(), 12.0);
  fs.P = StateMat::Identity() * 1e6;
  EXPECT_TRUE(m.observe(fs));
}

TEST(ParameterTrace, SumsParameterBlockOnly) {
  StateVec d = StateVec::Zero();
  d.segment<8>(idx::kSigma).setConstant(2.0);
  d.head<12>().setConstant(100.0);
  EXPECT_EQ(parameter_trace(StateMat(d.asDiagonal())), 16.0);
}

// Closed filter loop in the nominal adaptive configuration on direct pose measurements.
struct NeesRun {
  std::vector<double> post_convergence_nees;
  bool sigma_in_box = true;
  bool covariance_healthy = true;
};

NeesRun nees_run(std::uint64_t seed) {
  const ScenarioConfig sc = analog_scenario();
  const double pos_std = 0.003, att_std = 0.005, period = 0.5;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  EstimatorConfig cfg = EstimatorConfig::from_noise(sc.noise);
  cfg.R0 = MeasVec(pos_std * pos_std, pos_std * pos_std, pos_std * pos_std, att_std * att_std,
                   att_std * att_std, att_std * att_std)
               .asDiagonal();

  auto measure = [&](const TargetState& x, double t) {
    Measurement z;
    z.rho_bar = grapple_position(x) + pos_std * Vec3(n01(rng), n01(rng), n01(rng));
    const UnitQuaternion e =
        UnitQuaternion::from_error_vector(att_std * Vec3(n01(rng), n01(rng), n01(rng)));
    z.eta_bar = quat_product(quat_product(x.mu, e), x.body.q);
    z.healthy = true;
    z.timestamp = t;
    return z;
  };

  TargetState truth = sc.initial_target();
  Measurement first = measure(truth, 0.0);
  FilterState fs = initialize_filter({first.rho_bar, first.eta_bar}, 0.0,
                                     default_initial_covariance(sc.estimator.initial), cfg);
  ConvergenceMonitor monitor(sc.estimator.convergence_threshold, sc.estimator.convergence_hold);
  NeesRun out;
  for (int k = 1; k <= 400; ++k) {
    const double t = k * period;
    truth = propagate_truth(truth, period, sc.noise, rng);
    fs = propagate(fs, period, cfg);
    const UpdateResult up = update(fs, measure(truth, t), cfg);
    fs = adapt_R(up.state, up.residual, cfg);
    out.sigma_in_box &= std::abs(fs.xhat.sigma.sigma1) < 1.0 && std::abs(fs.xhat.sigma.sigma2) < 1.0;
    const Eigen::SelfAdjointEigenSolver<StateMat> es(fs.P, Eigen::EigenvaluesOnly);
    out.covariance_healthy &= es.eigenvalues()(0) >= -1e-10;
    if (!monitor.observe(fs)) continue;
    const Eigen::Matrix<double, 12, 1> e = state_difference(truth, fs.xhat).head<12>();
    const Eigen::Matrix<double, 12, 12> P = fs.P.topLeftCorner<12, 12>();
    out.post_convergence_nees.push_back(e.dot(P.ldlt().solve(e)));
  }
  return out;
}

TEST(Consistency, DynamicStateNeesInChiSquareBand) {
  long inside = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const NeesRun r = nees_run(seed);
    EXPECT_TRUE(r.sigma_in_box);
    EXPECT_TRUE(r.covariance_healthy);
    for (double v : r.post_convergence_nees) {
      ++total;
      if (v >= kChi2Lo12 && v <= kChi2Hi12) ++inside;
    }
  }
  ASSERT_GT(total, 0);
  const double fraction = static_cast<double>(inside) / static_cast<double>(total);
  RecordProperty("nees_in_band_fraction", std::to_string(fraction));
  EXPECT_GE(fraction, 0.8);
}

}  // namespace
}  // namespace ftvs
