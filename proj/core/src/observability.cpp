#include "ftvs/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "ftvs/estimator.hpp"

namespace ftvs {

GramianAccumulator::GramianAccumulator(int n)
    : W_(Eigen::MatrixXd::Zero(n, n)), chain_(Eigen::MatrixXd::Identity(n, n)) {}

void GramianAccumulator::step(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& H) {
  const int n = dim();
  if (Phi.rows() != n || Phi.cols() != n || H.cols() != n) {
    throw std::invalid_argument("GramianAccumulator::step: dimension mismatch");
  }
  chain_ = Phi * chain_;
  const Eigen::MatrixXd HPhi = H * chain_;
  W_ += HPhi.transpose() * HPhi;
  W_ = 0.5 * (W_ + W_.transpose());
  ++k_;
}

GramianAccumulator gramian_step(GramianAccumulator acc, const Eigen::MatrixXd& Phi,
                                const Eigen::MatrixXd& H) {
  acc.step(Phi, H);
  return acc;
}

double condition_number(const Eigen::MatrixXd& W) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  const double lmax = es.eigenvalues()(W.rows() - 1);
  if (lmin < 1e-300) return std::numeric_limits<double>::infinity();
  return lmax / lmin;
}

double normalized_condition_number(const Eigen::MatrixXd& W) {
  const Eigen::VectorXd d = W.diagonal();
  if ((d.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd s = d.array().rsqrt();
  return condition_number(s.asDiagonal() * W * s.asDiagonal());
}

Eigen::MatrixXd jacobian_F_nonminimal(const TargetState& x) {
  constexpr int kS = 12;
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(kNonMinimalDim, kNonMinimalDim);
  const Vec3& w = x.body.omega;
  const double s1 = x.sigma.sigma1;
  const double s2 = x.sigma.sigma2;
  const double s3 = sigma3_of(x.sigma);
  F.block<3, 3>(idx::kAtt, idx::kAtt) = -skew(w);
  F.block<3, 3>(idx::kAtt, idx::kOmega) = 0.5 * Mat3::Identity();
  Mat3 dw;
  dw << 0.0, s1 * w.z(), s1 * w.y(),
        s2 * w.z(), 0.0, s2 * w.x(),
        s3 * w.y(), s3 * w.x(), 0.0;
  F.block<3, 3>(idx::kOmega, idx::kOmega) = dw;
  F(idx::kOmega + 0, kS + 0) = w.y() * w.z();
  F(idx::kOmega + 1, kS + 1) = w.x() * w.z();
  F(idx::kOmega + 2, kS + 2) = w.x() * w.y();
  F.block<3, 3>(idx::kPos, idx::kVel) = Mat3::Identity();
  return F;
}

Eigen::MatrixXd observation_matrix_nonminimal(const TargetState& x) {
  const MeasMat Hm = observation_matrix(x);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(kMeasDim, kNonMinimalDim);
  H.leftCols(idx::kSigma) = Hm.leftCols(idx::kSigma);
  // Parameter columns after σ shift right by one.
  H.rightCols(kStateDim - idx::kVarrho) = Hm.rightCols(kStateDim - idx::kVarrho);
  return H;
}

const char* to_string(ParameterSet p) {
  return p == ParameterSet::kMinimal ? "minimal" : "non_minimal";
}

namespace {

Eigen::MatrixXd second_order_phi(const Eigen::MatrixXd& F, double h) {
  const Eigen::MatrixXd Fd = F * h;
  return Eigen::MatrixXd::Identity(F.rows(), F.cols()) + Fd + 0.5 * Fd * Fd;
}

}  // namespace

std::vector<ObservabilityRow> observability_study(const TargetState& x0,
                                                  const ObservabilityStudyConfig& cfg) {
  if (!(cfg.duration > 0.0) || !(cfg.measurement_period > 0.0) || !(cfg.substep > 0.0)) {
    throw std::invalid_argument("observability_study: durations must be positive");
  }
  const int substeps =
      std::max(1, static_cast<int>(std::ceil(cfg.measurement_period / cfg.substep - 1e-9)));
  const double h = cfg.measurement_period / substeps;
  const long epochs = static_cast<long>(std::floor(cfg.duration / cfg.measurement_period + 1e-9));

  GramianAccumulator minimal(kStateDim);
  GramianAccumulator nonminimal(kNonMinimalDim);
  std::vector<ObservabilityRow> rows;
  rows.reserve(2 * static_cast<std::size_t>(epochs));
  TargetState x = x0;
  for (long k = 1; k <= epochs; ++k) {
    Eigen::MatrixXd phi_m = Eigen::MatrixXd::Identity(kStateDim, kStateDim);
    Eigen::MatrixXd phi_n = Eigen::MatrixXd::Identity(kNonMinimalDim, kNonMinimalDim);
    for (int i = 0; i < substeps; ++i) {
      phi_m = second_order_phi(jacobian_F(x), h) * phi_m;
      phi_n = second_order_phi(jacobian_F_nonminimal(x), h) * phi_n;
      x = propagate_noise_free(x, h, 0.01);
    }
    minimal.step(phi_m, observation_matrix(x));
    nonminimal.step(phi_n, observation_matrix_nonminimal(x));
    const double t = k * cfg.measurement_period;
    rows.push_back({t, k, condition_number(minimal.gramian()),
                    normalized_condition_number(minimal.gramian()), ParameterSet::kMinimal});
    rows.push_back({t, k, condition_number(nonminimal.gramian()),
                    normalized_condition_number(nonminimal.gramian()), ParameterSet::kNonMinimal});
  }
  return rows;
}

void write_observability_csv(std::ostream& out, const std::vector<ObservabilityRow>& rows) {
  const auto prec = out.precision(17);
  out << "time,epoch,cond_raw,cond_normalized,variant\n";
  for (const auto& r : rows) {
    out << r.time << ',' << r.epoch << ',' << r.cond_raw << ',' << r.cond_normalized << ','
        << to_string(r.variant) << '\n';
  }
  out.precision(prec);
}

}  // namespace ftvs
