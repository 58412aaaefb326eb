#include "ftvs/truth.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace ftvs {

ProcessNoise ProcessNoise::isotropic(double force_var, double torque_var, double substep) {
  ProcessNoise n;
  n.force_cov = force_var * Mat3::Identity();
  n.torque_cov = torque_var * Mat3::Identity();
  n.substep = substep;
  return n;
}

Mat6 ProcessNoise::spectral_density() const {
  Mat6 q = Mat6::Zero();
  q.topLeftCorner<3, 3>() = torque_cov * substep;
  q.bottomRightCorner<3, 3>() = force_cov * substep;
  return q;
}

namespace {

Mat3 cov_factor(const Mat3& cov) {
  if (cov.isZero(0.0)) return Mat3::Zero();
  Eigen::LLT<Mat3> llt(cov);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("process noise covariance is not SPD");
  return llt.matrixL();
}

Vec3 standard_normal3(std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vec3 z;
  z.x() = n01(rng);
  z.y() = n01(rng);
  z.z() = n01(rng);
  return z;
}

}  // namespace

std::pair<Vec3, Vec3> sample_process_noise(const ProcessNoise& noise, std::mt19937_64& rng) {
  const Vec3 zt = standard_normal3(rng);
  const Vec3 zf = standard_normal3(rng);
  return {cov_factor(noise.torque_cov) * zt, cov_factor(noise.force_cov) * zf};
}

TargetState propagate_truth(const TargetState& state, double dt, const ProcessNoise& noise,
                            std::mt19937_64& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagate_truth: dt must be positive");
  const int n = std::max(1, static_cast<int>(std::ceil(dt / noise.substep - 1e-9)));
  const double h = dt / n;
  const Mat3 Lt = cov_factor(noise.torque_cov);
  const Mat3 Lf = cov_factor(noise.force_cov);
  const bool noisy = !noise.is_zero();
  TargetState x = state;
  for (int i = 0; i < n; ++i) {
    if (noisy) {
      const Vec3 et = Lt * standard_normal3(rng);
      const Vec3 ef = Lf * standard_normal3(rng);
      x = rk4_step(x, h, et, ef);
    } else {
      x = rk4_step(x, h);
    }
  }
  return x;
}

TargetState propagate_truth(const TargetState& state, double dt, const ProcessNoise& noise,
                            std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  return propagate_truth(state, dt, noise, rng);
}

std::pair<Vec3, Vec3> step_chaser(const Vec3& r, const Vec3& r_dot, const Vec3& u, double dt,
                                  double a_max) {
  if (u.norm() > a_max + 1e-9) {
    throw std::invalid_argument("step_chaser: acceleration exceeds a_max");
  }
  return {r + r_dot * dt + 0.5 * u * dt * dt, r_dot + u * dt};
}

}  // namespace ftvs
