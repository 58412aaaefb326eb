#include "support.hpp"

#include <cmath>

namespace ftvs::test {

UnitQuaternion random_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Vec4 v;
  do {
    v = Vec4(n01(rng), n01(rng), n01(rng), n01(rng));
  } while (v.norm() < 1e-3);
  return UnitQuaternion::from_vec4(v / v.norm());
}

Inertia random_inertia(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.5, 20.0);
  for (;;) {
    const double a = u(rng), b = u(rng), c = u(rng);
    if (a + b > c && b + c > a && c + a > b) return {a, b, c};
  }
}

TargetState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto vec = [&](double scale) -> Vec3 { return Vec3(u(rng), u(rng), u(rng)) * scale; };
  TargetState x;
  x.body.q = random_quaternion(rng);
  x.body.omega = vec(0.3);
  x.body.rho_o = vec(1.0) + Vec3(0.0, 0.0, 2.0);
  x.body.rho_o_dot = vec(0.01);
  x.sigma = sigma_from_inertia(random_inertia(rng));
  x.varrho = vec(0.2);
  x.mu = UnitQuaternion::from_axis_angle(vec(1.0), 0.17 * u(rng));
  return x;
}

namespace {

StateVec unit(int i) {
  StateVec e = StateVec::Zero();
  e(i) = 1.0;
  return e;
}

// Symmetric-in-time derivative of the error between a perturbed and the nominal trajectory.
StateVec error_rate(const TargetState& x, const StateVec& dx, double h) {
  const TargetState xp = apply_error(x, dx);
  const StateVec fwd = state_difference(rk4_step(xp, h), rk4_step(x, h));
  const StateVec bwd = state_difference(rk4_step(xp, -h), rk4_step(x, -h));
  return (fwd - bwd) / (2.0 * h);
}

}  // namespace

StateMat finite_difference_F(const TargetState& x, double eps, double h) {
  StateMat F;
  for (int i = 0; i < kStateDim; ++i) {
    F.col(i) = (error_rate(x, eps * unit(i), h) - error_rate(x, -eps * unit(i), h)) / (2.0 * eps);
  }
  return F;
}

NoiseMat finite_difference_G(const TargetState& x, double eps) {
  NoiseMat G;
  for (int j = 0; j < kNoiseDim; ++j) {
    Vec3 tau = Vec3::Zero(), f = Vec3::Zero();
    (j < 3 ? tau : f)(j % 3) = eps;
    const StateVec plus = state_derivative(x, tau, f).as_vector();
    const StateVec minus = state_derivative(x, -tau, -f).as_vector();
    G.col(j) = (plus - minus) / (2.0 * eps);
  }
  return G;
}

MeasMat finite_difference_H(const TargetState& x, double eps) {
  MeasMat H;
  for (int i = 0; i < kStateDim; ++i) {
    H.col(i) = (observe_error_state(x, eps * unit(i)) - observe_error_state(x, -eps * unit(i))) /
               (2.0 * eps);
  }
  return H;
}

MeasCov batch_window_average(const std::vector<MeasVec>& residuals, std::size_t n, int window) {
  const std::size_t w = static_cast<std::size_t>(window);
  const std::size_t first = n > w ? n - w : 0;
  MeasCov sum = MeasCov::Zero();
  for (std::size_t i = first; i < n; ++i) sum += residuals[i] * residuals[i].transpose();
  return sum / static_cast<double>(n - first);
}

double best_translation_objective(const UnitQuaternion& q, const std::vector<Vec3>& cloud,
                                  const std::vector<Vec3>& model) {
  const Mat3 A = rotation_matrix(q);
  Vec3 cbar = Vec3::Zero(), dbar = Vec3::Zero();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    cbar += cloud[i];
    dbar += model[i];
  }
  cbar /= static_cast<double>(cloud.size());
  dbar /= static_cast<double>(model.size());
  const Vec3 rho = cbar - A * dbar;
  double s = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) s += (A * model[i] + rho - cloud[i]).squaredNorm();
  return s / static_cast<double>(cloud.size());
}

std::vector<Vec3> transform_points(const std::vector<Vec3>& pts, const UnitQuaternion& q,
                                   const Vec3& t) {
  const Mat3 A = rotation_matrix(q);
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(A * p + t);
  return out;
}

Pose perturb_pose(const Pose& pose, double angle, double offset, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  auto direction = [&] {
    Vec3 v(n01(rng), n01(rng), n01(rng));
    return Vec3(v / v.norm());
  };
  Pose out;
  out.attitude = quat_product(pose.attitude, UnitQuaternion::from_axis_angle(direction(), angle));
  out.position = pose.position + offset * direction();
  return out;
}

ScenarioConfig ideal_scenario() {
  ScenarioConfig c = analog_scenario();
  c.name = "ideal";
  c.noise = ProcessNoise::isotropic(0.0, 0.0);
  c.sensor.noise_std = 0.0;
  c.sensor.outlier_fraction = 0.0;
  c.terminal_blackout = 0.0;
  c.faults = FaultSchedule();
  return c;
}

}  // namespace ftvs::test
