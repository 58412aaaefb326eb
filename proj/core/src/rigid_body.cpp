#include "ftvs/rigid_body.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ftvs {

namespace {
constexpr double kDenomTol = 1e-12;
}

bool SigmaParams::in_box() const {
  return std::abs(sigma1) < 1.0 && std::abs(sigma2) < 1.0;
}

StateVec StateDerivative::as_vector() const {
  StateVec v = StateVec::Zero();
  v.segment<3>(idx::kAtt) = q_dot.head<3>();
  v.segment<3>(idx::kOmega) = omega_dot;
  v.segment<3>(idx::kPos) = rho_o_dot;
  v.segment<3>(idx::kVel) = rho_o_ddot;
  return v;
}

SigmaParams sigma_from_inertia(double ixx, double iyy, double izz) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("sigma_from_inertia: violated " + what);
  };
  if (!(ixx > 0.0)) fail("Ixx > 0");
  if (!(iyy > 0.0)) fail("Iyy > 0");
  if (!(izz > 0.0)) fail("Izz > 0");
  if (!(ixx + iyy > izz)) fail("Ixx + Iyy > Izz");
  if (!(iyy + izz > ixx)) fail("Iyy + Izz > Ixx");
  if (!(izz + ixx > iyy)) fail("Izz + Ixx > Iyy");
  return {(iyy - izz) / ixx, (izz - ixx) / iyy};
}

double sigma3_of(const SigmaParams& s) {
  const double den = 1.0 + s.sigma1 * s.sigma2;
  if (den <= kDenomTol) {
    std::ostringstream os;
    os << "sigma3_of: 1 + s1*s2 = " << den << " is not positive";
    throw NumericDegenerate(os.str());
  }
  return -(s.sigma1 + s.sigma2) / den;
}

double gamma_constraint(double s1, double s2, double s3) {
  return s1 + s2 + s3 + s1 * s2 * s3;
}

Vec3 euler_phi(const Vec3& w, const SigmaParams& s) {
  const double s3 = sigma3_of(s);
  return {s.sigma1 * w.y() * w.z(), s.sigma2 * w.x() * w.z(), s3 * w.x() * w.y()};
}

Mat3 euler_phi_domega(const Vec3& w, const SigmaParams& s) {
  const double s3 = sigma3_of(s);
  Mat3 m;
  m << 0.0, s.sigma1 * w.z(), s.sigma1 * w.y(),
       s.sigma2 * w.z(), 0.0, s.sigma2 * w.x(),
       s3 * w.y(), s3 * w.x(), 0.0;
  return m;
}

Eigen::Matrix<double, 3, 2> euler_phi_dsigma(const Vec3& w, const SigmaParams& s) {
  const double den = 1.0 + s.sigma1 * s.sigma2;
  if (den <= kDenomTol) throw NumericDegenerate("euler_phi_dsigma: 1 + s1*s2 is not positive");
  const double den2 = den * den;
  Eigen::Matrix<double, 3, 2> m;
  m << w.y() * w.z(), 0.0,
       0.0, w.x() * w.z(),
       (s.sigma2 * s.sigma2 - 1.0) / den2 * w.x() * w.y(),
       (s.sigma1 * s.sigma1 - 1.0) / den2 * w.x() * w.y();
  return m;
}

Mat3 disturbance_gain_B(const SigmaParams& sg) {
  const double s1 = sg.sigma1;
  const double s2 = sg.sigma2;
  const double d1 = 1.0 - s2;
  const double d2 = 1.0 + s1;
  const double d3 = 1.0 + s1 * s2;
  if (d1 <= kDenomTol || d2 <= kDenomTol || d3 <= kDenomTol) {
    throw NumericDegenerate("disturbance_gain_B: denominator not positive");
  }
  const Vec3 diag(1.0 + (2.0 + s1 * s2 + s1) / d1,
                  1.0 + (2.0 + s1 * s2 - s2) / d2,
                  1.0 + (2.0 + s1 - s2) / d3);
  return diag.asDiagonal();
}

StateDerivative state_derivative(const TargetState& x, const Vec3& eps_tau, const Vec3& eps_f) {
  StateDerivative d;
  const BodyState& b = x.body;
  d.q_dot = 0.5 * omega_matrix(b.omega) * b.q.coeffs();
  d.omega_dot = euler_phi(b.omega, x.sigma) + disturbance_gain_B(x.sigma) * eps_tau;
  d.rho_o_dot = b.rho_o_dot;
  d.rho_o_ddot = eps_f;
  return d;
}

StateMat jacobian_F(const TargetState& x) {
  StateMat F = StateMat::Zero();
  const Vec3& w = x.body.omega;
  F.block<3, 3>(idx::kAtt, idx::kAtt) = -skew(w);
  F.block<3, 3>(idx::kAtt, idx::kOmega) = 0.5 * Mat3::Identity();
  F.block<3, 3>(idx::kOmega, idx::kOmega) = euler_phi_domega(w, x.sigma);
  F.block<3, 2>(idx::kOmega, idx::kSigma) = euler_phi_dsigma(w, x.sigma);
  F.block<3, 3>(idx::kPos, idx::kVel) = Mat3::Identity();
  return F;
}

NoiseMat jacobian_G(const TargetState& x) {
  NoiseMat G = NoiseMat::Zero();
  G.block<3, 3>(idx::kOmega, 0) = disturbance_gain_B(x.sigma);
  G.block<3, 3>(idx::kVel, 3) = Mat3::Identity();
  return G;
}

namespace {

// Dynamic block packed as [q(4), ω, ρ_o, ρ̇_o].
using Dyn = Eigen::Matrix<double, 13, 1>;

Dyn dyn_rate(const Dyn& y, const SigmaParams& s, const Mat3& B, const Vec3& eps_tau,
             const Vec3& eps_f) {
  Dyn r;
  const Vec3 w = y.segment<3>(4);
  r.head<4>() = 0.5 * omega_matrix(w) * y.head<4>();
  r.segment<3>(4) = euler_phi(w, s) + B * eps_tau;
  r.segment<3>(7) = y.segment<3>(10);
  r.segment<3>(10) = eps_f;
  return r;
}

}  // namespace

TargetState rk4_step(const TargetState& x, double h, const Vec3& eps_tau, const Vec3& eps_f) {
  Dyn y;
  y.head<4>() = x.body.q.coeffs();
  y.segment<3>(4) = x.body.omega;
  y.segment<3>(7) = x.body.rho_o;
  y.segment<3>(10) = x.body.rho_o_dot;
  const Mat3 B = eps_tau.isZero(0.0) ? Mat3::Zero() : disturbance_gain_B(x.sigma);

  const Dyn k1 = dyn_rate(y, x.sigma, B, eps_tau, eps_f);
  const Dyn k2 = dyn_rate(y + 0.5 * h * k1, x.sigma, B, eps_tau, eps_f);
  const Dyn k3 = dyn_rate(y + 0.5 * h * k2, x.sigma, B, eps_tau, eps_f);
  const Dyn k4 = dyn_rate(y + h * k3, x.sigma, B, eps_tau, eps_f);
  const Dyn yn = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  TargetState out = x;
  out.body.q = UnitQuaternion::from_vec4(yn.head<4>());
  out.body.omega = yn.segment<3>(4);
  out.body.rho_o = yn.segment<3>(7);
  out.body.rho_o_dot = yn.segment<3>(10);
  return out;
}

TargetState propagate_noise_free(const TargetState& x, double duration, double max_step) {
  if (duration <= 0.0) return x;
  const int n = static_cast<int>(std::ceil(duration / max_step - 1e-9));
  const double h = duration / n;
  TargetState s = x;
  for (int i = 0; i < n; ++i) s = rk4_step(s, h);
  return s;
}

TargetState apply_error(const TargetState& x, const StateVec& dx) {
  TargetState out = x;
  const UnitQuaternion dq = UnitQuaternion::from_error_vector(dx.segment<3>(idx::kAtt));
  out.body.q = quat_product(dq, x.body.q);
  out.body.omega += dx.segment<3>(idx::kOmega);
  out.body.rho_o += dx.segment<3>(idx::kPos);
  out.body.rho_o_dot += dx.segment<3>(idx::kVel);
  out.sigma.sigma1 += dx(idx::kSigma);
  out.sigma.sigma2 += dx(idx::kSigma + 1);
  out.varrho += dx.segment<3>(idx::kVarrho);
  const UnitQuaternion dmu = UnitQuaternion::from_error_vector(dx.segment<3>(idx::kMu));
  out.mu = quat_product(x.mu, dmu);
  return out;
}

StateVec state_difference(const TargetState& x, const TargetState& ref) {
  StateVec d;
  d.segment<3>(idx::kAtt) = quat_product(x.body.q, ref.body.q.inverse()).canonical().vec();
  d.segment<3>(idx::kOmega) = x.body.omega - ref.body.omega;
  d.segment<3>(idx::kPos) = x.body.rho_o - ref.body.rho_o;
  d.segment<3>(idx::kVel) = x.body.rho_o_dot - ref.body.rho_o_dot;
  d(idx::kSigma) = x.sigma.sigma1 - ref.sigma.sigma1;
  d(idx::kSigma + 1) = x.sigma.sigma2 - ref.sigma.sigma2;
  d.segment<3>(idx::kVarrho) = x.varrho - ref.varrho;
  d.segment<3>(idx::kMu) = quat_product(ref.mu.inverse(), x.mu).canonical().vec();
  return d;
}

Vec3 grapple_position(const TargetState& x) {
  return x.body.rho_o + rotation_matrix(x.body.q) * x.varrho;
}

Vec3 grapple_velocity(const TargetState& x) {
  return x.body.rho_o_dot + rotation_matrix(x.body.q) * x.body.omega.cross(x.varrho);
}

Pose grapple_pose(const TargetState& x) {
  return {grapple_position(x), quat_product(x.mu, x.body.q)};
}

double kinetic_energy(const Vec3& w, const Inertia& I) {
  return 0.5 * w.dot(I.matrix() * w);
}

double angular_momentum_norm(const Vec3& w, const Inertia& I) {
  return (I.matrix() * w).norm();
}

}  // namespace ftvs
