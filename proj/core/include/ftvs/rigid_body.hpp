#pragma once

#include "ftvs/quaternion.hpp"
#include "ftvs/types.hpp"

namespace ftvs {

/// Independent dimensionless inertia ratios (σ₁, σ₂). σ₃ is always derived.
struct SigmaParams {
  double sigma1 = 0.0;
  double sigma2 = 0.0;

  /// True when both lie in the open box (-1, 1).
  bool in_box() const;
  Eigen::Vector2d vec() const { return {sigma1, sigma2}; }
};

struct Inertia {
  double ixx = 1.0;
  double iyy = 1.0;
  double izz = 1.0;

  Mat3 matrix() const { return Eigen::Vector3d(ixx, iyy, izz).asDiagonal(); }
  double trace() const { return ixx + iyy + izz; }
};

struct BodyState {
  UnitQuaternion q;                 // {B} w.r.t. camera {A}
  Vec3 omega = Vec3::Zero();        // rad/s, in {B}
  Vec3 rho_o = Vec3::Zero();        // m, CoM in {A}
  Vec3 rho_o_dot = Vec3::Zero();    // m/s
};

struct TargetState {
  BodyState body;
  SigmaParams sigma;
  Vec3 varrho = Vec3::Zero();       // grapple offset from CoM, in {B}
  UnitQuaternion mu;                // {C} relative to {B}: η = μ ⊗ q
};

struct Pose {
  Vec3 position = Vec3::Zero();
  UnitQuaternion attitude;
};

/// Time derivative of the dynamic block; parameter blocks are constant.
struct StateDerivative {
  Vec4 q_dot = Vec4::Zero();
  Vec3 omega_dot = Vec3::Zero();
  Vec3 rho_o_dot = Vec3::Zero();
  Vec3 rho_o_ddot = Vec3::Zero();

  /// Packs [q̇_v, ω̇, ρ̇_o, ρ̈_o, 0₈] in error-state ordering.
  StateVec as_vector() const;
};

/// σ₁=(Iyy−Izz)/Ixx, σ₂=(Izz−Ixx)/Iyy. Throws std::invalid_argument naming the
/// violated positivity or triangle inequality.
SigmaParams sigma_from_inertia(double ixx, double iyy, double izz);
inline SigmaParams sigma_from_inertia(const Inertia& I) {
  return sigma_from_inertia(I.ixx, I.iyy, I.izz);
}

/// σ₃ = −(σ₁+σ₂)/(1+σ₁σ₂). Throws NumericDegenerate if 1+σ₁σ₂ is not positive.
double sigma3_of(const SigmaParams& s);

/// Γ(σ) = σ₁+σ₂+σ₃+σ₁σ₂σ₃.
double gamma_constraint(double s1, double s2, double s3);

/// Euler-equation coupling term φ(ω, σ).
Vec3 euler_phi(const Vec3& omega, const SigmaParams& sigma);
Mat3 euler_phi_domega(const Vec3& omega, const SigmaParams& sigma);
Eigen::Matrix<double, 3, 2> euler_phi_dsigma(const Vec3& omega, const SigmaParams& sigma);

/// Diagonal gain B(σ) mapping ε_τ = τ / tr(I_c) into angular acceleration.
Mat3 disturbance_gain_B(const SigmaParams& sigma);

StateDerivative state_derivative(const TargetState& x, const Vec3& eps_tau, const Vec3& eps_f);

/// Linearized error dynamics (20×20) and noise input (20×6, noise order [ε_τ, ε_f]).
StateMat jacobian_F(const TargetState& x);
NoiseMat jacobian_G(const TargetState& x);

/// One classical RK4 step with noise held constant; quaternion renormalized.
TargetState rk4_step(const TargetState& x, double h, const Vec3& eps_tau = Vec3::Zero(),
                     const Vec3& eps_f = Vec3::Zero());

/// Noise-free propagation over `duration` using steps no longer than `max_step`.
TargetState propagate_noise_free(const TargetState& x, double duration, double max_step = 0.01);

/// Applies an error-state correction: q ← δq ⊗ q, μ ← μ ⊗ δμ, everything else additive.
TargetState apply_error(const TargetState& x, const StateVec& dx);
/// Inverse of apply_error: returns δx such that apply_error(ref, δx) ≈ x.
StateVec state_difference(const TargetState& x, const TargetState& ref);

Vec3 grapple_position(const TargetState& x);
Vec3 grapple_velocity(const TargetState& x);
/// Pose of the grapple frame {C} in {A}: (ρ_o + A(q)ϱ, μ ⊗ q).
Pose grapple_pose(const TargetState& x);

double kinetic_energy(const Vec3& omega, const Inertia& I);
double angular_momentum_norm(const Vec3& omega, const Inertia& I);

}  // namespace ftvs
