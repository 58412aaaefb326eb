#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "ftvs/rigid_body.hpp"

namespace ftvs {

/// Force/torque disturbance model. Each draw of ε_f and ε_τ has the given
/// covariance and is held constant over one integration substep.
struct ProcessNoise {
  Mat3 force_cov = Mat3::Zero();    // E[ε_f ε_fᵀ], m²/s⁴
  Mat3 torque_cov = Mat3::Zero();   // E[ε_τ ε_τᵀ], rad²/s⁴
  double substep = 0.01;            // s

  static ProcessNoise isotropic(double force_var, double torque_var, double substep = 0.01);
  bool is_zero() const { return force_cov.isZero(0.0) && torque_cov.isZero(0.0); }
  /// Continuous-time spectral densities matching the held draws: Q · substep.
  Mat6 spectral_density() const;
};

/// Draws (ε_τ, ε_f).
std::pair<Vec3, Vec3> sample_process_noise(const ProcessNoise& noise, std::mt19937_64& rng);

/// Integrates the target dynamics over dt with fixed RK4 substeps of at most
/// noise.substep, drawing fresh disturbance samples each substep.
TargetState propagate_truth(const TargetState& state, double dt, const ProcessNoise& noise,
                            std::mt19937_64& rng);
TargetState propagate_truth(const TargetState& state, double dt, const ProcessNoise& noise,
                            std::uint64_t rng_seed);

/// Exact double-integrator update under constant u. Throws
/// std::invalid_argument when ‖u‖ > a_max + 1e-9.
std::pair<Vec3, Vec3> step_chaser(const Vec3& r, const Vec3& r_dot, const Vec3& u, double dt,
                                  double a_max);

}  // namespace ftvs
