#pragma once

#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ftvs/rigid_body.hpp"

namespace ftvs {

using ShootingVec = Eigen::Matrix<double, 7, 1>;

struct RendezvousProblem {
  Vec3 r0 = Vec3::Zero();      // m, chaser position at plan time
  Vec3 r0_dot = Vec3::Zero();  // m/s
  TargetState target;          // estimate snapshot at plan time
  double a_max = 1.0;          // m/s²
  double t = 0.0;              // s, plan epoch

  void validate() const;
};

/// Unknowns χ = (c₁, c₂, t_f); the costate direction is p(τ) = −c₁τ + c₂.
struct Chi {
  Vec3 c1 = Vec3::Zero();
  Vec3 c2 = Vec3::Zero();
  double tf = 0.0;
};

struct TrajectorySample {
  double t = 0.0;
  Vec3 r = Vec3::Zero();
  Vec3 r_dot = Vec3::Zero();
  Vec3 u = Vec3::Zero();
};

struct RendezvousSolution {
  Chi chi;
  double t0 = 0.0;  // plan epoch
  Vec3 r0 = Vec3::Zero();
  Vec3 r0_dot = Vec3::Zero();
  double a_max = 1.0;
  double residual = 0.0;
  int start_index = -1;  // -1 for warm starts and the coincident case
  int iterations = 0;
  std::vector<TrajectorySample> trajectory;

  double tf() const { return chi.tf; }
  /// Planned control at τ ∈ [t0, tf].
  Vec3 control(double tau) const;
  /// Chaser state along the plan, by exact integration of the saturated input.
  std::pair<Vec3, Vec3> state_at(double tau) const;
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

struct SolverConfig {
  double tolerance = 1e-6;                                // success when e < tolerance
  int max_iterations = 200;
  double fd_step = 1e-6;                                  // relative forward-difference step
  std::vector<double> start_horizons = {5.0, 10.0, 20.0, 40.0};  // s
  bool midpoint_starts = true;
  double coincidence_tol = 1e-9;                          // m and m/s
  double sample_period = 0.1;                             // s, trajectory output spacing
  double ephemeris_step = 0.01;                           // s
  double max_horizon = 600.0;                             // s
};

/// Grapple-point position and velocity after noise-free propagation to tf.
std::pair<Vec3, Vec3> predict_grapple(const TargetState& target, double t, double tf);

/// Tabulated noise-free grapple kinematics from a fixed epoch; off-node times
/// take a partial RK4 step from the preceding node.
class GrappleEphemeris {
 public:
  GrappleEphemeris(const TargetState& target, double t0, double step = 0.01);
  std::pair<Vec3, Vec3> at(double tf);
  double t0() const { return t0_; }

 private:
  void extend_to(std::size_t node);
  std::vector<TargetState> nodes_;
  double t0_;
  double step_;
};

/// u = −a_max·p/‖p‖. At a zero crossing the one-sided limit from τ⁻ is
/// returned; throws std::invalid_argument when c₁ and p both vanish.
Vec3 control_of(const Chi& chi, double tau, double a_max);

/// Exact ∫_t^τ u dν and ∫_t^τ (τ−ν) u dν for the saturated costate law.
std::pair<Vec3, Vec3> control_integrals(const Chi& chi, double t, double tau, double a_max);

/// H(τ) − H(t_f) along the extremal with H = 1 + c₁ᵀṙ + pᵀu.
double hamiltonian_gap(const Chi& chi, const RendezvousProblem& pb);
double hamiltonian(const Chi& chi, double tau, const Vec3& r_dot, double a_max);

/// Stacked mismatch [velocity; position; ΔH].
ShootingVec shooting_residual_vector(const Chi& chi, const RendezvousProblem& pb,
                                     GrappleEphemeris& eph);
double shooting_residual(const Chi& chi, const RendezvousProblem& pb);

/// Multi-start Levenberg–Marquardt; the smallest converged t_f wins, ties by
/// start index. Throws SolverFailure when no start converges.
RendezvousSolution solve_rendezvous(const RendezvousProblem& pb, const SolverConfig& cfg = {});

/// Warm-started re-solve; falls back to the multi-start, then to `previous`.
/// `replaced` reports whether a new solution was adopted.
RendezvousSolution replan(const RendezvousProblem& pb, const RendezvousSolution& previous,
                          const SolverConfig& cfg, bool* replaced = nullptr);

/// Fills solution.trajectory at cfg.sample_period plus the terminal sample.
void sample_trajectory(RendezvousSolution& sol, double period);

/// CSV: t, r(3), ṙ(3), u(3), tf, residual.
void write_trajectory_csv(std::ostream& out, const RendezvousSolution& sol);

}  // namespace ftvs
