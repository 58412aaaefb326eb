#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "ftvs/nearest.hpp"
#include "ftvs/rigid_body.hpp"
#include "ftvs/sensor.hpp"

namespace ftvs {

class EmptyCorrespondence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateAlignment : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IcpConfig {
  double eps_threshold = 1.2e-5;        // m², ε_th
  int max_iterations = 200;             // n_max
  double correspondence_cutoff = 0.05;  // m
  double convergence_tol = 1e-6;        // m and rad, pose increment between iterations
  /// When positive, the cutoff for iteration n+1 shrinks to cutoff_scale · sqrt(ε⁽ⁿ⁾),
  /// bounded below by cutoff_floor and above by correspondence_cutoff.
  double cutoff_scale = 0.0;
  double cutoff_floor = 0.0;  // m

  /// ε_th = 3 (σ_noise² + resolution²), floored at 1e-8 m²; adaptive cutoff at
  /// 3 RMS with a floor of max(5 σ_noise, 1 mm).
  static IcpConfig defaults_for(const SensorConfig& sensor, const SurfaceModel& model);
};

enum class RegistrationStatus { kOk, kEmptyCloud, kEmptyCorrespondence, kDegenerate };

struct RegistrationResult {
  Vec3 rho_bar = Vec3::Zero();   // grapple-frame position in {A}
  UnitQuaternion eta_bar;        // grapple-frame attitude in {A}
  double fit_error = std::numeric_limits<double>::infinity();  // ε, m²
  int iterations = 0;
  bool healthy = false;          // γ from the registration alone
  RegistrationStatus status = RegistrationStatus::kOk;
  std::vector<double> error_history;

  Pose pose() const { return {rho_bar, eta_bar}; }
  /// A pose exists (the loop ran and produced an alignment).
  bool has_pose() const { return status == RegistrationStatus::kOk; }
};

struct Correspondence {
  int cloud_index = 0;
  Vec3 model_point = Vec3::Zero();  // {C} coordinates
  double distance = 0.0;
};

struct Alignment {
  Pose pose;           // maps model points onto cloud points
  double fit_error = 0.0;
};

/// Coarse alignment from the filter prior: η⁽⁰⁾ = μ̂ ⊗ q̂, ρ⁽⁰⁾ = ρ̂_o + A(q̂)ϱ̂.
Pose initial_pose_from_prediction(const TargetState& prior);

/// Pairs every cloud point with its nearest model point under `pose`; pairs
/// farther than `cutoff` are dropped. Output is ordered by cloud index.
/// Throws EmptyCorrespondence when nothing survives.
std::vector<Correspondence> find_correspondences(const PointCloud& cloud,
                                                 const NearestSurface& model, const Pose& pose,
                                                 double cutoff);

/// Closed-form least-squares rigid alignment (unit-quaternion method) of
/// model points onto cloud points. The returned attitude has scalar part >= 0.
/// Throws DegenerateAlignment for fewer than three pairs or a repeated top
/// eigenvalue.
Alignment horn_align(const std::vector<Vec3>& cloud_points, const std::vector<Vec3>& model_points);
Alignment horn_align(const PointCloud& cloud, const std::vector<Correspondence>& pairs);

/// The symmetric 4×4 matrix whose top eigenvector is the optimal attitude,
/// ordered [scalar, vector].
Mat4 horn_matrix(const std::vector<Vec3>& cloud_points, const std::vector<Vec3>& model_points);

struct SymmetricEigen4 {
  Vec4 values;   // ascending
  Mat4 vectors;  // column i pairs with values(i)
};
/// Cyclic Jacobi eigen-decomposition of a symmetric 4×4 matrix.
SymmetricEigen4 jacobi_eigen4(const Mat4& m);

/// Mean squared residual of A(pose)·model + ρ − cloud over the pairs.
double alignment_error(const Pose& pose, const std::vector<Vec3>& cloud_points,
                       const std::vector<Vec3>& model_points);

/// Prediction-seeded ICP. Never throws: failures are encoded in the result.
RegistrationResult icp_register(const PointCloud& cloud, const NearestSurface& model,
                                const Pose& initial, const IcpConfig& cfg);

}  // namespace ftvs
