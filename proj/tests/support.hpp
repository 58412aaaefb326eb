#pragma once

#include <deque>
#include <random>
#include <vector>

#include "ftvs/estimator.hpp"
#include "ftvs/rigid_body.hpp"
#include "ftvs/scenario.hpp"

namespace ftvs::test {

UnitQuaternion random_quaternion(std::mt19937_64& rng);
/// Positive moments satisfying the triangle inequalities.
Inertia random_inertia(std::mt19937_64& rng);
/// Random target state with |ω| ≲ 0.5 rad/s and parameters inside the box.
TargetState random_state(std::mt19937_64& rng);

/// Central-difference error-state Jacobians, built without jacobian_F/G/H.
/// F column i is d/dt of the error after perturbing component i, from
/// symmetric-in-time RK4 propagation of perturbed and nominal states.
StateMat finite_difference_F(const TargetState& x, double eps = 1e-5, double h = 1e-4);
NoiseMat finite_difference_G(const TargetState& x, double eps = 1e-3);
MeasMat finite_difference_H(const TargetState& x, double eps = 1e-6);

/// Batch residual average over the most recent min(n, w) residuals.
MeasCov batch_window_average(const std::vector<MeasVec>& residuals, std::size_t n, int window);

/// Σ over m pairs of ‖A(q)·model + ρ − cloud‖² / m with ρ optimal for q.
double best_translation_objective(const UnitQuaternion& q, const std::vector<Vec3>& cloud,
                                  const std::vector<Vec3>& model);

/// Rigid transform applied to points: A(q)·p + t.
std::vector<Vec3> transform_points(const std::vector<Vec3>& pts, const UnitQuaternion& q,
                                   const Vec3& t);

/// Pose with an exact `angle` rotation about a random axis and a translation
/// of length `offset` in a random direction, composed onto `pose`.
Pose perturb_pose(const Pose& pose, double angle, double offset, std::mt19937_64& rng);

/// Scenario with every noise source, fault and blackout removed.
ScenarioConfig ideal_scenario();

}  // namespace ftvs::test
