#pragma once

#include "ftvs/types.hpp"

namespace ftvs {

/// Unit quaternion stored scalar-last as [v; s].
///
/// Product convention: (a ⊗ b) = a_s b + Ω(a_v) b with
/// Ω(v) = [[-[v×], v], [-vᵀ, 0]], i.e. vector part a_s b_v + b_s a_v - a_v × b_v.
/// Under this convention rotation_matrix(a ⊗ b) = rotation_matrix(b) * rotation_matrix(a),
/// and rotation_matrix(q) maps body coordinates into the reference frame.
class UnitQuaternion {
 public:
  UnitQuaternion() : v_(Vec3::Zero()), s_(1.0) {}

  /// Normalizes the input; throws std::invalid_argument on zero or non-finite input.
  UnitQuaternion(const Vec3& v, double s);
  static UnitQuaternion from_vec4(const Vec4& xyzw);
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);
  /// Small-rotation quaternion with vector part dv (scalar = sqrt(1-|dv|²)).
  static UnitQuaternion from_error_vector(const Vec3& dv);
  static UnitQuaternion identity() { return {}; }

  const Vec3& vec() const { return v_; }
  double scalar() const { return s_; }
  Vec4 coeffs() const { return {v_.x(), v_.y(), v_.z(), s_}; }

  UnitQuaternion inverse() const;
  /// Returns the same rotation with scalar part >= 0.
  UnitQuaternion canonical() const;
  double angle() const;

 private:
  struct Unchecked {};
  UnitQuaternion(const Vec3& v, double s, Unchecked) : v_(v), s_(s) {}

  Vec3 v_;
  double s_;
};

UnitQuaternion quat_product(const UnitQuaternion& a, const UnitQuaternion& b);
inline UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
  return quat_product(a, b);
}
inline UnitQuaternion quat_inverse(const UnitQuaternion& q) { return q.inverse(); }

/// A(q) = I + 2 s [v×] + 2 [v×]².
Mat3 rotation_matrix(const UnitQuaternion& q);
/// Same as above for a raw [v; s] vector; throws std::invalid_argument when
/// |‖q‖ - 1| > 1e-9.
Mat3 rotation_matrix(const Vec4& xyzw);

/// Quaternion whose rotation_matrix is R (R orthonormal, det +1).
UnitQuaternion quaternion_from_matrix(const Mat3& R);

/// Ω(ω) acting on a 4-vector, as used by q̇ = ½ Ω(ω) q.
Mat4 omega_matrix(const Vec3& w);

/// Rotation angle (rad) of a ⊗ b⁻¹.
double angular_distance(const UnitQuaternion& a, const UnitQuaternion& b);

}  // namespace ftvs
