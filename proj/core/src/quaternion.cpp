#include "ftvs/quaternion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ftvs {

UnitQuaternion::UnitQuaternion(const Vec3& v, double s) {
  const double n = std::sqrt(v.squaredNorm() + s * s);
  if (!std::isfinite(n) || n <= 0.0) {
    throw std::invalid_argument("UnitQuaternion: zero or non-finite input");
  }
  v_ = v / n;
  s_ = s / n;
}

UnitQuaternion UnitQuaternion::from_vec4(const Vec4& xyzw) {
  return {xyzw.head<3>(), xyzw(3)};
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n <= 0.0) return {};
  return {axis / n * std::sin(0.5 * angle), std::cos(0.5 * angle)};
}

UnitQuaternion UnitQuaternion::from_error_vector(const Vec3& dv) {
  const double sq = dv.squaredNorm();
  if (sq >= 1.0) return {dv, 0.0};
  return {dv, std::sqrt(1.0 - sq)};
}

UnitQuaternion UnitQuaternion::inverse() const { return {-v_, s_, Unchecked{}}; }

UnitQuaternion UnitQuaternion::canonical() const {
  if (s_ < 0.0) return {-v_, -s_, Unchecked{}};
  return *this;
}

double UnitQuaternion::angle() const {
  return 2.0 * std::atan2(v_.norm(), std::abs(s_));
}

UnitQuaternion quat_product(const UnitQuaternion& a, const UnitQuaternion& b) {
  const Vec3& av = a.vec();
  const Vec3& bv = b.vec();
  const Vec3 v = a.scalar() * bv + b.scalar() * av - av.cross(bv);
  const double s = a.scalar() * b.scalar() - av.dot(bv);
  return {v, s};
}

Mat3 rotation_matrix(const UnitQuaternion& q) {
  const Mat3 vx = skew(q.vec());
  return Mat3::Identity() + 2.0 * q.scalar() * vx + 2.0 * vx * vx;
}

Mat3 rotation_matrix(const Vec4& xyzw) {
  if (!xyzw.allFinite() || std::abs(xyzw.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("rotation_matrix: quaternion is not normalized");
  }
  const Mat3 vx = skew(xyzw.head<3>());
  return Mat3::Identity() + 2.0 * xyzw(3) * vx + 2.0 * vx * vx;
}

UnitQuaternion quaternion_from_matrix(const Mat3& R) {
  // Shepperd's method on A = I + 2s[v×] + 2[v×]²; A(2,1) - A(1,2) = 4 s v_x.
  const double tr = R.trace();
  Vec3 v;
  double s = 0.0;
  if (tr > R(0, 0) && tr > R(1, 1) && tr > R(2, 2)) {
    s = 0.5 * std::sqrt(std::max(0.0, 1.0 + tr));
    const double k = 0.25 / s;
    v = Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1)) * k;
  } else {
    int i = 0;
    if (R(1, 1) > R(i, i)) i = 1;
    if (R(2, 2) > R(i, i)) i = 2;
    const int j = (i + 1) % 3;
    const int k3 = (i + 2) % 3;
    v(i) = 0.5 * std::sqrt(std::max(0.0, 1.0 + R(i, i) - R(j, j) - R(k3, k3)));
    const double k = 0.25 / v(i);
    v(j) = (R(j, i) + R(i, j)) * k;
    v(k3) = (R(k3, i) + R(i, k3)) * k;
    s = (R(k3, j) - R(j, k3)) * k;
  }
  return UnitQuaternion(v, s).canonical();
}

Mat4 omega_matrix(const Vec3& w) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = -skew(w);
  m.topRightCorner<3, 1>() = w;
  m.bottomLeftCorner<1, 3>() = -w.transpose();
  return m;
}

double angular_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
  return quat_product(a, b.inverse()).angle();
}

}  // namespace ftvs
