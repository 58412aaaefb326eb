#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ftvs {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Error-state dimension: [dq_v, omega, rho_o, rho_o_dot, sigma, varrho, dmu_v].
inline constexpr int kStateDim = 20;
inline constexpr int kNoiseDim = 6;
inline constexpr int kMeasDim = 6;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;
using NoiseMat = Eigen::Matrix<double, kStateDim, kNoiseDim>;
using MeasMat = Eigen::Matrix<double, kMeasDim, kStateDim>;

/// Offsets of each block inside the error-state vector.
namespace idx {
inline constexpr int kAtt = 0;
inline constexpr int kOmega = 3;
inline constexpr int kPos = 6;
inline constexpr int kVel = 9;
inline constexpr int kSigma = 12;
inline constexpr int kVarrho = 14;
inline constexpr int kMu = 17;
}  // namespace idx

/// A denominator or conditioning check failed inside an otherwise valid domain.
class NumericDegenerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario or configuration input could not be parsed or validated.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

}  // namespace ftvs
