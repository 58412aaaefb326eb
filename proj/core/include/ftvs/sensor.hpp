#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ftvs/rigid_body.hpp"
#include "ftvs/surface_model.hpp"

namespace ftvs {

struct PointCloud {
  std::vector<Vec3> points;  // m, sensor frame {A}
  double timestamp = 0.0;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

/// Synthetic range-sensor settings. The sensor sits at the origin of {A}
/// looking along +z.
struct SensorConfig {
  double rate = 2.0;              // Hz
  double noise_std = 0.002;       // m, per axis
  double outlier_fraction = 0.0;  // [0, 1)
  double outlier_box = 0.5;       // m, half-width of the cube around the target
  int max_points = 200;
  double fov_halfangle = 0.7;     // rad
  bool hidden_surface = true;

  /// Throws ConfigError on rate <= 0 or outlier_fraction outside [0, 1).
  void validate() const;
};

enum class FaultMode { kBlackout, kDegraded };

struct FaultInterval {
  double start = 0.0;
  double end = 0.0;
  FaultMode mode = FaultMode::kBlackout;
  double noise_multiplier = 1.0;  // degraded mode only
};

class FaultSchedule {
 public:
  FaultSchedule() = default;
  /// Throws ConfigError on start >= end or overlapping intervals.
  explicit FaultSchedule(std::vector<FaultInterval> intervals);

  void add(const FaultInterval& interval);
  /// Interval active at t (start <= t < end), if any.
  std::optional<FaultInterval> active(double t) const;
  const std::vector<FaultInterval>& intervals() const { return intervals_; }

 private:
  std::vector<FaultInterval> intervals_;
};

/// Samples the model surface seen from the sensor at `true_pose` (grapple
/// frame {C} in {A}), adds Gaussian noise and uniform outliers, then applies
/// the fault active at time t.
PointCloud render_scan(const SurfaceModel& model, const Pose& true_pose, const SensorConfig& cfg,
                       const FaultSchedule& faults, double t, std::uint64_t rng_seed);

}  // namespace ftvs
