#include "ftvs/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ftvs {

void SensorConfig::validate() const {
  if (!(rate > 0.0)) throw ConfigError("sensor.rate must be positive");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw ConfigError("sensor.outlier_fraction must lie in [0, 1)");
  }
  if (noise_std < 0.0) throw ConfigError("sensor.noise_std must be non-negative");
  if (max_points <= 0) throw ConfigError("sensor.max_points must be positive");
  if (!(fov_halfangle > 0.0)) throw ConfigError("sensor.fov_halfangle must be positive");
}

FaultSchedule::FaultSchedule(std::vector<FaultInterval> intervals) {
  for (const auto& i : intervals) add(i);
}

void FaultSchedule::add(const FaultInterval& in) {
  if (!(in.start < in.end)) throw ConfigError("fault interval needs start < end");
  for (const auto& o : intervals_) {
    if (in.start < o.end && o.start < in.end) throw ConfigError("fault intervals overlap");
  }
  intervals_.push_back(in);
  std::sort(intervals_.begin(), intervals_.end(),
            [](const FaultInterval& a, const FaultInterval& b) { return a.start < b.start; });
}

std::optional<FaultInterval> FaultSchedule::active(double t) const {
  for (const auto& i : intervals_) {
    if (t >= i.start && t < i.end) return i;
  }
  return std::nullopt;
}

PointCloud render_scan(const SurfaceModel& model, const Pose& pose, const SensorConfig& cfg,
                       const FaultSchedule& faults, double t, std::uint64_t rng_seed) {
  PointCloud cloud;
  cloud.timestamp = t;
  const auto fault = faults.active(t);
  if (fault && fault->mode == FaultMode::kBlackout) return cloud;
  const double noise_std =
      cfg.noise_std * (fault && fault->mode == FaultMode::kDegraded ? fault->noise_multiplier : 1.0);

  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);

  const Mat3 A = rotation_matrix(pose.attitude);
  const double cos_fov = std::cos(cfg.fov_halfangle);
  const auto max_points = static_cast<std::size_t>(cfg.max_points);
  auto in_fov = [&](const Vec3& p) {
    const double n = p.norm();
    return n > 0.0 && p.z() / n >= cos_fov;
  };

  std::vector<Vec3>& pts = cloud.points;
  pts.reserve(max_points);
  if (model.has_faces()) {
    std::vector<double> cdf;
    cdf.reserve(model.faces().size());
    double acc = 0.0;
    for (std::size_t i = 0; i < model.faces().size(); ++i) {
      acc += model.face_area(i);
      cdf.push_back(acc);
    }
    const std::size_t candidates = 4 * max_points;
    for (std::size_t c = 0; c < candidates && pts.size() < max_points; ++c) {
      const double pick = u01(rng) * acc;
      const auto fi = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(std::lower_bound(cdf.begin(), cdf.end(), pick) - cdf.begin(),
                                   static_cast<std::ptrdiff_t>(cdf.size()) - 1));
      double a = u01(rng);
      double b = u01(rng);
      if (a + b > 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
      }
      const Face& f = model.faces()[fi];
      const Vec3& v0 = model.vertices()[f[0]];
      const Vec3 local = v0 + a * (model.vertices()[f[1]] - v0) + b * (model.vertices()[f[2]] - v0);
      const Vec3 p = A * local + pose.position;
      if (cfg.hidden_surface && (A * model.face_normal(fi)).dot(p) >= 0.0) continue;
      if (!in_fov(p)) continue;
      pts.push_back(p);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, model.vertices().size() - 1);
    const std::size_t candidates = 4 * max_points;
    for (std::size_t c = 0; c < candidates && pts.size() < max_points; ++c) {
      const Vec3 p = A * model.vertices()[pick(rng)] + pose.position;
      if (in_fov(p)) pts.push_back(p);
    }
  }

  if (noise_std > 0.0) {
    for (Vec3& p : pts) {
      for (int k = 0; k < 3; ++k) p(k) += noise_std * n01(rng);
    }
  }

  if (cfg.outlier_fraction > 0.0 && !pts.empty()) {
    const auto n_out = static_cast<std::size_t>(std::lround(cfg.outlier_fraction * pts.size()));
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Partial Fisher-Yates: the first n_out slots become outliers.
    for (std::size_t i = 0; i < n_out; ++i) {
      std::uniform_int_distribution<std::size_t> j(i, order.size() - 1);
      std::swap(order[i], order[j(rng)]);
      Vec3 offset;
      for (int k = 0; k < 3; ++k) offset(k) = 2.0 * u01(rng) - 1.0;
      pts[order[i]] = pose.position + cfg.outlier_box * offset;
    }
  }
  return cloud;
}

}  // namespace ftvs
