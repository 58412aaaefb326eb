#pragma once

#include <vector>

#include "ftvs/surface_model.hpp"

namespace ftvs {

/// Closest point on a triangle (Ericson, Real-Time Collision Detection §5.1.5).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Nearest-surface queries against a SurfaceModel: triangles when the model
/// has faces, vertices otherwise. Ties resolve to the lowest primitive index,
/// so the accelerated and brute-force paths return identical hits.
class NearestSurface {
 public:
  struct Hit {
    Vec3 point = Vec3::Zero();
    double dist2 = 0.0;
    int primitive = -1;
  };

  explicit NearestSurface(const SurfaceModel& model);

  Hit closest(const Vec3& p) const;
  Hit closest_brute_force(const Vec3& p) const;

  const SurfaceModel& model() const { return model_; }

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1;   // child node, or -1 for a leaf
    int right = -1;
    int begin = 0;   // leaf range into order_
    int end = 0;
  };

  Hit primitive_hit(const Vec3& p, int prim) const;
  int build(int begin, int end);

  SurfaceModel model_;
  int primitive_count_ = 0;
  std::vector<int> order_;
  std::vector<Eigen::AlignedBox3d> prim_boxes_;
  std::vector<Vec3> prim_centres_;
  std::vector<Node> nodes_;
};

}  // namespace ftvs
