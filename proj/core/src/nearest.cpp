#include "ftvs/nearest.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Geometry>

namespace ftvs {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

NearestSurface::NearestSurface(const SurfaceModel& model) : model_(model) {
  const auto& v = model_.vertices();
  if (model_.has_faces()) {
    primitive_count_ = static_cast<int>(model_.faces().size());
    for (const Face& f : model_.faces()) {
      Eigen::AlignedBox3d box(v[f[0]]);
      box.extend(v[f[1]]);
      box.extend(v[f[2]]);
      prim_boxes_.push_back(box);
      prim_centres_.push_back(box.center());
    }
  } else {
    primitive_count_ = static_cast<int>(v.size());
    for (const Vec3& p : v) {
      prim_boxes_.emplace_back(p);
      prim_centres_.push_back(p);
    }
  }
  order_.resize(primitive_count_);
  for (int i = 0; i < primitive_count_; ++i) order_[i] = i;
  nodes_.reserve(2 * primitive_count_);
  build(0, primitive_count_);
}

int NearestSurface::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Eigen::AlignedBox3d box;
  for (int i = begin; i < end; ++i) box.extend(prim_boxes_[order_[i]]);
  nodes_[id].box = box;
  if (end - begin <= 4) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  int axis = 0;
  box.sizes().maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double ca = prim_centres_[a](axis);
                     const double cb = prim_centres_[b](axis);
                     return ca < cb || (ca == cb && a < b);
                   });
  const int l = build(begin, mid);
  const int r = build(mid, end);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

NearestSurface::Hit NearestSurface::primitive_hit(const Vec3& p, int prim) const {
  Hit h;
  h.primitive = prim;
  if (model_.has_faces()) {
    const Face& f = model_.faces()[prim];
    const auto& v = model_.vertices();
    h.point = closest_point_on_triangle(p, v[f[0]], v[f[1]], v[f[2]]);
  } else {
    h.point = model_.vertices()[prim];
  }
  h.dist2 = (h.point - p).squaredNorm();
  return h;
}

namespace {
bool better(const NearestSurface::Hit& a, const NearestSurface::Hit& best) {
  return a.dist2 < best.dist2 || (a.dist2 == best.dist2 && a.primitive < best.primitive);
}
}  // namespace

NearestSurface::Hit NearestSurface::closest_brute_force(const Vec3& p) const {
  Hit best;
  best.dist2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < primitive_count_; ++i) {
    const Hit h = primitive_hit(p, i);
    if (better(h, best)) best = h;
  }
  return best;
}

NearestSurface::Hit NearestSurface::closest(const Vec3& p) const {
  Hit best;
  best.dist2 = std::numeric_limits<double>::infinity();
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    // Strict comparison keeps equal-distance candidates for the index tie-break.
    if (n.box.squaredExteriorDistance(p) > best.dist2) continue;
    if (n.left < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const Hit h = primitive_hit(p, order_[i]);
        if (better(h, best)) best = h;
      }
      continue;
    }
    const double dl = nodes_[n.left].box.squaredExteriorDistance(p);
    const double dr = nodes_[n.right].box.squaredExteriorDistance(p);
    if (dl <= dr) {
      stack[top++] = n.right;
      stack[top++] = n.left;
    } else {
      stack[top++] = n.left;
      stack[top++] = n.right;
    }
  }
  return best;
}

}  // namespace ftvs
