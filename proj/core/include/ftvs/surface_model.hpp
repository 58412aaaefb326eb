#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "ftvs/types.hpp"

namespace ftvs {

using Face = std::array<int, 3>;

/// Target shape in grapple-frame {C} coordinates (meters).
///
/// Faces are optional; a point-only model registers against its vertices.
/// Counter-clockwise winding (right-handed) defines the outward normal.
class SurfaceModel {
 public:
  /// Throws std::invalid_argument when fewer than four non-coplanar vertices
  /// are given or a face index is out of range.
  SurfaceModel(std::vector<Vec3> vertices, std::vector<Face> faces = {});

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  bool has_faces() const { return !faces_.empty(); }

  /// Unit outward normal and area of face i.
  const Vec3& face_normal(std::size_t i) const { return normals_[i]; }
  double face_area(std::size_t i) const { return areas_[i]; }
  double total_area() const { return total_area_; }

  /// Discretization floor used by the default ICP threshold: zero for
  /// meshed models, mean nearest-neighbour vertex spacing for point models.
  double resolution() const { return resolution_; }

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3> normals_;
  std::vector<double> areas_;
  double total_area_ = 0.0;
  double resolution_ = 0.0;
};

/// Reads the OBJ subset: `v x y z` and `f i j k` lines (1-based indices,
/// optional `/vt/vn` suffixes ignored). Blank lines and `#` comments are
/// skipped; any other record is an error. Throws ConfigError.
SurfaceModel load_obj(const std::string& path);
SurfaceModel parse_obj(std::istream& in, const std::string& origin = "<stream>");
void write_obj(std::ostream& out, const SurfaceModel& model);

/// Built-in asymmetric micro-satellite mock: bus, grapple post at the {C}
/// origin, one solar panel and an antenna mast (~0.3 m across).
SurfaceModel default_mock_satellite();

}  // namespace ftvs
