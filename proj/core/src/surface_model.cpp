#include "ftvs/surface_model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace ftvs {

SurfaceModel::SurfaceModel(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  if (vertices_.size() < 4) {
    throw std::invalid_argument("SurfaceModel: need at least 4 vertices");
  }
  for (const Vec3& v : vertices_) {
    if (!v.allFinite()) throw std::invalid_argument("SurfaceModel: non-finite vertex");
  }
  Vec3 c = Vec3::Zero();
  for (const Vec3& v : vertices_) c += v;
  c /= static_cast<double>(vertices_.size());
  Mat3 scatter = Mat3::Zero();
  for (const Vec3& v : vertices_) scatter += (v - c) * (v - c).transpose();
  const Eigen::SelfAdjointEigenSolver<Mat3> es(scatter);
  if (es.eigenvalues()(0) <= 1e-12 * std::max(1.0, es.eigenvalues()(2))) {
    throw std::invalid_argument("SurfaceModel: vertices are coplanar");
  }

  const int n = static_cast<int>(vertices_.size());
  normals_.reserve(faces_.size());
  areas_.reserve(faces_.size());
  for (const Face& f : faces_) {
    for (int i : f) {
      if (i < 0 || i >= n) throw std::invalid_argument("SurfaceModel: face index out of range");
    }
    const Vec3 cr = (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]);
    const double twice_area = cr.norm();
    areas_.push_back(0.5 * twice_area);
    normals_.push_back(twice_area > 0.0 ? Vec3(cr / twice_area) : Vec3::Zero());
    total_area_ += 0.5 * twice_area;
  }

  if (faces_.empty()) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        if (i != j) best = std::min(best, (vertices_[i] - vertices_[j]).norm());
      }
      sum += best;
    }
    resolution_ = sum / n;
  }
}

SurfaceModel parse_obj(std::istream& in, const std::string& origin) {
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) fail("malformed vertex");
      verts.emplace_back(x, y, z);
    } else if (tag == "f") {
      Face f{};
      for (int k = 0; k < 3; ++k) {
        std::string tok;
        if (!(ls >> tok)) fail("face needs three indices");
        const std::string head = tok.substr(0, tok.find('/'));
        try {
          f[k] = std::stoi(head) - 1;
        } catch (const std::exception&) {
          fail("bad face index '" + tok + "'");
        }
      }
      std::string extra;
      if (ls >> extra) fail("only triangular faces are supported");
      faces.push_back(f);
    } else {
      fail("unsupported record '" + tag + "'");
    }
  }
  try {
    return SurfaceModel(std::move(verts), std::move(faces));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

SurfaceModel load_obj(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open model file: " + path);
  return parse_obj(f, path);
}

void write_obj(std::ostream& out, const SurfaceModel& model) {
  out.precision(17);
  for (const Vec3& v : model.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Face& f : model.faces()) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

namespace {

// Side bits for add_box: faces listed here are left out (they touch another part).
enum Side : unsigned { kNegX = 1, kPosX = 2, kNegY = 4, kPosY = 8, kNegZ = 16, kPosZ = 32 };

void add_box(std::vector<Vec3>& v, std::vector<Face>& f, const Vec3& lo, const Vec3& hi,
             unsigned skip = 0) {
  const int b = static_cast<int>(v.size());
  for (int i = 0; i < 8; ++i) {
    v.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
  }
  // Corner index = x + 2y + 4z; quads wound counter-clockwise seen from outside.
  struct Quad { unsigned side; int a, b, c, d; };
  const Quad quads[] = {
      {kNegX, 0, 4, 6, 2}, {kPosX, 1, 3, 7, 5}, {kNegY, 0, 1, 5, 4},
      {kPosY, 2, 6, 7, 3}, {kNegZ, 0, 2, 3, 1}, {kPosZ, 4, 5, 7, 6},
  };
  for (const Quad& q : quads) {
    if (skip & q.side) continue;
    f.push_back({b + q.a, b + q.b, b + q.c});
    f.push_back({b + q.a, b + q.c, b + q.d});
  }
}

}  // namespace

SurfaceModel default_mock_satellite() {
  std::vector<Vec3> v;
  std::vector<Face> f;
  // Bus, roughly centred on the CoM (grapple offset ≈ [-0.15, 0.03, -0.05]).
  add_box(v, f, {0.03, -0.13, -0.03}, {0.27, 0.07, 0.13});
  // Grapple post around the {C} origin.
  add_box(v, f, {-0.02, -0.015, -0.015}, {0.03, 0.015, 0.015}, kPosX);
  // Folded solar array on +y.
  add_box(v, f, {0.10, 0.07, 0.005}, {0.22, 0.27, 0.055}, kNegY);
  // Antenna mast on top, off-centre.
  add_box(v, f, {0.20, -0.10, 0.13}, {0.24, -0.06, 0.20}, kNegZ);
  return SurfaceModel(std::move(v), std::move(f));
}

}  // namespace ftvs
