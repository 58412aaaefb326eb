#include "ftvs/icp.hpp"

#include <algorithm>
#include <cmath>

namespace ftvs {

IcpConfig IcpConfig::defaults_for(const SensorConfig& sensor, const SurfaceModel& model) {
  IcpConfig c;
  const double res = model.resolution();
  c.eps_threshold = std::max(1e-8, 3.0 * (sensor.noise_std * sensor.noise_std + res * res));
  c.cutoff_scale = 3.0;
  c.cutoff_floor = std::max(5.0 * sensor.noise_std, 1e-3);
  return c;
}

Pose initial_pose_from_prediction(const TargetState& prior) {
  return {prior.body.rho_o + rotation_matrix(prior.body.q) * prior.varrho,
          quat_product(prior.mu, prior.body.q)};
}

std::vector<Correspondence> find_correspondences(const PointCloud& cloud,
                                                 const NearestSurface& model, const Pose& pose,
                                                 double cutoff) {
  const Mat3 At = rotation_matrix(pose.attitude).transpose();
  const double cutoff2 = cutoff * cutoff;
  std::vector<Correspondence> out;
  out.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 local = At * (cloud.points[i] - pose.position);
    const auto hit = model.closest(local);
    if (hit.dist2 > cutoff2) continue;
    out.push_back({static_cast<int>(i), hit.point, std::sqrt(hit.dist2)});
  }
  if (out.empty()) throw EmptyCorrespondence("find_correspondences: every pair beyond cutoff");
  return out;
}

SymmetricEigen4 jacobi_eigen4(const Mat4& m_in) {
  Mat4 a = 0.5 * (m_in + m_in.transpose());
  Mat4 v = Mat4::Identity();
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 4; ++p)
      for (int q = p + 1; q < 4; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-17 * scale) break;
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 4; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < 4; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
  SymmetricEigen4 out;
  for (int i = 0; i < 4; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

namespace {

void centroids(const std::vector<Vec3>& c, const std::vector<Vec3>& d, Vec3& c0, Vec3& d0) {
  c0.setZero();
  d0.setZero();
  for (std::size_t i = 0; i < c.size(); ++i) {
    c0 += c[i];
    d0 += d[i];
  }
  c0 /= static_cast<double>(c.size());
  d0 /= static_cast<double>(d.size());
}

}  // namespace

Mat4 horn_matrix(const std::vector<Vec3>& cloud, const std::vector<Vec3>& model) {
  Vec3 c0, d0;
  centroids(cloud, model, c0, d0);
  // Source = model points, target = cloud points.
  Mat3 N = Mat3::Zero();
  for (std::size_t i = 0; i < cloud.size(); ++i) N += (model[i] - d0) * (cloud[i] - c0).transpose();
  N /= static_cast<double>(cloud.size());
  const Vec3 n(N(1, 2) - N(2, 1), N(2, 0) - N(0, 2), N(0, 1) - N(1, 0));
  Mat4 M;
  M(0, 0) = N.trace();
  M.block<1, 3>(0, 1) = n.transpose();
  M.block<3, 1>(1, 0) = n;
  M.block<3, 3>(1, 1) = N + N.transpose() - N.trace() * Mat3::Identity();
  return M;
}

double alignment_error(const Pose& pose, const std::vector<Vec3>& cloud,
                       const std::vector<Vec3>& model) {
  const Mat3 A = rotation_matrix(pose.attitude);
  double sum = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    sum += (A * model[i] + pose.position - cloud[i]).squaredNorm();
  }
  return sum / static_cast<double>(cloud.size());
}

Alignment horn_align(const std::vector<Vec3>& cloud, const std::vector<Vec3>& model) {
  if (cloud.size() != model.size()) throw std::invalid_argument("horn_align: size mismatch");
  if (cloud.size() < 3) throw DegenerateAlignment("horn_align: need at least three pairs");
  const Mat4 M = horn_matrix(cloud, model);
  const SymmetricEigen4 es = jacobi_eigen4(M);
  const double gap = es.values(3) - es.values(2);
  const double scale = std::max(es.values.cwiseAbs().maxCoeff(), 1e-300);
  if (!(gap > 1e-12 * scale)) throw DegenerateAlignment("horn_align: top eigenvalue is not simple");

  const Vec4 e = es.vectors.col(3);  // [s, v]
  Alignment out;
  out.pose.attitude = UnitQuaternion(e.tail<3>(), e(0)).canonical();
  Vec3 c0, d0;
  centroids(cloud, model, c0, d0);
  out.pose.position = c0 - rotation_matrix(out.pose.attitude) * d0;
  out.fit_error = alignment_error(out.pose, cloud, model);
  return out;
}

Alignment horn_align(const PointCloud& cloud, const std::vector<Correspondence>& pairs) {
  std::vector<Vec3> c, d;
  c.reserve(pairs.size());
  d.reserve(pairs.size());
  for (const auto& p : pairs) {
    c.push_back(cloud.points[p.cloud_index]);
    d.push_back(p.model_point);
  }
  return horn_align(c, d);
}

RegistrationResult icp_register(const PointCloud& cloud, const NearestSurface& model,
                                const Pose& initial, const IcpConfig& cfg) {
  RegistrationResult res;
  res.rho_bar = initial.position;
  res.eta_bar = initial.attitude;
  if (cloud.empty()) {
    res.status = RegistrationStatus::kEmptyCloud;
    return res;
  }
  Pose pose = initial;
  double cutoff = cfg.correspondence_cutoff;
  for (int n = 1; n <= cfg.max_iterations; ++n) {
    Alignment al;
    try {
      const auto pairs = find_correspondences(cloud, model, pose, cutoff);
      al = horn_align(cloud, pairs);
    } catch (const EmptyCorrespondence&) {
      res.status = RegistrationStatus::kEmptyCorrespondence;
      res.fit_error = std::numeric_limits<double>::infinity();
      res.healthy = false;
      return res;
    } catch (const DegenerateAlignment&) {
      res.status = RegistrationStatus::kDegenerate;
      res.fit_error = std::numeric_limits<double>::infinity();
      res.healthy = false;
      return res;
    }
    const double dpos = (al.pose.position - pose.position).norm();
    const double dang = angular_distance(al.pose.attitude, pose.attitude);
    pose = al.pose;
    res.iterations = n;
    res.fit_error = al.fit_error;
    res.error_history.push_back(al.fit_error);
    if (cfg.cutoff_scale > 0.0) {
      cutoff = std::min(cfg.correspondence_cutoff,
                        std::max(cfg.cutoff_floor, cfg.cutoff_scale * std::sqrt(al.fit_error)));
    }
    if (al.fit_error < cfg.eps_threshold && dpos < cfg.convergence_tol &&
        dang < cfg.convergence_tol) {
      break;
    }
  }
  res.rho_bar = pose.position;
  res.eta_bar = pose.attitude;
  res.healthy = res.fit_error < cfg.eps_threshold && res.iterations <= cfg.max_iterations;
  return res;
}

}  // namespace ftvs
