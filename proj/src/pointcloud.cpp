#include "dualstream/pointcloud.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <cmath>

#include "dualstream/error.hpp"

namespace dualstream {
namespace {

std::string float_repr(float v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

PointCloud reconstruct_hologram(const ColorFrame& color, const DepthFrame& depth,
                                const Intrinsics<double>& k, const Posed& camera_pose_anchor_rel) {
  if (color.width != depth.width || color.height != depth.height) {
    throw ParseError("reconstruct_hologram: color and depth dimensions differ");
  }
  if (!intrinsics_are_valid(k)) {
    throw ParseError("reconstruct_hologram: invalid intrinsics");
  }
  PointCloud cloud;
  cloud.points.reserve(depth.samples.size());
  // Per-point cost matters at video rates: hoist the rotation into a matrix
  // and trade the per-pixel divisions for two cached reciprocals.
  const Eigen::Matrix3d R = camera_pose_anchor_rel.rotation.toRotationMatrix();
  const Eigen::Vector3d t = camera_pose_anchor_rel.translation;
  const double inv_fx = 1.0 / k.fx;
  const double inv_fy = 1.0 / k.fy;
  for (int v = 0; v < depth.height; ++v) {
    const double ry = (v - k.cy) * inv_fy;
    for (int u = 0; u < depth.width; ++u) {
      const uint16_t mm = depth.at(u, v);
      if (mm == 0) continue;
      const double d = mm / 1000.0;
      const Eigen::Vector3d cam((u - k.cx) * inv_fx * d, ry * d, d);
      cloud.points.push_back({R * cam + t, color.at(u, v)});
    }
  }
  return cloud;
}

SpatialQuad make_spatial_quad(const Posed& peer_pose_anchor_rel, const Intrinsics<double>& k,
                              double distance, const ColorFrame* texture) {
  if (!(distance > 0)) throw ParseError("make_spatial_quad: distance must be positive");
  if (!intrinsics_are_valid(k)) throw ParseError("make_spatial_quad: invalid intrinsics");
  const double hw = distance * (k.width / 2.0) / k.fx;
  const double hh = distance * (k.height / 2.0) / k.fy;
  // Camera frame: +Z forward, +Y down, so the image's top edge is -Y.
  const std::array<Eigen::Vector3d, 4> local = {
      Eigen::Vector3d{-hw, -hh, distance},  // TL
      Eigen::Vector3d{hw, -hh, distance},   // TR
      Eigen::Vector3d{hw, hh, distance},    // BR
      Eigen::Vector3d{-hw, hh, distance},   // BL
  };
  SpatialQuad q;
  q.texture = texture;
  for (size_t i = 0; i < 4; ++i) {
    q.corners[i] = transform_point(peer_pose_anchor_rel, local[i]);
  }
  return q;
}

std::string export_ply(const PointCloud& c) {
  std::string out;
  out.reserve(64 + c.points.size() * 32);
  out += "ply\nformat ascii 1.0\nelement vertex " + std::to_string(c.points.size()) +
         "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (const Point& p : c.points) {
    out += float_repr(static_cast<float>(p.position.x()));
    out += ' ';
    out += float_repr(static_cast<float>(p.position.y()));
    out += ' ';
    out += float_repr(static_cast<float>(p.position.z()));
    out += ' ';
    out += std::to_string(p.color.r);
    out += ' ';
    out += std::to_string(p.color.g);
    out += ' ';
    out += std::to_string(p.color.b);
    out += '\n';
  }
  return out;
}

double cloud_rmse(const PointCloud& a, const PointCloud& b) {
  if (a.points.size() != b.points.size()) {
    throw ParseError("cloud_rmse: point count mismatch (" + std::to_string(a.points.size()) +
                     " vs " + std::to_string(b.points.size()) + ")");
  }
  if (a.points.empty()) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < a.points.size(); ++i) {
    sum += (a.points[i].position - b.points[i].position).squaredNorm();
  }
  return std::sqrt(sum / a.points.size());
}

double plane_fit_rms(const PointCloud& c) {
  const size_t n = c.points.size();
  if (n < 3) throw ParseError("plane_fit_rms: need at least 3 points");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const Point& p : c.points) centroid += p.position;
  centroid /= double(n);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Point& p : c.points) {
    const Eigen::Vector3d d = p.position - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const double lambda_min = std::max(0.0, solver.eigenvalues()(0));
  return std::sqrt(lambda_min / double(n));
}

}  // namespace dualstream
