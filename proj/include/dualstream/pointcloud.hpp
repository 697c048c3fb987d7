#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "dualstream/geometry.hpp"
#include "dualstream/image.hpp"

namespace dualstream {

struct Point {
  Eigen::Vector3d position;  // meters, anchor frame
  Rgb color;
};

struct PointCloud {
  std::vector<Point> points;
};

// A live video rectangle positioned in 3D: centered on the peer's forward
// axis at `distance`, sized to the peer camera's field of view. Corners are
// ordered TL, TR, BR, BL as seen looking along the peer's +Z.
struct SpatialQuad {
  std::array<Eigen::Vector3d, 4> corners;  // meters, anchor frame
  const ColorFrame* texture = nullptr;     // non-owning; may be null
};

inline constexpr double kDefaultQuadDistance = 1.0;  // meters

// One point per valid (non-zero) depth pixel: unproject through `k`, then
// transform by the camera pose (anchor-relative). Color and depth must have
// equal dimensions (align first if they do not).
PointCloud reconstruct_hologram(const ColorFrame& color, const DepthFrame& depth,
                                const Intrinsics<double>& k, const Posed& camera_pose_anchor_rel);

SpatialQuad make_spatial_quad(const Posed& peer_pose_anchor_rel, const Intrinsics<double>& k,
                              double distance, const ColorFrame* texture = nullptr);

// ASCII PLY: x y z as float properties, red green blue as uchar.
std::string export_ply(const PointCloud& c);

// Root-mean-square pairwise distance between corresponding points (same
// pixel grid). Throws on count mismatch.
double cloud_rmse(const PointCloud& a, const PointCloud& b);

// RMS residual of the best-fit plane (total least squares). Needs >= 3
// points.
double plane_fit_rms(const PointCloud& c);

}  // namespace dualstream
