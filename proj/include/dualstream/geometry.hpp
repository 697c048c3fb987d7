#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include "dualstream/hash.hpp"

// Pose algebra, the shared anchor frame and the pinhole model.
//
// Conventions (see docs/coordinate-frames.md):
//   - right-handed frames, camera looks along +Z, +X right, +Y down
//     (image v grows downward);
//   - quaternions are unit, (w, x, y, z) component order on the wire;
//   - angles are degrees at API boundaries, radians internally;
//   - all wire poses are anchor-relative. Each peer places its own anchor;
//     re-positioning the anchor is a purely local operation.

namespace dualstream {

template <typename Scalar>
struct Pose {
  Eigen::Matrix<Scalar, 3, 1> translation = Eigen::Matrix<Scalar, 3, 1>::Zero();
  Eigen::Quaternion<Scalar> rotation = Eigen::Quaternion<Scalar>::Identity();
};

using Posed = Pose<double>;
using Posef = Pose<float>;

template <typename Scalar>
Pose<Scalar> make_pose(const Eigen::Matrix<Scalar, 3, 1>& t, const Eigen::Quaternion<Scalar>& q) {
  return Pose<Scalar>{t, q.normalized()};
}

template <typename Scalar>
Pose<Scalar> make_translation(Scalar x, Scalar y, Scalar z) {
  return Pose<Scalar>{{x, y, z}, Eigen::Quaternion<Scalar>::Identity()};
}

template <typename Scalar>
bool pose_is_valid(const Pose<Scalar>& p, Scalar tol = Scalar(1e-6)) {
  return p.translation.allFinite() && p.rotation.coeffs().allFinite() &&
         std::abs(p.rotation.norm() - Scalar(1)) <= tol;
}

// Rigid composition a∘b: apply b first, then a.
template <typename Scalar>
Pose<Scalar> compose(const Pose<Scalar>& a, const Pose<Scalar>& b) {
  Pose<Scalar> out;
  out.rotation = (a.rotation * b.rotation).normalized();
  out.translation = a.translation + a.rotation * b.translation;
  return out;
}

template <typename Scalar>
Pose<Scalar> invert(const Pose<Scalar>& a) {
  Pose<Scalar> out;
  out.rotation = a.rotation.conjugate().normalized();
  out.translation = -(out.rotation * a.translation);
  return out;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> transform_point(const Pose<Scalar>& p,
                                            const Eigen::Matrix<Scalar, 3, 1>& x) {
  return p.rotation * x + p.translation;
}

template <typename Scalar>
bool approx_equal(const Pose<Scalar>& a, const Pose<Scalar>& b, Scalar tol = Scalar(1e-6)) {
  // q and -q are the same rotation.
  const Scalar qd = std::min((a.rotation.coeffs() - b.rotation.coeffs()).norm(),
                             (a.rotation.coeffs() + b.rotation.coeffs()).norm());
  return (a.translation - b.translation).norm() <= tol && qd <= tol;
}

// Pose of a peer's anchor object in that peer's local tracking frame.
template <typename Scalar>
struct AnchorFrame {
  Pose<Scalar> local_anchor_pose;
};

using AnchorFramed = AnchorFrame<double>;

// Local device pose -> anchor-relative pose (the wire representation).
template <typename Scalar>
Pose<Scalar> to_anchor_frame(const Pose<Scalar>& device_pose_local, const AnchorFrame<Scalar>& anchor) {
  return compose(invert(anchor.local_anchor_pose), device_pose_local);
}

// Anchor-relative pose -> this peer's local frame.
template <typename Scalar>
Pose<Scalar> from_anchor_frame(const Pose<Scalar>& pose_anchor_rel, const AnchorFrame<Scalar>& anchor) {
  return compose(anchor.local_anchor_pose, pose_anchor_rel);
}

template <typename Scalar>
struct Intrinsics {
  Scalar fx = 0;
  Scalar fy = 0;
  Scalar cx = 0;
  Scalar cy = 0;
  int width = 0;
  int height = 0;
};

using Intrinsicsd = Intrinsics<double>;

template <typename Scalar>
bool intrinsics_are_valid(const Intrinsics<Scalar>& k) {
  return k.fx > 0 && k.fy > 0 && k.width > 0 && k.height > 0 && k.cx >= 0 &&
         k.cx < Scalar(k.width) && k.cy >= 0 && k.cy < Scalar(k.height);
}

// Pixel (u, v) at metric depth -> point in the camera frame.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> unproject(Scalar u, Scalar v, Scalar depth, const Intrinsics<Scalar>& k) {
  if (!(depth > Scalar(0))) {
    throw std::invalid_argument("unproject: depth must be positive");
  }
  return {(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth};
}

template <typename Scalar>
Intrinsics<Scalar> intrinsics_from_fov(Scalar hfov_deg, Scalar vfov_deg, int width, int height) {
  if (!(hfov_deg > 0 && hfov_deg < 180 && vfov_deg > 0 && vfov_deg < 180)) {
    throw std::invalid_argument("intrinsics_from_fov: fov must be in (0, 180) degrees");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("intrinsics_from_fov: non-positive image size");
  }
  constexpr Scalar deg2rad = std::numbers::pi_v<Scalar> / Scalar(180);
  Intrinsics<Scalar> k;
  k.width = width;
  k.height = height;
  k.cx = Scalar(width) / Scalar(2);
  k.cy = Scalar(height) / Scalar(2);
  k.fx = (Scalar(width) / Scalar(2)) / std::tan(hfov_deg * deg2rad / Scalar(2));
  k.fy = (Scalar(height) / Scalar(2)) / std::tan(vfov_deg * deg2rad / Scalar(2));
  return k;
}

// Digest carried by snapshot messages so receivers can check which camera
// model a capture refers to. Hashes the double bit patterns.
template <typename Scalar>
uint64_t intrinsics_digest(const Intrinsics<Scalar>& k) {
  uint64_t h = kFnvOffset;
  const auto mix64 = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= kFnvPrime;
    }
  };
  const auto mixd = [&](double d) {
    uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    mix64(bits);
  };
  mixd(static_cast<double>(k.fx));
  mixd(static_cast<double>(k.fy));
  mixd(static_cast<double>(k.cx));
  mixd(static_cast<double>(k.cy));
  mix64(static_cast<uint64_t>(k.width));
  mix64(static_cast<uint64_t>(k.height));
  return h;
}

}  // namespace dualstream
