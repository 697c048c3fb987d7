#pragma once

#include <string>
#include <vector>

#include "dualstream/config.hpp"
#include "dualstream/geometry.hpp"
#include "dualstream/image.hpp"

namespace dualstream {

// Built-in synthetic scenes so simulations and benchmarks need no binary
// fixtures. Depth is rendered against the camera intrinsics; rays that miss
// geometry get depth 0 (invalid).
struct SceneSpec {
  enum class Kind { kWall, kRamp, kSphere, kStep } kind = Kind::kWall;
  double depth_m = 1.5;     // wall distance; step left depth
  double max_m = 2.0;       // ramp far end
  double radius_m = 0.3;    // sphere
  double center_m = 1.0;    // sphere center distance
  double step_far_m = 1.5;  // step right depth
};

// name: wall | ramp | sphere | step; args as key=value tokens
// (depth_m, max_m, radius_m, center_m, step_far_m).
SceneSpec scene_from_args(const std::string& name, const std::vector<std::string>& args);

DepthFrame render_scene_depth(const SceneSpec& s, const Intrinsics<double>& k);
// Deterministic gradient texture (u, v ramps + constant blue); content is
// only there to make point clouds inspectable.
ColorFrame render_scene_color(const SceneSpec& s, const Intrinsics<double>& k);

}  // namespace dualstream
