#include "dualstream/scenes.hpp"

#include <algorithm>
#include <cmath>

#include "dualstream/error.hpp"

namespace dualstream {

SceneSpec scene_from_args(const std::string& name, const std::vector<std::string>& args) {
  SceneSpec s;
  if (name == "wall") {
    s.kind = SceneSpec::Kind::kWall;
  } else if (name == "ramp") {
    s.kind = SceneSpec::Kind::kRamp;
  } else if (name == "sphere") {
    s.kind = SceneSpec::Kind::kSphere;
  } else if (name == "step") {
    s.kind = SceneSpec::Kind::kStep;
  } else {
    throw ParseError("unknown scene '" + name + "' (expected wall|ramp|sphere|step)");
  }
  std::string joined;
  for (const auto& a : args) {
    joined += a;
    joined += '\n';
  }
  const Config cfg = Config::from_string(joined, "scene args");
  cfg.require_known({"depth_m", "max_m", "radius_m", "center_m", "step_far_m"});
  s.depth_m = cfg.get_double("depth_m", s.depth_m);
  s.max_m = cfg.get_double("max_m", s.max_m);
  s.radius_m = cfg.get_double("radius_m", s.radius_m);
  s.center_m = cfg.get_double("center_m", s.center_m);
  s.step_far_m = cfg.get_double("step_far_m", s.step_far_m);
  if (s.depth_m <= 0 || s.max_m <= 0 || s.radius_m <= 0 || s.center_m <= 0 ||
      s.step_far_m <= 0) {
    throw ParseError("scene distances must be positive");
  }
  return s;
}

namespace {

uint16_t to_mm(double meters) {
  return static_cast<uint16_t>(std::clamp<long>(std::lround(meters * 1000.0), 0, 65535));
}

}  // namespace

DepthFrame render_scene_depth(const SceneSpec& s, const Intrinsics<double>& k) {
  if (!intrinsics_are_valid(k)) throw ParseError("render_scene_depth: invalid intrinsics");
  DepthFrame d;
  d.width = k.width;
  d.height = k.height;
  d.samples.resize(static_cast<size_t>(k.width) * k.height);
  switch (s.kind) {
    case SceneSpec::Kind::kWall: {
      const uint16_t mm = to_mm(s.depth_m);
      std::fill(d.samples.begin(), d.samples.end(), mm);
      break;
    }
    case SceneSpec::Kind::kRamp: {
      for (int v = 0; v < k.height; ++v) {
        for (int u = 0; u < k.width; ++u) {
          const double z = s.max_m * double(u + 1) / k.width;
          d.set(u, v, std::max<uint16_t>(1, to_mm(z)));
        }
      }
      break;
    }
    case SceneSpec::Kind::kSphere: {
      // First ray-sphere hit along each pixel ray; depth is the hit's z.
      for (int v = 0; v < k.height; ++v) {
        for (int u = 0; u < k.width; ++u) {
          const double dx = (u - k.cx) / k.fx;
          const double dy = (v - k.cy) / k.fy;
          const double a = dx * dx + dy * dy + 1.0;
          const double b = -2.0 * s.center_m;  // dir . center, center=(0,0,c)
          const double c = s.center_m * s.center_m - s.radius_m * s.radius_m;
          const double disc = b * b - 4.0 * a * c;
          if (disc < 0) {
            d.set(u, v, 0);
            continue;
          }
          const double t = (-b - std::sqrt(disc)) / (2.0 * a);
          d.set(u, v, t > 0 ? to_mm(t) : 0);
        }
      }
      break;
    }
    case SceneSpec::Kind::kStep: {
      const uint16_t near_mm = to_mm(s.depth_m);
      const uint16_t far_mm = to_mm(s.step_far_m);
      for (int v = 0; v < k.height; ++v) {
        for (int u = 0; u < k.width; ++u) {
          d.set(u, v, u < k.width / 2 ? near_mm : far_mm);
        }
      }
      break;
    }
  }
  return d;
}

ColorFrame render_scene_color(const SceneSpec& s, const Intrinsics<double>& k) {
  if (!intrinsics_are_valid(k)) throw ParseError("render_scene_color: invalid intrinsics");
  (void)s;
  ColorFrame c;
  c.width = k.width;
  c.height = k.height;
  c.pixels.resize(static_cast<size_t>(k.width) * k.height * 3);
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const uint8_t r =
          k.width > 1 ? static_cast<uint8_t>(u * 255 / (k.width - 1)) : uint8_t(0);
      const uint8_t g =
          k.height > 1 ? static_cast<uint8_t>(v * 255 / (k.height - 1)) : uint8_t(0);
      c.set(u, v, {r, g, 200});
    }
  }
  return c;
}

}  // namespace dualstream
