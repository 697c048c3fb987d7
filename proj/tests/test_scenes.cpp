#include <doctest.h>

#include <set>

#include "dualstream/error.hpp"
#include "dualstream/scenes.hpp"

using namespace dualstream;

namespace {

const Intrinsics<double> kCam = intrinsics_from_fov<double>(69.0, 42.0, 64, 48);

}  // namespace

TEST_CASE("scene args parse with defaults and validation") {
  const SceneSpec wall = scene_from_args("wall", {"depth_m=1.2"});
  CHECK(wall.kind == SceneSpec::Kind::kWall);
  CHECK(wall.depth_m == 1.2);
  CHECK(scene_from_args("wall", {}).depth_m == 1.5);  // default

  CHECK(scene_from_args("ramp", {}).kind == SceneSpec::Kind::kRamp);
  CHECK(scene_from_args("sphere", {}).kind == SceneSpec::Kind::kSphere);
  CHECK(scene_from_args("step", {}).kind == SceneSpec::Kind::kStep);

  CHECK_THROWS_AS(scene_from_args("torus", {}), ParseError);
  CHECK_THROWS_AS(scene_from_args("wall", {"depth_m=0"}), ParseError);
  CHECK_THROWS_AS(scene_from_args("wall", {"radius=1"}), ParseError);
}

TEST_CASE("wall depth is constant everywhere") {
  SceneSpec wall;
  wall.depth_m = 1.5;
  const DepthFrame d = render_scene_depth(wall, kCam);
  REQUIRE(d.width == 64);
  REQUIRE(d.height == 48);
  for (uint16_t mm : d.samples) CHECK(mm == 1500);
}

TEST_CASE("ramp spans its depth range monotonically across columns") {
  SceneSpec ramp;
  ramp.kind = SceneSpec::Kind::kRamp;
  ramp.max_m = 2.0;
  const DepthFrame d = render_scene_depth(ramp, kCam);
  for (int x = 1; x < d.width; ++x) {
    CHECK(d.at(x, 0) >= d.at(x - 1, 0));
    CHECK(d.at(x, 0) > 0);
  }
  CHECK(d.at(d.width - 1, 0) == 2000);
}

TEST_CASE("sphere renders a bounded disc with background misses") {
  SceneSpec sphere;
  sphere.kind = SceneSpec::Kind::kSphere;
  sphere.radius_m = 0.2;
  sphere.center_m = 1.0;
  const DepthFrame d = render_scene_depth(sphere, kCam);
  const uint16_t center = d.at(d.width / 2, d.height / 2);
  CHECK(center == doctest::Approx(800).epsilon(0.01));  // 1.0 - 0.2 at the apex
  CHECK(d.at(0, 0) == 0);                               // corner ray misses
  size_t hits = 0;
  for (uint16_t mm : d.samples) {
    if (mm > 0) {
      ++hits;
      CHECK(mm >= 799);
      CHECK(mm <= 1201);
    }
  }
  CHECK(hits > 0);
  CHECK(hits < d.samples.size());
}

TEST_CASE("step splits the frame into two depths") {
  SceneSpec step;
  step.kind = SceneSpec::Kind::kStep;
  step.depth_m = 1.0;
  step.step_far_m = 1.5;
  const DepthFrame d = render_scene_depth(step, kCam);
  CHECK(d.at(0, 0) == 1000);
  CHECK(d.at(d.width - 1, 0) == 1500);
  std::set<uint16_t> distinct(d.samples.begin(), d.samples.end());
  CHECK(distinct == std::set<uint16_t>{1000, 1500});
}

TEST_CASE("scene color is a deterministic gradient") {
  SceneSpec wall;
  const ColorFrame a = render_scene_color(wall, kCam);
  const ColorFrame b = render_scene_color(wall, kCam);
  CHECK(a == b);
  CHECK(a.at(0, 0) != a.at(63, 47));  // not constant
  CHECK(a.at(0, 0).b == 200);
}
