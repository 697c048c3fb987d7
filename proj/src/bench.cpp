#include "dualstream/bench.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

#include "dualstream/composite.hpp"
#include "dualstream/depth_codec.hpp"
#include "dualstream/pointcloud.hpp"
#include "dualstream/scenes.hpp"

namespace dualstream {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

BenchReport run_bench(int width, int height, uint64_t iterations) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("bench: dimensions must be positive");
  BenchReport report;
  report.width = width;
  report.height = height;
  report.iterations = iterations;
  report.stage_ms = {{"encode", 0},  {"pack", 0},   {"serialize", 0},  {"parse", 0},
                     {"unpack", 0},  {"decode", 0}, {"reconstruct", 0}};
  if (iterations == 0) return report;

  const Intrinsics<double> k = intrinsics_from_fov<double>(69.0, 42.0, width, height);
  // Ramp covers every LUT bin; the self wall sits inside the short profile.
  SceneSpec env_spec;
  env_spec.kind = SceneSpec::Kind::kRamp;
  env_spec.max_m = 2.0;
  SceneSpec self_spec;
  self_spec.kind = SceneSpec::Kind::kWall;
  self_spec.depth_m = 0.5;
  const ColorFrame env_color = render_scene_color(env_spec, k);
  const DepthFrame env_depth = render_scene_depth(env_spec, k);
  const ColorFrame self_color = render_scene_color(self_spec, k);
  const DepthFrame self_depth = render_scene_depth(self_spec, k);
  const ColorLUT self_lut(self_profile());
  const ColorLUT env_lut(env_profile());
  const uint64_t self_digest = params_digest(self_profile());
  const uint64_t env_digest = params_digest(env_profile());

  auto& stage = report.stage_ms;
  const auto bench_start = Clock::now();
  for (uint64_t i = 0; i < iterations; ++i) {
    auto t0 = Clock::now();
    const ColorFrame self_colorized = encode_depth(self_depth, self_lut);
    const ColorFrame env_colorized = encode_depth(env_depth, env_lut);
    stage[0].second += ms_since(t0);

    t0 = Clock::now();
    const CompositeFrame composite = pack(self_color, self_colorized, env_color, env_colorized,
                                          i * 33333, i, self_digest, env_digest);
    stage[1].second += ms_since(t0);

    t0 = Clock::now();
    const std::vector<uint8_t> wire = serialize(composite);
    stage[2].second += ms_since(t0);

    t0 = Clock::now();
    const CompositeFrame received = parse_composite(wire);
    stage[3].second += ms_since(t0);

    t0 = Clock::now();
    const UnpackedComposite parts = unpack(received);
    stage[4].second += ms_since(t0);

    t0 = Clock::now();
    const DepthFrame self_decoded = decode_depth(*parts.frames[kSelfDepth], self_lut);
    const DepthFrame env_decoded = decode_depth(*parts.frames[kEnvDepth], env_lut);
    stage[5].second += ms_since(t0);

    t0 = Clock::now();
    const PointCloud self_cloud =
        reconstruct_hologram(*parts.frames[kSelfColor], self_decoded, k, Posed{});
    const PointCloud env_cloud =
        reconstruct_hologram(*parts.frames[kEnvColor], env_decoded, k, Posed{});
    stage[6].second += ms_since(t0);

    report.cloud_points = self_cloud.points.size() + env_cloud.points.size();
  }
  report.total_ms = ms_since(bench_start);
  report.fps = double(iterations) / (report.total_ms / 1000.0);
  return report;
}

std::string bench_to_string(const BenchReport& r) {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof(buf), "resolution=%dx%d\n", r.width, r.height);
  out += buf;
  out += "iterations=" + std::to_string(r.iterations) + "\n";
  std::snprintf(buf, sizeof(buf), "total_ms=%.3f\n", r.total_ms);
  out += buf;
  std::snprintf(buf, sizeof(buf), "fps=%.3f\n", r.fps);
  out += buf;
  for (const auto& [name, ms] : r.stage_ms) {
    std::snprintf(buf, sizeof(buf), "stage_%s_ms=%.3f\n", name.c_str(), ms);
    out += buf;
  }
  out += "cloud_points=" + std::to_string(r.cloud_points) + "\n";
  return out;
}

}  // namespace dualstream
