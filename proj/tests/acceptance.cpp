// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each criterion is self-contained and uses only public APIs.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dualstream/bench.hpp"
#include "dualstream/composite.hpp"
#include "dualstream/depth_codec.hpp"
#include "dualstream/netsim.hpp"
#include "dualstream/pointcloud.hpp"
#include "dualstream/protocol.hpp"
#include "dualstream/rng.hpp"
#include "dualstream/scenes.hpp"
#include "dualstream/session.hpp"

using namespace dualstream;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// 1. Codec exactness bound: exhaustive over every millimeter in range for
//    d_max 0.8 m and 2.0 m; |d - decode(encode(d))| <= d_max/(2*(bins-1)).
//    The check is in exact integer arithmetic: with depth d mm, bound
//    D = d_max mm, B bins and bin index i, the inequality is
//    2*|d*(B-1) - i*D| <= D.
Outcome criterion1() {
  const auto t0 = Clock::now();
  uint64_t checked = 0;
  for (const ColorizationParams& p : {self_profile(), env_profile()}) {
    const ColorLUT lut(p);
    const int64_t B = p.lut_bins;
    const int64_t D = static_cast<int64_t>(std::llround(p.d_max_m * 1000.0));
    for (int64_t mm = 1; mm <= D; ++mm) {
      const int bin = lut.bin_for_depth_mm(static_cast<uint16_t>(mm));
      if (bin < 0) return {false, "valid depth mapped to invalid"};
      // Clean-channel decode returns the same bin.
      if (lut.nearest_bin(lut.entry(bin)) != bin) {
        return {false, "clean decode flipped bin at " + std::to_string(mm) + " mm"};
      }
      const int64_t twice_err = 2 * std::llabs(mm * (B - 1) - int64_t(bin) * D);
      if (twice_err > D) {
        return {false, "bound exceeded at " + std::to_string(mm) + " mm (d_max " +
                           std::to_string(p.d_max_m) + ")"};
      }
      ++checked;
    }
  }
  const double dt = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%llu depths across both profiles in %.2fs",
                static_cast<unsigned long long>(checked), dt);
  return {dt < 5.0, buf};
}

// ---------------------------------------------------------------------------
// 2. Noise stability: perturbations with magnitude below half the minimum
//    inter-entry RGB distance never change the decoded depth. Exhaustive
//    over every LUT entry x every integer offset inside the guarantee ball
//    (the per-channel magnitudes combine as a vector; see README).
Outcome criterion2() {
  const auto t0 = Clock::now();
  uint64_t probes = 0;

  const auto sweep = [&probes](int bins, int64_t min_dist_sq,
                               uint64_t* vector_count) -> std::string {
    ColorizationParams p = env_profile();
    p.lut_bins = bins;
    const ColorLUT lut(p);
    if (lut.min_inter_entry_dist_sq() != min_dist_sq) return "unexpected min entry distance";
    // Strictly inside half the minimum distance: 4*|delta|^2 < min_dist_sq.
    const int64_t ball = (min_dist_sq - 1) / 4;
    const int radius = static_cast<int>(std::sqrt(double(ball)));
    uint64_t vectors = 0;
    for (int dr = -radius; dr <= radius; ++dr) {
      for (int dg = -radius; dg <= radius; ++dg) {
        for (int db = -radius; db <= radius; ++db) {
          if (int64_t(dr) * dr + int64_t(dg) * dg + int64_t(db) * db > ball) continue;
          ++vectors;
          for (int bin = 0; bin < bins; ++bin) {
            const Rgb e = lut.entry(bin);
            const auto clamp8 = [](int v) {
              return static_cast<uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
            };
            const Rgb noisy{clamp8(e.r + dr), clamp8(e.g + dg), clamp8(e.b + db)};
            ++probes;
            if (lut.nearest_bin(noisy) != bin) {
              return "bin " + std::to_string(bin) + " flipped at offset (" +
                     std::to_string(dr) + "," + std::to_string(dg) + "," + std::to_string(db) +
                     ") with " + std::to_string(bins) + " bins";
            }
          }
        }
      }
    }
    if (vector_count != nullptr) *vector_count = vectors;
    return "";
  };

  uint64_t vectors64 = 0;
  if (std::string err = sweep(64, 89, &vectors64); !err.empty()) return {false, err};
  if (vectors64 != 461) {
    return {false, "expected 461 offsets inside the 64-bin ball, got " +
                       std::to_string(vectors64)};
  }
  if (std::string err = sweep(32, 397, nullptr); !err.empty()) return {false, err};
  if (std::string err = sweep(128, 18, nullptr); !err.empty()) return {false, err};

  const double dt = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%llu probes over 32/64/128-bin LUT neighborhoods in %.2fs",
                static_cast<unsigned long long>(probes), dt);
  return {dt < 10.0, buf};
}

// ---------------------------------------------------------------------------
// 3. Composite losslessness: 1000 randomized pack -> serialize -> parse ->
//    unpack round trips, bit-exact, with one shared timestamp per frame.
Outcome criterion3() {
  SplitMix64 rng(20260823);
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<std::optional<ColorFrame>, 4> in;
    const int present_mask = 1 + static_cast<int>(rng.next() % 15);  // at least one
    for (int q = 0; q < 4; ++q) {
      if (!(present_mask & (1 << q))) continue;
      const int w = 1 + static_cast<int>(rng.next() % 16);
      const int h = 1 + static_cast<int>(rng.next() % 16);
      ColorFrame f = ColorFrame::filled(w, h, {0, 0, 0});
      for (auto& b : f.pixels) b = static_cast<uint8_t>(rng.next() & 0xFF);
      in[q] = std::move(f);
    }
    const uint64_t ts = rng.next();
    const uint64_t seq = rng.next();
    const uint64_t dig_self = rng.next();
    const uint64_t dig_env = rng.next();
    const CompositeFrame f = pack(in[0], in[1], in[2], in[3], ts, seq, dig_self, dig_env);
    const CompositeFrame parsed = parse_composite(serialize(f));
    if (!(parsed == f)) return {false, "parse != packed at trial " + std::to_string(trial)};
    const UnpackedComposite out = unpack(parsed);
    if (out.timestamp_us != ts || out.seq != seq) {
      return {false, "metadata mismatch at trial " + std::to_string(trial)};
    }
    for (int q = 0; q < 4; ++q) {
      if (in[q].has_value() != out.frames[q].has_value()) {
        return {false, "presence mismatch at trial " + std::to_string(trial)};
      }
      if (in[q] && !(*in[q] == *out.frames[q])) {
        return {false, "pixel mismatch at trial " + std::to_string(trial)};
      }
    }
    if (in[1] && out.digests[kSelfDepth] != dig_self) return {false, "self digest lost"};
    if (in[3] && out.digests[kEnvDepth] != dig_env) return {false, "env digest lost"};
    // All quadrants decode against the one wire timestamp: synchronization
    // is structural, verified across the full round trip above.
  }
  return {true, "1000 randomized round trips bit-exact, timestamps shared"};
}

// ---------------------------------------------------------------------------
// 4. Protocol convergence: all order-respecting interleavings of two
//    senders x three messages converge; replaying any log is idempotent.
Outcome criterion4() {
  const Posed pose = make_pose<double>(
      {0.2, -0.1, 1.0}, Eigen::Quaterniond(Eigen::AngleAxisd(0.4, Eigen::Vector3d::UnitY())));
  const std::vector<Message> from1 = {
      {1, 1, Join{}}, {1, 2, PoseUpdate{pose, 10}}, {1, 3, SelfRepChange{SelfRep::kSpatialVideo}}};
  const std::vector<Message> from2 = {
      {2, 1, Join{}},
      {2, 2, EnvRepChange{EnvRep::kVideoFeed}},
      {2, 3, SnapshotCreate{5, SnapshotKind::kVideoFrame, pose, 99, "composite:2:0:env"}}};

  std::vector<bool> pick(6, false);
  std::fill(pick.begin(), pick.begin() + 3, true);
  std::sort(pick.begin(), pick.end());
  bool first = true;
  uint64_t reference = 0;
  int interleavings = 0;
  do {
    std::vector<Message> log;
    size_t i = 0, j = 0;
    for (bool take1 : pick) log.push_back(take1 ? from1[i++] : from2[j++]);
    RoomState once;
    for (const auto& m : log) once = apply(once, m);
    const uint64_t digest = state_digest(once);
    if (first) {
      reference = digest;
      first = false;
    } else if (digest != reference) {
      return {false, "interleaving " + std::to_string(interleavings) + " diverged"};
    }
    // Idempotent replay: feeding the whole log again changes nothing.
    RoomState twice = once;
    for (const auto& m : log) twice = apply(twice, m);
    if (serialize_state(twice) != serialize_state(once)) {
      return {false, "replay changed state at interleaving " + std::to_string(interleavings)};
    }
    ++interleavings;
  } while (std::next_permutation(pick.begin(), pick.end()));
  if (interleavings != 20) return {false, "expected 20 interleavings"};
  return {true, "20 interleavings converge to one digest; double replay is a no-op"};
}

// ---------------------------------------------------------------------------
// 5. Multi-peer pose consistency: a 4-peer session; distances between
//    reconstructed points (within and across peers' clouds, in the shared
//    anchor frame) agree across every receiver within 1e-6 m.
Outcome criterion5() {
  const std::string text =
      "0 - duration_ms 200\n"
      "0 - fps 30\n"
      "0 - av_link base_latency_ms=30 jitter_ms=0 loss_prob=0 seed=1\n"
      "0 - state_link base_latency_ms=5 jitter_ms=0 loss_prob=0 seed=2\n"
      "0 1 define width=32 height=24 anchor=0.5,0,0,1,0,0,0\n"
      "0 2 define width=32 height=24 anchor=0,0.5,0,0.9238795,0,0.3826834,0\n"
      "0 3 define width=32 height=24\n"
      "0 4 define width=32 height=24\n"
      "0 1 join\n"
      "0 2 join\n"
      "0 3 join\n"
      "0 4 join\n"
      "1 1 scene wall depth_m=1.0\n"
      "1 2 scene ramp\n"
      "1 3 scene sphere\n"
      "1 4 scene step\n"
      "5 1 pose 0.1 0 0 1 0 0 0\n"
      "5 2 pose 0 0.1 0 0.9238795 0 0.3826834 0\n"
      "5 3 pose -0.1 0.2 0 1 0 0 0\n"
      "5 4 pose 0 0 -0.1 1 0 0 0\n";
  std::istringstream in(text);
  const SessionScript script = parse_script(in, "acceptance");
  RunOptions opts;
  opts.store_clouds = true;
  const SessionResult r = run_session(script, opts);
  if (r.report.av_dropped != 0) return {false, "unexpected drops on a clean link"};

  // Sample fixed point pairs per sender, then compare the distances every
  // receiver computes for those same points.
  double worst = 0.0;
  for (uint32_t s1 = 1; s1 <= 4; ++s1) {
    for (uint32_t s2 = s1; s2 <= 4; ++s2) {
      std::vector<uint32_t> receivers;
      for (uint32_t rid = 1; rid <= 4; ++rid) {
        if (rid != s1 && rid != s2) receivers.push_back(rid);
      }
      if (receivers.size() < 2) continue;
      const auto* first_c1 = &r.latest_env_clouds.at(receivers[0]).at(s1);
      const auto* first_c2 = &r.latest_env_clouds.at(receivers[0]).at(s2);
      if (first_c1->points.empty() || first_c2->points.empty()) {
        return {false, "empty reconstruction for sender " + std::to_string(s1)};
      }
      SplitMix64 rng(1000 * s1 + s2);
      for (int k = 0; k < 200; ++k) {
        const size_t i = rng.next() % first_c1->points.size();
        const size_t j = rng.next() % first_c2->points.size();
        double ref = -1.0;
        for (uint32_t rid : receivers) {
          const PointCloud& c1 = r.latest_env_clouds.at(rid).at(s1);
          const PointCloud& c2 = r.latest_env_clouds.at(rid).at(s2);
          if (c1.points.size() != first_c1->points.size() ||
              c2.points.size() != first_c2->points.size()) {
            return {false, "cloud sizes differ between receivers"};
          }
          const double d = (c1.points[i].position - c2.points[j].position).norm();
          if (ref < 0) {
            ref = d;
          } else {
            worst = std::max(worst, std::abs(d - ref));
          }
        }
      }
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max cross-receiver distance disagreement %.3g m", worst);
  return {worst < 1e-6, buf};
}

// ---------------------------------------------------------------------------
// 6. Latency claim at desk scale: 2 peers, 100 ms / +-20 ms / 1% loss at
//    640x480; p95 end-to-end frame latency < 1000 ms and receiver-side
//    processing under 100 ms per frame.
Outcome criterion6() {
  const std::string text =
      "0 - duration_ms 1000\n"
      "0 - fps 30\n"
      "0 - av_link base_latency_ms=100 jitter_ms=20 loss_prob=0.01 seed=42\n"
      "0 - state_link base_latency_ms=10 jitter_ms=2 loss_prob=0.01 seed=43\n"
      "0 1 define width=640 height=480\n"
      "0 2 define width=640 height=480\n"
      "0 1 join\n"
      "0 2 join\n"
      "1 1 scene wall depth_m=1.0\n"
      "1 2 scene ramp\n";
  std::istringstream in(text);
  const SessionResult r = run_session(parse_script(in, "acceptance"), {});
  if (r.report.av_delivered == 0) return {false, "no frames delivered"};
  const double p95 = percentile95(r.report.av_latencies_ms);
  const double per_frame_ms = r.processing_wall_ms / double(r.report.av_delivered);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "p95 %.1f ms over %llu frames; receiver pipeline %.1f ms/frame", p95,
                static_cast<unsigned long long>(r.report.av_delivered), per_frame_ms);
  return {p95 < 1000.0 && per_frame_ms < 100.0, buf};
}

// ---------------------------------------------------------------------------
// 7. Throughput claim: the full encode->...->reconstruct loop sustains
//    >= 30 composite frames/s at 640x480 per quadrant.
Outcome criterion7() {
  const BenchReport big = run_bench(640, 480, 40);
  const BenchReport small = run_bench(64, 64, 40);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "measured %.1f fps at 640x480 (64x64 reference: %.0f fps)",
                big.fps, small.fps);
  return {big.fps >= 30.0 && small.fps > big.fps, buf};
}

// ---------------------------------------------------------------------------
// 8. Degradation study: mean env-depth RMSE is non-decreasing over noise
//    sigma in {0,1,2,4,8} across 10 seeds, and sigma=0 equals the
//    quantization bound within 1e-6 m.
Outcome criterion8() {
  const Intrinsics<double> k = intrinsics_from_fov<double>(69.0, 42.0, 64, 48);
  SceneSpec wall;
  wall.depth_m = 1.0;  // halfway between env bins 127 and 128: worst case
  const DepthFrame truth = render_scene_depth(wall, k);
  const ColorLUT lut(env_profile());
  const ColorFrame clean = encode_depth(truth, lut);

  const double sigmas[] = {0, 1, 2, 4, 8};
  std::vector<double> means;
  for (double sigma : sigmas) {
    DegradationModel m;
    m.noise_sigma = sigma;
    double sum = 0;
    const int seeds = 10;
    for (int seed = 1; seed <= seeds; ++seed) {
      const ColorFrame noisy = degrade_frame(clean, m, derive_seed(777, seed));
      const auto bins = decode_bins(noisy, lut);
      double err2 = 0;
      for (size_t i = 0; i < truth.samples.size(); ++i) {
        const double e = lut.bin_center_m(bins[i]) - truth.samples[i] / 1000.0;
        err2 += e * e;
      }
      sum += std::sqrt(err2 / double(truth.samples.size()));
    }
    means.push_back(sum / seeds);
  }
  const double bound = quantization_bound(env_profile());
  std::ostringstream detail;
  detail.precision(3);
  detail << "mean RMSE (mm):";
  for (double m : means) detail << " " << m * 1000.0;
  if (std::abs(means[0] - bound) > 1e-6) {
    return {false, "sigma=0 RMSE differs from the bound: " + detail.str()};
  }
  for (size_t i = 1; i < means.size(); ++i) {
    if (means[i] < means[i - 1]) return {false, "RMSE decreased: " + detail.str()};
  }
  return {true, detail.str()};
}

// ---------------------------------------------------------------------------
// 9. Reconstruction sanity: a flat wall at 1.5 m through the entire clean
//    pipeline fits a plane with RMS residual <= the 2.0 m bound.
Outcome criterion9() {
  const Intrinsics<double> k = intrinsics_from_fov<double>(69.0, 42.0, 320, 240);
  SceneSpec wall;
  wall.depth_m = 1.5;
  const DepthFrame truth = render_scene_depth(wall, k);
  const ColorFrame color = render_scene_color(wall, k);

  const ColorLUT lut(env_profile());
  const CompositeFrame sent = pack(std::nullopt, std::nullopt, color, encode_depth(truth, lut),
                                   0, 0, 0, params_digest(env_profile()));
  const CompositeFrame received = parse_composite(serialize(sent));
  const UnpackedComposite parts = unpack(received);
  if (!parts.frames[kEnvColor] || !parts.frames[kEnvDepth]) {
    return {false, "quadrants lost in transit"};
  }
  const DepthFrame depth = decode_depth(*parts.frames[kEnvDepth], lut);
  const PointCloud cloud = reconstruct_hologram(*parts.frames[kEnvColor], depth, k, Posed{});
  if (cloud.points.size() != size_t(320) * 240) return {false, "missing points"};
  const double rms = plane_fit_rms(cloud);
  const double bound = quantization_bound(env_profile());
  char buf[128];
  std::snprintf(buf, sizeof(buf), "plane residual %.3g m vs bound %.5f m", rms, bound);
  return {rms <= bound, buf};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> criteria = {
      {1, "codec exactness bound", criterion1},
      {2, "noise stability", criterion2},
      {3, "composite losslessness", criterion3},
      {4, "protocol convergence", criterion4},
      {5, "multi-peer pose consistency", criterion5},
      {6, "latency claim at desk scale", criterion6},
      {7, "throughput claim", criterion7},
      {8, "degradation study", criterion8},
      {9, "reconstruction sanity", criterion9},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("all %zu acceptance criteria pass\n", criteria.size());
  } else {
    std::printf("%d acceptance criteria FAILED\n", failures);
  }
  return failures;
}
