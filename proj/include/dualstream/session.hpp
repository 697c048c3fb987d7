#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualstream/composite.hpp"
#include "dualstream/geometry.hpp"
#include "dualstream/image.hpp"
#include "dualstream/netsim.hpp"
#include "dualstream/pointcloud.hpp"
#include "dualstream/protocol.hpp"
#include "dualstream/scenes.hpp"

namespace dualstream {

struct PeerDef {
  uint32_t id = 0;
  Posed anchor_pose_local;        // the shared anchor as seen in this peer's local frame
  Intrinsics<double> intrinsics;  // capture intrinsics for both streams
};

struct ScriptCommand {
  double t_ms = 0;
  uint32_t peer = 0;
  std::string verb;
  std::vector<std::string> args;
  int line = 0;
};

// Line format: `<t_ms> <peer|-> <verb> <args...>`; '#' comments. Global
// verbs (peer '-'): duration_ms, fps, av_link, state_link, degradation.
// Peer verbs: define, join, leave, pose, selfrep, envrep, mode, scene,
// self_scene, env_files, self_files, snapshot, snapshot_visibility,
// snapshot_delete, pointer, anchor. See docs/session-scripts.md.
struct SessionScript {
  double duration_ms = 1000.0;
  double fps = 30.0;
  LinkModel av_link;
  LinkModel state_link;
  DegradationModel degradation;
  std::map<uint32_t, PeerDef> peers;
  std::vector<ScriptCommand> commands;
};

// Validates: timestamps non-decreasing, peers defined before use, at most
// kMaxPeers defined. Errors carry source:line.
SessionScript parse_script(std::istream& in, const std::string& source);
SessionScript parse_script_file(const std::filesystem::path& path);

struct SnapshotArtifact {
  uint64_t id = 0;
  uint32_t creator = 0;
  SnapshotKind kind = SnapshotKind::kVideoFrame;
  Posed capture_pose;  // anchor-relative
  Intrinsics<double> k;
  ColorFrame color;                 // env color at capture time
  std::optional<DepthFrame> depth;  // round-tripped env depth (Hologram kind)
  std::string payload_ref;
};

struct MetricsReport {
  double duration_ms = 0;
  double fps = 0;
  uint64_t av_sent = 0, av_delivered = 0, av_dropped = 0;
  uint64_t state_sent = 0, state_delivered = 0, state_dropped = 0, state_rejected = 0;
  std::vector<double> av_latencies_ms;  // one per delivered composite
  std::vector<double> env_rmse_m;       // per delivered env-depth frame
  std::vector<double> self_rmse_m;
  std::vector<double> cloud_rmse_m;
  std::map<uint32_t, uint64_t> state_digests;  // per-peer replica digest
};

// Sorted-rank percentile: index ceil(0.95*N)-1 of the ascending sort.
double percentile95(std::vector<double> v);
double mean_of(const std::vector<double>& v);

// Deterministic plain-text rendering (the report.txt payload).
std::string report_to_string(const MetricsReport& r);

// Re-derives the transport half of the report (counts + latency
// distribution + throughput) from the event log alone.
MetricsReport transport_report_from_logs(const std::vector<LogRecord>& logs,
                                         double duration_ms, double fps);

struct RunOptions {
  uint64_t seed = 0;
  std::filesystem::path base_dir = ".";  // resolves env_files/self_files paths
  bool store_clouds = false;             // keep latest per (receiver, sender) cloud
};

struct SessionResult {
  MetricsReport report;
  std::vector<LogRecord> events;
  std::map<uint32_t, RoomState> replicas;
  // receiver -> sender -> latest reconstructed env cloud (only when
  // RunOptions::store_clouds).
  std::map<uint32_t, std::map<uint32_t, PointCloud>> latest_env_clouds;
  std::vector<SnapshotArtifact> snapshots;
  double wall_ms = 0;             // measured, not deterministic
  double processing_wall_ms = 0;  // wall time inside receiver-side pipeline
};

SessionResult run_session(const SessionScript& script, const RunOptions& opts = {});

}  // namespace dualstream
