#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "dualstream/geometry.hpp"

namespace dualstream {

inline constexpr int kMaxPeers = 4;
inline constexpr double kCoverageDistance = 1.0;  // meters, snapshot annotation plane

enum class SelfRep : uint8_t {
  kHologram3D = 0,
  kSpatialVideo = 1,
  kSpatialVideoNoBackground = 2,
  kOff = 3,  // rendered as a marker; rendering itself is out of scope
};

enum class EnvRep : uint8_t { kHologram = 0, kVideoFeed = 1, kOff = 2 };

enum class CallMode : uint8_t { kAr = 0, kScreen = 1 };

enum class SnapshotKind : uint8_t { kVideoFrame = 0, kHologram = 1 };

// Message bodies. The header (sender, seq) lives in Message; peer-scoped
// messages always act on the sender's own peer entry, so the body carries
// no redundant peer id.
struct Join {};
struct Leave {};
struct PoseUpdate {
  Posed pose;  // anchor-relative
  uint64_t timestamp_us = 0;
};
struct SelfRepChange {
  SelfRep rep = SelfRep::kHologram3D;
};
struct EnvRepChange {
  EnvRep rep = EnvRep::kHologram;
};
struct ModeSwitch {
  CallMode mode = CallMode::kAr;
};
struct SnapshotCreate {
  uint64_t snapshot_id = 0;
  SnapshotKind kind = SnapshotKind::kVideoFrame;
  Posed capture_pose;  // anchor-relative, immutable after creation
  uint64_t intrinsics_digest = 0;
  std::string payload_ref;
};
struct SnapshotVisibility {
  uint64_t snapshot_id = 0;
  bool visible = true;
};
struct SnapshotDelete {
  uint64_t snapshot_id = 0;
};
struct Pointer {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();     // anchor frame
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ(); // unit length
  bool active = true;
};
struct AnchorRepositioned {};

using MessageBody = std::variant<Join, Leave, PoseUpdate, SelfRepChange, EnvRepChange, ModeSwitch,
                                 SnapshotCreate, SnapshotVisibility, SnapshotDelete, Pointer,
                                 AnchorRepositioned>;

struct Message {
  uint32_t sender = 0;
  uint64_t seq = 0;  // per-sender, strictly increasing, starts at 1
  MessageBody body;
};

bool operator==(const Message& a, const Message& b);

struct PeerState {
  Posed pose;  // anchor-relative
  uint64_t pose_seq = 0;
  uint64_t last_seen_ts = 0;  // max PoseUpdate timestamp
  SelfRep self_rep = SelfRep::kHologram3D;
  EnvRep env_rep = EnvRep::kHologram;
  CallMode mode = CallMode::kAr;
};

struct SnapshotState {
  uint64_t id = 0;
  uint32_t creator = 0;
  SnapshotKind kind = SnapshotKind::kVideoFrame;
  Posed capture_pose;
  uint64_t intrinsics_digest = 0;
  std::string payload_ref;
  bool visible = true;
};

// Session-scoped shared room. Snapshots survive their creator's Leave;
// nothing survives the session.
struct RoomState {
  int max_peers = kMaxPeers;
  std::map<uint32_t, PeerState> peers;
  std::map<uint64_t, SnapshotState> snapshots;
  // Highest seq seen per sender; messages at or below it are duplicates
  // and are dropped, which makes log replay idempotent.
  std::map<uint32_t, uint64_t> last_seen_seq;
};

// Pure deterministic transition. Duplicate messages (seq <= last seen from
// that sender) leave the state untouched. Throws StateError on: room-full
// Join, any non-Join message for an absent peer, duplicate snapshot id,
// visibility/delete of an unknown snapshot.
RoomState apply(const RoomState& state, const Message& msg);

// TLV wire format (little-endian):
//
//   0     1        5                 9            9+N-12
//   +-----+--------+--------+--------+---------------+--------+
//   | tag | length | sender | seq    | body fields   | crc32  |
//   | u8  | u32    | u32    | u64    | ...           | u32    |
//   +-----+--------+--------+--------+---------------+--------+
//
// length counts the value bytes (sender through body); crc32 covers tag,
// length, and value. decode_message rejects unknown tags, truncation, CRC
// mismatch, bad enum values, and non-unit rotations.
std::vector<uint8_t> encode_message(const Message& m);
Message decode_message(const std::vector<uint8_t>& bytes);

// Canonical byte serialization of the room (deterministic; used for the
// replay-equality tests) and its FNV-1a digest.
std::vector<uint8_t> serialize_state(const RoomState& s);
uint64_t state_digest(const RoomState& s);

// Deictic pointer from a screen touch: ray from the device position along
// the unprojected pixel direction (unit length), in the anchor frame.
Pointer point_at(int u, int v, const Intrinsics<double>& k, const Posed& device_pose_anchor_rel);

// Builds the SnapshotCreate message for the sender's active env stream.
// kind VideoFrame requires env_rep VideoFeed; kind Hologram requires
// env_rep Hologram; otherwise throws StateError (stream inactive).
Message take_snapshot(const RoomState& state, uint32_t sender, uint64_t seq, uint64_t snapshot_id,
                      SnapshotKind kind, const std::string& payload_ref, const Posed& capture_pose,
                      const Intrinsics<double>& k);

}  // namespace dualstream
