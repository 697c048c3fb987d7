#include "dualstream/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "dualstream/bytes.hpp"
#include "dualstream/crc32.hpp"
#include "dualstream/error.hpp"
#include "dualstream/hash.hpp"

namespace dualstream {
namespace {

enum Tag : uint8_t {
  kTagJoin = 1,
  kTagLeave = 2,
  kTagPoseUpdate = 3,
  kTagSelfRepChange = 4,
  kTagEnvRepChange = 5,
  kTagModeSwitch = 6,
  kTagSnapshotCreate = 7,
  kTagSnapshotVisibility = 8,
  kTagSnapshotDelete = 9,
  kTagPointer = 10,
  kTagAnchorRepositioned = 11,
};

bool exact_eq(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return a.x() == b.x() && a.y() == b.y() && a.z() == b.z();
}

bool exact_eq(const Posed& a, const Posed& b) {
  return exact_eq(a.translation, b.translation) &&
         (a.rotation.coeffs().array() == b.rotation.coeffs().array()).all();
}

void write_pose(ByteWriter& w, const Posed& p) {
  w.f64(p.translation.x());
  w.f64(p.translation.y());
  w.f64(p.translation.z());
  w.f64(p.rotation.w());
  w.f64(p.rotation.x());
  w.f64(p.rotation.y());
  w.f64(p.rotation.z());
}

Posed read_pose(ByteReader& r) {
  Posed p;
  p.translation.x() = r.f64();
  p.translation.y() = r.f64();
  p.translation.z() = r.f64();
  const double w = r.f64(), x = r.f64(), y = r.f64(), z = r.f64();
  p.rotation = Eigen::Quaterniond(w, x, y, z);
  if (!pose_is_valid(p)) throw WireError("invalid pose on wire");
  return p;
}

void write_vec3(ByteWriter& w, const Eigen::Vector3d& v) {
  w.f64(v.x());
  w.f64(v.y());
  w.f64(v.z());
}

Eigen::Vector3d read_vec3(ByteReader& r) {
  Eigen::Vector3d v;
  v.x() = r.f64();
  v.y() = r.f64();
  v.z() = r.f64();
  if (!v.allFinite()) throw WireError("non-finite vector on wire");
  return v;
}

bool read_flag(ByteReader& r, const char* what) {
  const uint8_t v = r.u8();
  if (v > 1) throw WireError(std::string("bad flag value for ") + what);
  return v == 1;
}

template <typename E>
E read_enum(ByteReader& r, uint8_t max, const char* what) {
  const uint8_t v = r.u8();
  if (v > max) throw WireError(std::string("bad enum value for ") + what);
  return static_cast<E>(v);
}

PeerState& own_peer(RoomState& state, uint32_t sender) {
  const auto it = state.peers.find(sender);
  if (it == state.peers.end()) {
    throw StateError("message from peer " + std::to_string(sender) + " which is not in the room");
  }
  return it->second;
}

}  // namespace

bool operator==(const Message& a, const Message& b) {
  if (a.sender != b.sender || a.seq != b.seq || a.body.index() != b.body.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.body);
        if constexpr (std::is_same_v<T, Join> || std::is_same_v<T, Leave> ||
                      std::is_same_v<T, AnchorRepositioned>) {
          return true;
        } else if constexpr (std::is_same_v<T, PoseUpdate>) {
          return exact_eq(x.pose, y.pose) && x.timestamp_us == y.timestamp_us;
        } else if constexpr (std::is_same_v<T, SelfRepChange>) {
          return x.rep == y.rep;
        } else if constexpr (std::is_same_v<T, EnvRepChange>) {
          return x.rep == y.rep;
        } else if constexpr (std::is_same_v<T, ModeSwitch>) {
          return x.mode == y.mode;
        } else if constexpr (std::is_same_v<T, SnapshotCreate>) {
          return x.snapshot_id == y.snapshot_id && x.kind == y.kind &&
                 exact_eq(x.capture_pose, y.capture_pose) &&
                 x.intrinsics_digest == y.intrinsics_digest && x.payload_ref == y.payload_ref;
        } else if constexpr (std::is_same_v<T, SnapshotVisibility>) {
          return x.snapshot_id == y.snapshot_id && x.visible == y.visible;
        } else if constexpr (std::is_same_v<T, SnapshotDelete>) {
          return x.snapshot_id == y.snapshot_id;
        } else if constexpr (std::is_same_v<T, Pointer>) {
          return exact_eq(x.origin, y.origin) && exact_eq(x.direction, y.direction) &&
                 x.active == y.active;
        } else {
          return false;
        }
      },
      a.body);
}

RoomState apply(const RoomState& state, const Message& msg) {
  if (msg.seq == 0) throw StateError("message seq must start at 1");
  RoomState next = state;

  const auto seen = next.last_seen_seq.find(msg.sender);
  if (seen != next.last_seen_seq.end() && msg.seq <= seen->second) {
    return next;  // duplicate or stale: replay-safe drop
  }
  next.last_seen_seq[msg.sender] = msg.seq;

  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, Join>) {
          if (next.peers.count(msg.sender)) return;  // idempotent re-join
          if (static_cast<int>(next.peers.size()) >= next.max_peers) {
            throw StateError("room full (max " + std::to_string(next.max_peers) + " peers)");
          }
          next.peers.emplace(msg.sender, PeerState{});
        } else if constexpr (std::is_same_v<T, Leave>) {
          own_peer(next, msg.sender);
          next.peers.erase(msg.sender);
        } else if constexpr (std::is_same_v<T, PoseUpdate>) {
          PeerState& peer = own_peer(next, msg.sender);
          if (msg.seq > peer.pose_seq) {  // last writer (by seq) wins
            peer.pose = body.pose;
            peer.pose_seq = msg.seq;
          }
          peer.last_seen_ts = std::max(peer.last_seen_ts, body.timestamp_us);
        } else if constexpr (std::is_same_v<T, SelfRepChange>) {
          own_peer(next, msg.sender).self_rep = body.rep;
        } else if constexpr (std::is_same_v<T, EnvRepChange>) {
          own_peer(next, msg.sender).env_rep = body.rep;
        } else if constexpr (std::is_same_v<T, ModeSwitch>) {
          own_peer(next, msg.sender).mode = body.mode;
        } else if constexpr (std::is_same_v<T, SnapshotCreate>) {
          own_peer(next, msg.sender);
          if (next.snapshots.count(body.snapshot_id)) {
            throw StateError("duplicate snapshot id " + std::to_string(body.snapshot_id));
          }
          SnapshotState s;
          s.id = body.snapshot_id;
          s.creator = msg.sender;
          s.kind = body.kind;
          s.capture_pose = body.capture_pose;
          s.intrinsics_digest = body.intrinsics_digest;
          s.payload_ref = body.payload_ref;
          s.visible = true;
          next.snapshots.emplace(s.id, std::move(s));
        } else if constexpr (std::is_same_v<T, SnapshotVisibility>) {
          const auto it = next.snapshots.find(body.snapshot_id);
          if (it == next.snapshots.end()) {
            throw StateError("visibility change for unknown snapshot " +
                             std::to_string(body.snapshot_id));
          }
          it->second.visible = body.visible;
        } else if constexpr (std::is_same_v<T, SnapshotDelete>) {
          if (next.snapshots.erase(body.snapshot_id) == 0) {
            throw StateError("delete of unknown snapshot " + std::to_string(body.snapshot_id));
          }
        } else if constexpr (std::is_same_v<T, Pointer>) {
          own_peer(next, msg.sender);  // transient display event; no state
        } else if constexpr (std::is_same_v<T, AnchorRepositioned>) {
          own_peer(next, msg.sender);  // receivers remap locally; no state
        }
      },
      msg.body);
  return next;
}

std::vector<uint8_t> encode_message(const Message& m) {
  ByteWriter value;
  value.u32(m.sender);
  value.u64(m.seq);
  uint8_t tag = 0;
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, Join>) {
          tag = kTagJoin;
        } else if constexpr (std::is_same_v<T, Leave>) {
          tag = kTagLeave;
        } else if constexpr (std::is_same_v<T, PoseUpdate>) {
          tag = kTagPoseUpdate;
          write_pose(value, body.pose);
          value.u64(body.timestamp_us);
        } else if constexpr (std::is_same_v<T, SelfRepChange>) {
          tag = kTagSelfRepChange;
          value.u8(static_cast<uint8_t>(body.rep));
        } else if constexpr (std::is_same_v<T, EnvRepChange>) {
          tag = kTagEnvRepChange;
          value.u8(static_cast<uint8_t>(body.rep));
        } else if constexpr (std::is_same_v<T, ModeSwitch>) {
          tag = kTagModeSwitch;
          value.u8(static_cast<uint8_t>(body.mode));
        } else if constexpr (std::is_same_v<T, SnapshotCreate>) {
          tag = kTagSnapshotCreate;
          value.u64(body.snapshot_id);
          value.u8(static_cast<uint8_t>(body.kind));
          write_pose(value, body.capture_pose);
          value.u64(body.intrinsics_digest);
          value.str16(body.payload_ref);
        } else if constexpr (std::is_same_v<T, SnapshotVisibility>) {
          tag = kTagSnapshotVisibility;
          value.u64(body.snapshot_id);
          value.u8(body.visible ? 1 : 0);
        } else if constexpr (std::is_same_v<T, SnapshotDelete>) {
          tag = kTagSnapshotDelete;
          value.u64(body.snapshot_id);
        } else if constexpr (std::is_same_v<T, Pointer>) {
          tag = kTagPointer;
          write_vec3(value, body.origin);
          write_vec3(value, body.direction);
          value.u8(body.active ? 1 : 0);
        } else if constexpr (std::is_same_v<T, AnchorRepositioned>) {
          tag = kTagAnchorRepositioned;
        }
      },
      m.body);

  ByteWriter out;
  out.u8(tag);
  out.u32(static_cast<uint32_t>(value.size()));
  out.bytes(std::span<const uint8_t>(value.data().data(), value.size()));
  const uint32_t crc = crc32(std::span<const uint8_t>(out.data().data(), out.size()));
  out.u32(crc);
  return out.take();
}

Message decode_message(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 1 + 4 + 4) throw WireError("truncated message header");
  const uint32_t length = uint32_t(bytes[1]) | (uint32_t(bytes[2]) << 8) |
                          (uint32_t(bytes[3]) << 16) | (uint32_t(bytes[4]) << 24);
  const size_t total = size_t(1) + 4 + length + 4;
  if (bytes.size() < total) throw WireError("truncated message value");
  if (bytes.size() > total) throw WireError("trailing bytes after message");
  const uint32_t stored_crc = uint32_t(bytes[total - 4]) | (uint32_t(bytes[total - 3]) << 8) |
                              (uint32_t(bytes[total - 2]) << 16) |
                              (uint32_t(bytes[total - 1]) << 24);
  if (stored_crc != crc32(std::span<const uint8_t>(bytes.data(), total - 4))) {
    throw WireError("message checksum mismatch");
  }

  ByteReader r(std::span<const uint8_t>(bytes.data() + 5, length));
  Message m;
  m.sender = r.u32();
  m.seq = r.u64();
  switch (bytes[0]) {
    case kTagJoin:
      m.body = Join{};
      break;
    case kTagLeave:
      m.body = Leave{};
      break;
    case kTagPoseUpdate: {
      PoseUpdate b;
      b.pose = read_pose(r);
      b.timestamp_us = r.u64();
      m.body = b;
      break;
    }
    case kTagSelfRepChange:
      m.body = SelfRepChange{read_enum<SelfRep>(r, 3, "self representation")};
      break;
    case kTagEnvRepChange:
      m.body = EnvRepChange{read_enum<EnvRep>(r, 2, "env representation")};
      break;
    case kTagModeSwitch:
      m.body = ModeSwitch{read_enum<CallMode>(r, 1, "call mode")};
      break;
    case kTagSnapshotCreate: {
      SnapshotCreate b;
      b.snapshot_id = r.u64();
      b.kind = read_enum<SnapshotKind>(r, 1, "snapshot kind");
      b.capture_pose = read_pose(r);
      b.intrinsics_digest = r.u64();
      b.payload_ref = r.str16();
      m.body = b;
      break;
    }
    case kTagSnapshotVisibility: {
      SnapshotVisibility b;
      b.snapshot_id = r.u64();
      b.visible = read_flag(r, "visible");
      m.body = b;
      break;
    }
    case kTagSnapshotDelete:
      m.body = SnapshotDelete{r.u64()};
      break;
    case kTagPointer: {
      Pointer b;
      b.origin = read_vec3(r);
      b.direction = read_vec3(r);
      b.active = read_flag(r, "active");
      m.body = b;
      break;
    }
    case kTagAnchorRepositioned:
      m.body = AnchorRepositioned{};
      break;
    default:
      throw WireError("unknown message tag " + std::to_string(bytes[0]));
  }
  if (r.remaining() != 0) throw WireError("excess value bytes in message");
  return m;
}

std::vector<uint8_t> serialize_state(const RoomState& s) {
  ByteWriter w;
  w.u8(1);  // state serialization version
  w.u32(static_cast<uint32_t>(s.max_peers));
  w.u32(static_cast<uint32_t>(s.peers.size()));
  for (const auto& [id, peer] : s.peers) {
    w.u32(id);
    write_pose(w, peer.pose);
    w.u64(peer.pose_seq);
    w.u64(peer.last_seen_ts);
    w.u8(static_cast<uint8_t>(peer.self_rep));
    w.u8(static_cast<uint8_t>(peer.env_rep));
    w.u8(static_cast<uint8_t>(peer.mode));
  }
  w.u32(static_cast<uint32_t>(s.snapshots.size()));
  for (const auto& [id, snap] : s.snapshots) {
    w.u64(id);
    w.u32(snap.creator);
    w.u8(static_cast<uint8_t>(snap.kind));
    write_pose(w, snap.capture_pose);
    w.u64(snap.intrinsics_digest);
    w.str16(snap.payload_ref);
    w.u8(snap.visible ? 1 : 0);
  }
  w.u32(static_cast<uint32_t>(s.last_seen_seq.size()));
  for (const auto& [sender, seq] : s.last_seen_seq) {
    w.u32(sender);
    w.u64(seq);
  }
  return w.take();
}

uint64_t state_digest(const RoomState& s) {
  const auto bytes = serialize_state(s);
  return fnv1a64(std::span<const uint8_t>(bytes.data(), bytes.size()));
}

Pointer point_at(int u, int v, const Intrinsics<double>& k, const Posed& device_pose_anchor_rel) {
  if (u < 0 || v < 0 || u >= k.width || v >= k.height) {
    throw ParseError("point_at: pixel (" + std::to_string(u) + "," + std::to_string(v) +
                     ") outside " + std::to_string(k.width) + "x" + std::to_string(k.height));
  }
  const Eigen::Vector3d dir_cam = unproject<double>(u, v, 1.0, k);
  Pointer p;
  p.origin = device_pose_anchor_rel.translation;
  p.direction = (device_pose_anchor_rel.rotation * dir_cam).normalized();
  p.active = true;
  return p;
}

Message take_snapshot(const RoomState& state, uint32_t sender, uint64_t seq, uint64_t snapshot_id,
                      SnapshotKind kind, const std::string& payload_ref, const Posed& capture_pose,
                      const Intrinsics<double>& k) {
  const auto it = state.peers.find(sender);
  if (it == state.peers.end()) {
    throw StateError("take_snapshot: peer " + std::to_string(sender) + " not in room");
  }
  const EnvRep required =
      kind == SnapshotKind::kVideoFrame ? EnvRep::kVideoFeed : EnvRep::kHologram;
  if (it->second.env_rep != required) {
    throw StateError("take_snapshot: env stream inactive for requested snapshot kind");
  }
  SnapshotCreate body;
  body.snapshot_id = snapshot_id;
  body.kind = kind;
  body.capture_pose = capture_pose;
  body.intrinsics_digest = intrinsics_digest(k);
  body.payload_ref = payload_ref;
  return Message{sender, seq, body};
}

}  // namespace dualstream
