#include <doctest.h>

#include <algorithm>

#include "dualstream/error.hpp"
#include "dualstream/protocol.hpp"

using namespace dualstream;

namespace {

Message msg(uint32_t sender, uint64_t seq, MessageBody body) {
  return Message{sender, seq, std::move(body)};
}

RoomState apply_all(RoomState s, const std::vector<Message>& msgs) {
  for (const auto& m : msgs) s = apply(s, m);
  return s;
}

Posed test_pose() {
  return make_pose<double>({0.5, -0.1, 1.0},
                           Eigen::Quaterniond(Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitY())));
}

}  // namespace

TEST_CASE("join adds a peer with default representations") {
  const RoomState s = apply(RoomState{}, msg(7, 1, Join{}));
  REQUIRE(s.peers.count(7) == 1);
  const PeerState& p = s.peers.at(7);
  CHECK(p.self_rep == SelfRep::kHologram3D);
  CHECK(p.env_rep == EnvRep::kHologram);
  CHECK(p.mode == CallMode::kAr);
  CHECK(s.last_seen_seq.at(7) == 1);
}

TEST_CASE("join is idempotent and the room caps at four peers") {
  RoomState s;
  s = apply(s, msg(1, 1, Join{}));
  s = apply(s, msg(1, 2, Join{}));  // re-join: no-op beyond seq tracking
  CHECK(s.peers.size() == 1);
  s = apply(s, msg(2, 1, Join{}));
  s = apply(s, msg(3, 1, Join{}));
  s = apply(s, msg(4, 1, Join{}));
  CHECK(s.peers.size() == 4);
  CHECK_THROWS_AS(apply(s, msg(5, 1, Join{})), StateError);
}

TEST_CASE("messages from absent peers are rejected") {
  CHECK_THROWS_AS(apply(RoomState{}, msg(9, 1, PoseUpdate{test_pose(), 0})), StateError);
  CHECK_THROWS_AS(apply(RoomState{}, msg(9, 1, Leave{})), StateError);
}

TEST_CASE("duplicate and stale sequence numbers are dropped silently") {
  RoomState s = apply(RoomState{}, msg(1, 5, Join{}));
  const RoomState before = s;
  // Same seq, and an older one: both no-ops even with different bodies.
  s = apply(s, msg(1, 5, PoseUpdate{test_pose(), 99}));
  s = apply(s, msg(1, 3, Leave{}));
  CHECK(state_digest(s) == state_digest(before));
  CHECK(s.peers.count(1) == 1);
}

TEST_CASE("seq zero is never valid") {
  CHECK_THROWS_AS(apply(RoomState{}, msg(1, 0, Join{})), StateError);
}

TEST_CASE("pose updates are last-writer-wins by seq") {
  RoomState s = apply(RoomState{}, msg(1, 1, Join{}));
  const Posed p1 = test_pose();
  const Posed p2 = make_translation<double>(9, 9, 9);
  s = apply(s, msg(1, 3, PoseUpdate{p2, 30}));
  CHECK(approx_equal(s.peers.at(1).pose, p2));
  CHECK(s.peers.at(1).pose_seq == 3);
  CHECK(s.peers.at(1).last_seen_ts == 30);
  // An older update arriving late cannot regress the pose.
  s = apply(s, msg(1, 2, PoseUpdate{p1, 20}));
  CHECK(approx_equal(s.peers.at(1).pose, p2));
}

TEST_CASE("representation and mode changes take effect") {
  RoomState s = apply(RoomState{}, msg(1, 1, Join{}));
  s = apply(s, msg(1, 2, SelfRepChange{SelfRep::kSpatialVideo}));
  s = apply(s, msg(1, 3, EnvRepChange{EnvRep::kVideoFeed}));
  s = apply(s, msg(1, 4, ModeSwitch{CallMode::kScreen}));
  CHECK(s.peers.at(1).self_rep == SelfRep::kSpatialVideo);
  CHECK(s.peers.at(1).env_rep == EnvRep::kVideoFeed);
  CHECK(s.peers.at(1).mode == CallMode::kScreen);
}

TEST_CASE("snapshots outlive their creator") {
  RoomState s = apply(RoomState{}, msg(1, 1, Join{}));
  s = apply(s, msg(1, 2, SnapshotCreate{55, SnapshotKind::kHologram, test_pose(), 42, "ref"}));
  REQUIRE(s.snapshots.count(55) == 1);
  CHECK(s.snapshots.at(55).creator == 1);
  CHECK(s.snapshots.at(55).visible);
  s = apply(s, msg(1, 3, Leave{}));
  CHECK(s.peers.empty());
  CHECK(s.snapshots.count(55) == 1);  // snapshot survives
}

TEST_CASE("snapshot ids are unique; visibility and delete need the id") {
  RoomState s = apply(RoomState{}, msg(1, 1, Join{}));
  s = apply(s, msg(1, 2, SnapshotCreate{5, SnapshotKind::kVideoFrame, test_pose(), 0, "a"}));
  CHECK_THROWS_AS(
      apply(s, msg(1, 3, SnapshotCreate{5, SnapshotKind::kVideoFrame, test_pose(), 0, "b"})),
      StateError);
  s = apply(s, msg(1, 3, SnapshotVisibility{5, false}));
  CHECK_FALSE(s.snapshots.at(5).visible);
  CHECK_THROWS_AS(apply(s, msg(1, 4, SnapshotVisibility{99, true})), StateError);
  s = apply(s, msg(1, 4, SnapshotDelete{5}));
  CHECK(s.snapshots.empty());
  CHECK_THROWS_AS(apply(s, msg(1, 5, SnapshotDelete{5})), StateError);
}

TEST_CASE("every message body survives the wire byte-exactly") {
  const std::vector<Message> all = {
      msg(1, 1, Join{}),
      msg(2, 9, Leave{}),
      msg(3, 2, PoseUpdate{test_pose(), 123456}),
      msg(4, 3, SelfRepChange{SelfRep::kSpatialVideoNoBackground}),
      msg(5, 4, EnvRepChange{EnvRep::kOff}),
      msg(6, 5, ModeSwitch{CallMode::kScreen}),
      msg(7, 6, SnapshotCreate{77, SnapshotKind::kHologram, test_pose(), 42, "composite:7:3:env"}),
      msg(8, 7, SnapshotVisibility{77, false}),
      msg(9, 8, SnapshotDelete{77}),
      msg(10, 9, Pointer{{1, 2, 3}, Eigen::Vector3d(0, 0, 1), true}),
      msg(11, 10, AnchorRepositioned{}),
  };
  for (const auto& m : all) {
    const auto bytes = encode_message(m);
    const Message back = decode_message(bytes);
    CHECK(back == m);
    CHECK(encode_message(back) == bytes);
  }
}

TEST_CASE("decode rejects damaged or malformed buffers") {
  const auto good = encode_message(msg(3, 2, PoseUpdate{test_pose(), 9}));
  SUBCASE("flipped payload bit") {
    auto bytes = good;
    bytes[10] ^= 0x40;
    CHECK_THROWS_AS(decode_message(bytes), WireError);
  }
  SUBCASE("truncation") {
    auto bytes = good;
    bytes.resize(bytes.size() - 1);
    CHECK_THROWS_AS(decode_message(bytes), WireError);
  }
  SUBCASE("trailing bytes") {
    auto bytes = good;
    bytes.push_back(0);
    CHECK_THROWS_AS(decode_message(bytes), WireError);
  }
  SUBCASE("unknown tag") {
    auto bytes = good;
    bytes[0] = 200;
    CHECK_THROWS_AS(decode_message(bytes), WireError);
  }
  SUBCASE("empty") {
    CHECK_THROWS_AS(decode_message({}), WireError);
  }
}

TEST_CASE("decode validates semantic fields, not just structure") {
  // A non-unit quaternion written directly into a PoseUpdate.
  Message bad = msg(1, 1, PoseUpdate{test_pose(), 0});
  std::get<PoseUpdate>(bad.body).pose.rotation.w() += 0.5;
  CHECK_THROWS_AS(decode_message(encode_message(bad)), WireError);

  Message bad_enum = msg(1, 1, SelfRepChange{static_cast<SelfRep>(250)});
  CHECK_THROWS_AS(decode_message(encode_message(bad_enum)), WireError);
}

TEST_CASE("state serialization and digest are order-insensitive snapshots") {
  const std::vector<Message> a_then_b = {msg(1, 1, Join{}), msg(2, 1, Join{})};
  const std::vector<Message> b_then_a = {msg(2, 1, Join{}), msg(1, 1, Join{})};
  const RoomState s1 = apply_all(RoomState{}, a_then_b);
  const RoomState s2 = apply_all(RoomState{}, b_then_a);
  CHECK(serialize_state(s1) == serialize_state(s2));
  CHECK(state_digest(s1) == state_digest(s2));
  const RoomState s3 = apply(s1, msg(1, 2, ModeSwitch{CallMode::kScreen}));
  CHECK(state_digest(s3) != state_digest(s1));
}

TEST_CASE("interleavings of independent senders converge") {
  const std::vector<Message> from1 = {msg(1, 1, Join{}),
                                      msg(1, 2, PoseUpdate{test_pose(), 10}),
                                      msg(1, 3, SelfRepChange{SelfRep::kOff})};
  const std::vector<Message> from2 = {msg(2, 1, Join{}),
                                      msg(2, 2, EnvRepChange{EnvRep::kVideoFeed}),
                                      msg(2, 3, ModeSwitch{CallMode::kScreen})};
  // All 6-choose-3 order-preserving interleavings.
  std::vector<bool> pick(6, false);
  std::fill(pick.begin(), pick.begin() + 3, true);
  std::sort(pick.begin(), pick.end());
  uint64_t reference = 0;
  int count = 0;
  do {
    std::vector<Message> seq;
    size_t i = 0, j = 0;
    for (bool take_first : pick) {
      seq.push_back(take_first ? from1[i++] : from2[j++]);
    }
    const uint64_t digest = state_digest(apply_all(RoomState{}, seq));
    if (count++ == 0) {
      reference = digest;
    } else {
      CHECK(digest == reference);
    }
  } while (std::next_permutation(pick.begin(), pick.end()));
  CHECK(count == 20);
}

TEST_CASE("replaying a log over the final state changes nothing") {
  const std::vector<Message> log = {msg(1, 1, Join{}), msg(2, 1, Join{}),
                                    msg(1, 2, PoseUpdate{test_pose(), 5}),
                                    msg(2, 2, SnapshotCreate{1, SnapshotKind::kVideoFrame,
                                                             test_pose(), 0, "r"}),
                                    msg(1, 3, Leave{})};
  const RoomState once = apply_all(RoomState{}, log);
  const RoomState twice = apply_all(once, log);
  CHECK(serialize_state(once) == serialize_state(twice));
}

TEST_CASE("point_at shoots unit rays from the device position") {
  const auto k = intrinsics_from_fov<double>(69.0, 42.0, 640, 480);
  const Posed pose = make_translation<double>(1, 2, 3);
  const Pointer center = point_at(320, 240, k, pose);
  CHECK((center.origin - Eigen::Vector3d(1, 2, 3)).norm() < 1e-12);
  CHECK((center.direction - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
  const Pointer corner = point_at(0, 0, k, pose);
  CHECK(corner.direction.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(corner.direction.x() < 0);
  CHECK(corner.direction.y() < 0);
  CHECK_THROWS_AS(point_at(-1, 0, k, pose), ParseError);
  CHECK_THROWS_AS(point_at(640, 0, k, pose), ParseError);
}

TEST_CASE("take_snapshot requires the matching env stream to be active") {
  RoomState s = apply(RoomState{}, msg(1, 1, Join{}));
  const auto k = intrinsics_from_fov<double>(69.0, 42.0, 640, 480);
  // Default env rep is Hologram: hologram snapshots work, video frames not.
  const Message ok = take_snapshot(s, 1, 2, 10, SnapshotKind::kHologram, "ref", test_pose(), k);
  CHECK(std::get<SnapshotCreate>(ok.body).intrinsics_digest == intrinsics_digest(k));
  CHECK_THROWS_AS(take_snapshot(s, 1, 2, 10, SnapshotKind::kVideoFrame, "ref", test_pose(), k),
                  StateError);
  s = apply(s, msg(1, 2, EnvRepChange{EnvRep::kVideoFeed}));
  CHECK_NOTHROW(take_snapshot(s, 1, 3, 11, SnapshotKind::kVideoFrame, "ref", test_pose(), k));
  CHECK_THROWS_AS(take_snapshot(s, 1, 3, 11, SnapshotKind::kHologram, "ref", test_pose(), k),
                  StateError);
  s = apply(s, msg(1, 3, EnvRepChange{EnvRep::kOff}));
  CHECK_THROWS_AS(take_snapshot(s, 1, 4, 12, SnapshotKind::kHologram, "ref", test_pose(), k),
                  StateError);
  CHECK_THROWS_AS(take_snapshot(s, 2, 1, 13, SnapshotKind::kHologram, "ref", test_pose(), k),
                  StateError);  // sender not in the room
}

TEST_CASE("pointer and anchor messages do not mutate shared state") {
  RoomState s = apply(RoomState{}, msg(1, 1, Join{}));
  const uint64_t before = state_digest(s);
  RoomState s2 = apply(s, msg(1, 2, Pointer{{0, 0, 0}, Eigen::Vector3d(0, 0, 1), true}));
  RoomState s3 = apply(s2, msg(1, 3, AnchorRepositioned{}));
  // Only the seq bookkeeping moves; peers and snapshots stay identical.
  CHECK(s3.peers.size() == s.peers.size());
  CHECK(s3.snapshots.empty());
  CHECK(state_digest(s3) != before);  // last_seen_seq is part of the digest
  CHECK(s3.last_seen_seq.at(1) == 3);
}
