#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "dualstream/image.hpp"

namespace dualstream {

inline constexpr uint16_t kCompositeWireVersion = 1;
inline constexpr int kMaxQuadrantDim = 4096;

// 2x2 layout: quadrant index -> position in the composite plane.
enum Quadrant : int {
  kSelfColor = 0,  // top-left
  kSelfDepth = 1,  // top-right
  kEnvColor = 2,   // bottom-left
  kEnvDepth = 3,   // bottom-right
};

struct QuadrantRecord {
  bool present = false;
  uint16_t width = 0;
  uint16_t height = 0;
  uint64_t params_digest = 0;  // ColorizationParams digest for depth quadrants

  friend bool operator==(const QuadrantRecord&, const QuadrantRecord&) = default;
};

// One synchronized bundle of the four per-peer sub-frames. All quadrants
// share the timestamp and seq; that sharing is the synchronization
// guarantee.
struct CompositeFrame {
  uint64_t seq = 0;
  uint64_t timestamp_us = 0;  // microseconds since session start
  std::array<QuadrantRecord, 4> quadrants;
  ColorFrame payload;  // (2*cell_w) x (2*cell_h), absent areas black

  int cell_width() const;   // max width over present quadrants
  int cell_height() const;  // max height over present quadrants

  friend bool operator==(const CompositeFrame&, const CompositeFrame&) = default;
};

struct UnpackedComposite {
  uint64_t seq = 0;
  uint64_t timestamp_us = 0;
  std::array<std::optional<ColorFrame>, 4> frames;
  std::array<uint64_t, 4> digests{};
};

// Throws ParseError when all four are absent or any present quadrant is
// empty or larger than kMaxQuadrantDim. Depth-quadrant digests identify the
// ColorizationParams the decoder must use.
CompositeFrame pack(const std::optional<ColorFrame>& self_color,
                    const std::optional<ColorFrame>& self_depth,
                    const std::optional<ColorFrame>& env_color,
                    const std::optional<ColorFrame>& env_depth, uint64_t timestamp_us,
                    uint64_t seq, uint64_t self_depth_digest = 0, uint64_t env_depth_digest = 0);

UnpackedComposite unpack(const CompositeFrame& f);

// Wire layout (little-endian), CRC32 over everything before the trailer:
//
//   0       4       6            14           22
//   +-------+-------+------------+------------+----------------------+
//   | DSCF  | ver   | seq        | ts_us      | 4x quadrant record   |
//   | 4B    | u16   | u64        | u64        | (u8,u16,u16,u64) x 4 |
//   +-------+-------+------------+------------+----------------------+
//   | payload_len u32 | payload RGB bytes ... | crc32 u32            |
//   +-----------------+-----------------------+----------------------+
std::vector<uint8_t> serialize(const CompositeFrame& f);
CompositeFrame parse_composite(const std::vector<uint8_t>& bytes);

}  // namespace dualstream
