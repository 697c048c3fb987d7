#include "dualstream/composite.hpp"

#include <algorithm>
#include <cstring>

#include "dualstream/bytes.hpp"
#include "dualstream/crc32.hpp"
#include "dualstream/error.hpp"

namespace dualstream {
namespace {

constexpr char kMagic[4] = {'D', 'S', 'C', 'F'};

struct QuadrantOrigin {
  int x;
  int y;
};

QuadrantOrigin origin(Quadrant q, int cell_w, int cell_h) {
  switch (q) {
    case kSelfColor: return {0, 0};
    case kSelfDepth: return {cell_w, 0};
    case kEnvColor: return {0, cell_h};
    case kEnvDepth: return {cell_w, cell_h};
  }
  return {0, 0};
}

void blit(ColorFrame& dst, const ColorFrame& src, int x0, int y0) {
  for (int y = 0; y < src.height; ++y) {
    const uint8_t* s = src.pixels.data() + static_cast<size_t>(y) * src.width * 3;
    uint8_t* d =
        dst.pixels.data() + (static_cast<size_t>(y0 + y) * dst.width + x0) * 3;
    std::memcpy(d, s, static_cast<size_t>(src.width) * 3);
  }
}

ColorFrame extract(const ColorFrame& src, int x0, int y0, int w, int h) {
  ColorFrame out;
  out.width = w;
  out.height = h;
  out.pixels.resize(static_cast<size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    const uint8_t* s = src.pixels.data() + (static_cast<size_t>(y0 + y) * src.width + x0) * 3;
    std::memcpy(out.pixels.data() + static_cast<size_t>(y) * w * 3, s,
                static_cast<size_t>(w) * 3);
  }
  return out;
}

int cell_extent(const std::array<QuadrantRecord, 4>& records, bool width) {
  int extent = 0;
  for (const auto& r : records) {
    if (r.present) extent = std::max(extent, int(width ? r.width : r.height));
  }
  return extent;
}

}  // namespace

int CompositeFrame::cell_width() const { return cell_extent(quadrants, true); }
int CompositeFrame::cell_height() const { return cell_extent(quadrants, false); }

CompositeFrame pack(const std::optional<ColorFrame>& self_color,
                    const std::optional<ColorFrame>& self_depth,
                    const std::optional<ColorFrame>& env_color,
                    const std::optional<ColorFrame>& env_depth, uint64_t timestamp_us,
                    uint64_t seq, uint64_t self_depth_digest, uint64_t env_depth_digest) {
  const std::array<const std::optional<ColorFrame>*, 4> inputs = {&self_color, &self_depth,
                                                                  &env_color, &env_depth};
  const std::array<uint64_t, 4> digests = {0, self_depth_digest, 0, env_depth_digest};

  CompositeFrame f;
  f.seq = seq;
  f.timestamp_us = timestamp_us;
  bool any = false;
  for (int q = 0; q < 4; ++q) {
    const auto& in = *inputs[static_cast<size_t>(q)];
    auto& rec = f.quadrants[static_cast<size_t>(q)];
    if (!in.has_value()) continue;
    if (in->width <= 0 || in->height <= 0) {
      throw ParseError("pack: present quadrant " + std::to_string(q) + " is empty");
    }
    if (in->width > kMaxQuadrantDim || in->height > kMaxQuadrantDim) {
      throw ParseError("pack: quadrant " + std::to_string(q) + " exceeds max dimension " +
                       std::to_string(kMaxQuadrantDim));
    }
    if (in->pixels.size() != static_cast<size_t>(in->width) * in->height * 3) {
      throw ParseError("pack: quadrant " + std::to_string(q) + " has inconsistent buffer size");
    }
    rec.present = true;
    rec.width = static_cast<uint16_t>(in->width);
    rec.height = static_cast<uint16_t>(in->height);
    rec.params_digest = digests[static_cast<size_t>(q)];
    any = true;
  }
  if (!any) throw ParseError("pack: all four quadrants absent");

  const int cw = f.cell_width();
  const int ch = f.cell_height();
  f.payload = ColorFrame::filled(2 * cw, 2 * ch, {0, 0, 0});
  for (int q = 0; q < 4; ++q) {
    const auto& in = *inputs[static_cast<size_t>(q)];
    if (!in.has_value()) continue;
    const auto o = origin(static_cast<Quadrant>(q), cw, ch);
    blit(f.payload, *in, o.x, o.y);
  }
  return f;
}

UnpackedComposite unpack(const CompositeFrame& f) {
  const int cw = f.cell_width();
  const int ch = f.cell_height();
  if (f.payload.width != 2 * cw || f.payload.height != 2 * ch ||
      f.payload.pixels.size() != static_cast<size_t>(f.payload.width) * f.payload.height * 3) {
    throw ParseError("unpack: payload dimensions inconsistent with quadrant records");
  }
  UnpackedComposite out;
  out.seq = f.seq;
  out.timestamp_us = f.timestamp_us;
  for (int q = 0; q < 4; ++q) {
    const auto& rec = f.quadrants[static_cast<size_t>(q)];
    out.digests[static_cast<size_t>(q)] = rec.params_digest;
    if (!rec.present) continue;
    const auto o = origin(static_cast<Quadrant>(q), cw, ch);
    out.frames[static_cast<size_t>(q)] = extract(f.payload, o.x, o.y, rec.width, rec.height);
  }
  return out;
}

std::vector<uint8_t> serialize(const CompositeFrame& f) {
  ByteWriter w;
  w.reserve(82 + f.payload.pixels.size());  // header + payload + crc, no reallocs
  w.bytes(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(kMagic), 4));
  w.u16(kCompositeWireVersion);
  w.u64(f.seq);
  w.u64(f.timestamp_us);
  for (const auto& rec : f.quadrants) {
    w.u8(rec.present ? 1 : 0);
    w.u16(rec.width);
    w.u16(rec.height);
    w.u64(rec.params_digest);
  }
  w.u32(static_cast<uint32_t>(f.payload.pixels.size()));
  w.bytes(std::span<const uint8_t>(f.payload.pixels.data(), f.payload.pixels.size()));
  std::vector<uint8_t> out = w.take();
  const uint32_t crc = crc32(std::span<const uint8_t>(out.data(), out.size()));
  ByteWriter trailer;
  trailer.u32(crc);
  const auto t = trailer.take();
  out.insert(out.end(), t.begin(), t.end());
  return out;
}

CompositeFrame parse_composite(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 4) throw WireError("truncated composite: missing magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw WireError("bad composite magic");
  if (bytes.size() < 4 + 2 + 8 + 8 + 4 * 13 + 4 + 4) {
    throw WireError("truncated composite header");
  }
  const uint32_t stored_crc = uint32_t(bytes[bytes.size() - 4]) |
                              (uint32_t(bytes[bytes.size() - 3]) << 8) |
                              (uint32_t(bytes[bytes.size() - 2]) << 16) |
                              (uint32_t(bytes[bytes.size() - 1]) << 24);
  const uint32_t actual_crc =
      crc32(std::span<const uint8_t>(bytes.data(), bytes.size() - 4));
  if (stored_crc != actual_crc) throw WireError("composite checksum mismatch");

  ByteReader r(std::span<const uint8_t>(bytes.data(), bytes.size() - 4));
  r.bytes(4);  // magic, already checked
  const uint16_t version = r.u16();
  if (version != kCompositeWireVersion) {
    throw WireError("unsupported composite version " + std::to_string(version));
  }
  CompositeFrame f;
  f.seq = r.u64();
  f.timestamp_us = r.u64();
  for (auto& rec : f.quadrants) {
    const uint8_t present = r.u8();
    if (present > 1) throw WireError("bad present flag");
    rec.present = present == 1;
    rec.width = r.u16();
    rec.height = r.u16();
    rec.params_digest = r.u64();
    if (rec.present && (rec.width == 0 || rec.height == 0)) {
      throw WireError("present quadrant with zero dimension");
    }
    if (rec.width > kMaxQuadrantDim || rec.height > kMaxQuadrantDim) {
      throw WireError("quadrant dimension exceeds limit");
    }
  }
  const int cw = f.cell_width();
  const int ch = f.cell_height();
  if (cw == 0 || ch == 0) throw WireError("composite with all quadrants absent");
  const uint32_t payload_len = r.u32();
  const size_t expected = static_cast<size_t>(2 * cw) * (2 * ch) * 3;
  if (payload_len != expected) throw WireError("payload length inconsistent with records");
  if (r.remaining() != payload_len) throw WireError("truncated composite payload");
  f.payload.width = 2 * cw;
  f.payload.height = 2 * ch;
  const auto raw = r.bytes(expected);
  f.payload.pixels.assign(raw.begin(), raw.end());
  return f;
}

}  // namespace dualstream
