#include "dualstream/depth_codec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dualstream/error.hpp"
#include "dualstream/hash.hpp"
#include "dualstream/turbo_colormap.hpp"

namespace dualstream {
namespace {

constexpr int kMaxBins = 65536;

// Probe-table sentinels. Packed colors never exceed 0x00FFFFFF, so an
// all-ones key marks a vacant slot; kNoSlot is distinct from the -1 used
// for the invalid color.
constexpr uint32_t kVacantKey = 0xFFFFFFFFu;
constexpr int kNoSlot = -2;

uint32_t pack_rgb(Rgb c) {
  return (static_cast<uint32_t>(c.r) << 16) | (static_cast<uint32_t>(c.g) << 8) | c.b;
}

uint32_t mix_key(uint32_t key) {
  key *= 0x9E3779B9u;
  return key ^ (key >> 16);
}

int64_t dist_sq(Rgb a, Rgb b) {
  const int64_t dr = int(a.r) - int(b.r);
  const int64_t dg = int(a.g) - int(b.g);
  const int64_t db = int(a.b) - int(b.b);
  return dr * dr + dg * dg + db * db;
}

int l1_dist(Rgb a, Rgb b) {
  return std::abs(int(a.r) - int(b.r)) + std::abs(int(a.g) - int(b.g)) +
         std::abs(int(a.b) - int(b.b));
}

uint8_t to_u8(double v) {
  return static_cast<uint8_t>(std::clamp<long>(std::lround(v * 255.0), 0, 255));
}

Rgb sample_scheme(ColorScheme scheme, double t) {
  if (scheme == ColorScheme::kLinearGray) {
    const uint8_t g = to_u8(t);
    return {g, g, g};
  }
  const TurboEntry e = turbo_sample(t);
  return {to_u8(e.r), to_u8(e.g), to_u8(e.b)};
}

std::string double_repr(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::string scheme_name(ColorScheme s) {
  return s == ColorScheme::kTurboHue ? "TurboHue" : "LinearGray";
}

ColorScheme scheme_from_name(const std::string& name) {
  if (name == "TurboHue" || name == "turbo") return ColorScheme::kTurboHue;
  if (name == "LinearGray" || name == "gray") return ColorScheme::kLinearGray;
  throw ParseError("unknown scheme '" + name + "' (expected TurboHue or LinearGray)");
}

ColorizationParams self_profile() { return {ColorScheme::kTurboHue, 0.8, 256, {0, 0, 0}}; }
ColorizationParams env_profile() { return {ColorScheme::kTurboHue, 2.0, 256, {0, 0, 0}}; }

ColorizationParams params_from_config(const Config& cfg) {
  cfg.require_known({"scheme", "d_max_m", "lut_bins", "invalid_color"});
  ColorizationParams p;
  if (cfg.has("scheme")) p.scheme = scheme_from_name(cfg.get_str("scheme"));
  p.d_max_m = cfg.get_double("d_max_m", p.d_max_m);
  p.lut_bins = static_cast<int>(cfg.get_int("lut_bins", p.lut_bins));
  if (cfg.has("invalid_color")) {
    const std::string& raw = cfg.get_str("invalid_color");
    int r, g, b;
    char tail;
    if (std::sscanf(raw.c_str(), "%d,%d,%d%c", &r, &g, &b, &tail) != 3 || r < 0 || r > 255 ||
        g < 0 || g > 255 || b < 0 || b > 255) {
      throw ParseError("invalid_color must be 'r,g,b' with components in 0..255, got '" + raw +
                       "'");
    }
    p.invalid_color = {static_cast<uint8_t>(r), static_cast<uint8_t>(g), static_cast<uint8_t>(b)};
  }
  validate_params(p);
  return p;
}

void validate_params(const ColorizationParams& p) {
  if (!(p.d_max_m > 0.0) || !std::isfinite(p.d_max_m)) {
    throw ParseError("d_max_m must be positive and finite");
  }
  if (p.lut_bins < 2 || p.lut_bins > kMaxBins) {
    throw ParseError("lut_bins must be in 2.." + std::to_string(kMaxBins));
  }
}

uint64_t params_digest(const ColorizationParams& p) {
  const std::string canon = "scheme=" + scheme_name(p.scheme) + ";d_max_m=" +
                            double_repr(p.d_max_m) + ";lut_bins=" + std::to_string(p.lut_bins) +
                            ";invalid=" + std::to_string(p.invalid_color.r) + "," +
                            std::to_string(p.invalid_color.g) + "," +
                            std::to_string(p.invalid_color.b);
  return fnv1a64(canon);
}

double quantization_bound(const ColorizationParams& p) {
  return p.d_max_m / (2.0 * (p.lut_bins - 1));
}

ColorLUT::ColorLUT(const ColorizationParams& params) : params_(params) {
  validate_params(params_);
  const int bins = params_.lut_bins;
  entries_.reserve(static_cast<size_t>(bins));
  for (int i = 0; i < bins; ++i) {
    entries_.push_back(sample_scheme(params_.scheme, double(i) / (bins - 1)));
  }

  uint32_t slots = 64;
  while (slots < static_cast<uint32_t>(bins) * 4) slots *= 2;
  slot_key_.assign(slots, kVacantKey);
  slot_bin_.assign(slots, 0);
  slot_mask_ = slots - 1;
  for (int i = 0; i < bins; ++i) {
    const uint32_t key = pack_rgb(entries_[static_cast<size_t>(i)]);
    if (find_exact(key) >= 0) {
      throw ParseError("duplicate LUT entries: lut_bins=" + std::to_string(bins) +
                       " exceeds the distinguishable resolution of " + scheme_name(params_.scheme));
    }
    insert_exact(key, i);
  }
  // Exact invalid_color pixels decode to invalid unless the color is itself
  // a LUT entry (then the tie goes to the entry, per the strictly-nearer rule).
  if (find_exact(pack_rgb(params_.invalid_color)) == kNoSlot) {
    insert_exact(pack_rgb(params_.invalid_color), -1);
  }

  bin_mm_.resize(static_cast<size_t>(bins));
  for (int i = 0; i < bins; ++i) {
    const long mm = std::lround(1000.0 * double(i) / (bins - 1) * params_.d_max_m);
    bin_mm_[static_cast<size_t>(i)] = static_cast<uint16_t>(std::clamp(mm, 0L, 65535L));
  }
  mm_to_bin_.resize(65536);
  mm_to_bin_[0] = -1;
  for (int mm = 1; mm < 65536; ++mm) {
    const double d = mm / 1000.0;
    mm_to_bin_[static_cast<size_t>(mm)] =
        d >= params_.d_max_m ? bins - 1
                             : static_cast<int32_t>(std::lround(d / params_.d_max_m * (bins - 1)));
  }

  // The invalid color must sit clearly off the colormap curve. LinearGray
  // with the default black invalid is the one sanctioned exception: its ramp
  // begins at black by construction, so the near-black entries are skipped
  // from the check. That costs nothing semantically — bin 0 decodes to 0 mm,
  // the same "no reading" value the invalid color stands for. (Entries
  // within the threshold of black are necessarily that dark end, so skipping
  // them equals skipping the whole scan.)
  const bool inherent_black = params_.scheme == ColorScheme::kLinearGray &&
                              params_.invalid_color == Rgb{0, 0, 0};
  if (!inherent_black) {
    for (int i = 0; i < bins; ++i) {
      if (l1_dist(entries_[static_cast<size_t>(i)], params_.invalid_color) < 32) {
        throw ParseError("invalid_color too close to LUT entry " + std::to_string(i) +
                         " (channel-sum distance < 32)");
      }
    }
  }
}

void ColorLUT::insert_exact(uint32_t key, int bin) {
  uint32_t i = mix_key(key) & slot_mask_;
  while (slot_key_[i] != kVacantKey) i = (i + 1) & slot_mask_;
  slot_key_[i] = key;
  slot_bin_[i] = bin;
}

int ColorLUT::find_exact(uint32_t key) const {
  uint32_t i = mix_key(key) & slot_mask_;
  while (true) {
    if (slot_key_[i] == key) return slot_bin_[i];
    if (slot_key_[i] == kVacantKey) return kNoSlot;
    i = (i + 1) & slot_mask_;
  }
}

int ColorLUT::bin_for_depth_mm(uint16_t mm) const { return mm_to_bin_[mm]; }

int ColorLUT::nearest_bin(Rgb c) const {
  const int hit = find_exact(pack_rgb(c));
  if (hit != kNoSlot) return hit;
  const int64_t d_inv = dist_sq(c, params_.invalid_color);
  int64_t best = std::numeric_limits<int64_t>::max();
  int best_bin = -1;
  for (int i = 0; i < bins(); ++i) {
    const int64_t d = dist_sq(c, entries_[static_cast<size_t>(i)]);
    if (d < best) {
      best = d;
      best_bin = i;
    }
  }
  return d_inv < best ? -1 : best_bin;
}

double ColorLUT::bin_center_m(int bin) const {
  if (bin < 0) return 0.0;
  return double(bin) / (bins() - 1) * params_.d_max_m;
}

uint16_t ColorLUT::depth_mm_for_bin(int bin) const {
  return bin < 0 ? 0 : bin_mm_[static_cast<size_t>(bin)];
}

int64_t ColorLUT::min_inter_entry_dist_sq() const {
  int64_t best = std::numeric_limits<int64_t>::max();
  for (size_t i = 0; i < entries_.size(); ++i) {
    for (size_t j = i + 1; j < entries_.size(); ++j) {
      best = std::min(best, dist_sq(entries_[i], entries_[j]));
    }
  }
  return best;
}

ColorFrame encode_depth(const DepthFrame& d, const ColorLUT& lut) {
  ColorFrame out;
  out.width = d.width;
  out.height = d.height;
  out.pixels.resize(d.samples.size() * 3);
  for (size_t i = 0; i < d.samples.size(); ++i) {
    const int bin = lut.bin_for_depth_mm(d.samples[i]);
    const Rgb c = bin < 0 ? lut.params().invalid_color : lut.entry(bin);
    out.pixels[3 * i] = c.r;
    out.pixels[3 * i + 1] = c.g;
    out.pixels[3 * i + 2] = c.b;
  }
  return out;
}

ColorFrame encode_depth(const DepthFrame& d, const ColorizationParams& p) {
  return encode_depth(d, ColorLUT(p));
}

std::vector<int> decode_bins(const ColorFrame& c, const ColorLUT& lut) {
  const size_t n = c.pixels.size() / 3;
  std::vector<int> bins(n);
  for (size_t i = 0; i < n; ++i) {
    bins[i] = lut.nearest_bin({c.pixels[3 * i], c.pixels[3 * i + 1], c.pixels[3 * i + 2]});
  }
  return bins;
}

DepthFrame decode_depth(const ColorFrame& c, const ColorLUT& lut) {
  DepthFrame out;
  out.width = c.width;
  out.height = c.height;
  out.samples.resize(c.pixels.size() / 3);
  for (size_t i = 0; i < out.samples.size(); ++i) {
    const int bin =
        lut.nearest_bin({c.pixels[3 * i], c.pixels[3 * i + 1], c.pixels[3 * i + 2]});
    out.samples[i] = lut.depth_mm_for_bin(bin);
  }
  return out;
}

DepthFrame decode_depth(const ColorFrame& c, const ColorizationParams& p) {
  return decode_depth(c, ColorLUT(p));
}

namespace {

struct AxisMap {
  double scale;
  double offset;
  double map(double v) const { return scale * v + offset; }
};

// u_src = cx_s + fx_s*(u_dst - cx_d)/fx_d: the same optical ray expressed
// in source pixel coordinates.
void make_maps(const Intrinsics<double>& src_k, const Intrinsics<double>& dst_k, AxisMap& ux,
               AxisMap& vy) {
  if (!intrinsics_are_valid(src_k) || !intrinsics_are_valid(dst_k)) {
    throw ParseError("align_to_reference: invalid intrinsics");
  }
  ux = {src_k.fx / dst_k.fx, src_k.cx - src_k.fx * dst_k.cx / dst_k.fx};
  vy = {src_k.fy / dst_k.fy, src_k.cy - src_k.fy * dst_k.cy / dst_k.fy};
  const double eps = 1e-9;
  const auto covered = [eps](double lo, double hi, int n) {
    return lo >= -0.5 - eps && hi <= n - 0.5 + eps;
  };
  const double u0 = ux.map(0), u1 = ux.map(dst_k.width - 1);
  const double v0 = vy.map(0), v1 = vy.map(dst_k.height - 1);
  if (!covered(std::min(u0, u1), std::max(u0, u1), src_k.width) ||
      !covered(std::min(v0, v1), std::max(v0, v1), src_k.height)) {
    throw ParseError("align_to_reference: destination FOV not covered by source frame");
  }
}

}  // namespace

ColorFrame align_to_reference(const ColorFrame& src, const Intrinsics<double>& src_k,
                              const Intrinsics<double>& dst_k) {
  AxisMap ux, vy;
  make_maps(src_k, dst_k, ux, vy);
  ColorFrame out;
  out.width = dst_k.width;
  out.height = dst_k.height;
  out.pixels.resize(static_cast<size_t>(out.width) * out.height * 3);
  for (int v = 0; v < out.height; ++v) {
    const double sy = vy.map(v);
    const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, src.height - 1);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double fy = std::clamp(sy - y0, 0.0, 1.0);
    for (int u = 0; u < out.width; ++u) {
      const double sx = ux.map(u);
      const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, src.width - 1);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double fx = std::clamp(sx - x0, 0.0, 1.0);
      const Rgb c00 = src.at(x0, y0), c10 = src.at(x1, y0);
      const Rgb c01 = src.at(x0, y1), c11 = src.at(x1, y1);
      const auto blend = [&](uint8_t a, uint8_t b, uint8_t c, uint8_t d) {
        const double top = a * (1.0 - fx) + b * fx;
        const double bot = c * (1.0 - fx) + d * fx;
        return static_cast<uint8_t>(std::clamp<long>(
            std::lround(top * (1.0 - fy) + bot * fy), 0, 255));
      };
      out.set(u, v, {blend(c00.r, c10.r, c01.r, c11.r), blend(c00.g, c10.g, c01.g, c11.g),
                     blend(c00.b, c10.b, c01.b, c11.b)});
    }
  }
  return out;
}

DepthFrame align_to_reference(const DepthFrame& src, const Intrinsics<double>& src_k,
                              const Intrinsics<double>& dst_k) {
  AxisMap ux, vy;
  make_maps(src_k, dst_k, ux, vy);
  DepthFrame out;
  out.width = dst_k.width;
  out.height = dst_k.height;
  out.samples.resize(static_cast<size_t>(out.width) * out.height);
  for (int v = 0; v < out.height; ++v) {
    const int sy = std::clamp(static_cast<int>(std::lround(vy.map(v))), 0, src.height - 1);
    for (int u = 0; u < out.width; ++u) {
      const int sx = std::clamp(static_cast<int>(std::lround(ux.map(u))), 0, src.width - 1);
      out.set(u, v, src.at(sx, sy));
    }
  }
  return out;
}

}  // namespace dualstream
