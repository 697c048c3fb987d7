#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualstream/config.hpp"
#include "dualstream/geometry.hpp"
#include "dualstream/image.hpp"

namespace dualstream {

enum class ColorScheme { kTurboHue, kLinearGray };

std::string scheme_name(ColorScheme s);
ColorScheme scheme_from_name(const std::string& name);  // throws ParseError

struct ColorizationParams {
  ColorScheme scheme = ColorScheme::kTurboHue;
  double d_max_m = 2.0;
  int lut_bins = 256;
  Rgb invalid_color{0, 0, 0};
};

// Range profiles from the two capture directions: front-facing self stream
// and rear-facing environment stream.
ColorizationParams self_profile();  // TurboHue, d_max 0.8 m
ColorizationParams env_profile();   // TurboHue, d_max 2.0 m

// Keys: scheme, d_max_m, lut_bins, invalid_color ("r,g,b"). Missing keys
// take the defaults above. Unknown keys are rejected.
ColorizationParams params_from_config(const Config& cfg);
void validate_params(const ColorizationParams& p);  // throws ParseError
uint64_t params_digest(const ColorizationParams& p);

// Worst-case clean-channel round-trip error: d_max/(2*(lut_bins-1)).
double quantization_bound(const ColorizationParams& p);

class ColorLUT {
 public:
  explicit ColorLUT(const ColorizationParams& params);

  const ColorizationParams& params() const { return params_; }
  int bins() const { return static_cast<int>(entries_.size()); }
  Rgb entry(int i) const { return entries_[static_cast<size_t>(i)]; }

  // Encode-side binning; 0 mm (invalid) -> -1, beyond d_max clamps to the
  // last bin.
  int bin_for_depth_mm(uint16_t mm) const;
  // Decode-side nearest entry by squared-L2 RGB distance; strictly nearer
  // to invalid_color than to every entry -> -1; ties -> lowest entry index.
  int nearest_bin(Rgb c) const;

  double bin_center_m(int bin) const;       // (bin/(bins-1))*d_max; -1 -> 0
  uint16_t depth_mm_for_bin(int bin) const; // round(1000*bin_center_m)

  // Minimum squared L2 distance between distinct entries (exact integer).
  int64_t min_inter_entry_dist_sq() const;

 private:
  void insert_exact(uint32_t key, int bin);
  int find_exact(uint32_t key) const;

  ColorizationParams params_;
  std::vector<Rgb> entries_;
  // Decode runs per pixel at video rates, so both lookups are plain arrays:
  // a dense mm -> bin table for the encoder and an open-addressed exact-color
  // probe table (entries + invalid_color) for the clean decode path.
  std::vector<int32_t> mm_to_bin_;
  std::vector<uint16_t> bin_mm_;
  std::vector<uint32_t> slot_key_;
  std::vector<int32_t> slot_bin_;
  uint32_t slot_mask_ = 0;
};

ColorFrame encode_depth(const DepthFrame& d, const ColorLUT& lut);
ColorFrame encode_depth(const DepthFrame& d, const ColorizationParams& p);
DepthFrame decode_depth(const ColorFrame& c, const ColorLUT& lut);
DepthFrame decode_depth(const ColorFrame& c, const ColorizationParams& p);
// Per-pixel decoded bin indices (-1 = invalid); the lossless intermediate
// the metric pipeline consumes.
std::vector<int> decode_bins(const ColorFrame& c, const ColorLUT& lut);

// Resample `src` so pixel (u,v) of the result views the same ray under
// `dst_k` as the source did under `src_k`; optical centers are assumed
// co-located. Depth uses nearest-neighbor, color bilinear sampling.
// Throws ParseError when dst rays fall outside the source frame.
ColorFrame align_to_reference(const ColorFrame& src, const Intrinsics<double>& src_k,
                              const Intrinsics<double>& dst_k);
DepthFrame align_to_reference(const DepthFrame& src, const Intrinsics<double>& src_k,
                              const Intrinsics<double>& dst_k);

}  // namespace dualstream
