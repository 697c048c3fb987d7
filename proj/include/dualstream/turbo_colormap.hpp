#pragma once

#include <array>

namespace dualstream {

// One row of the published 256-entry Turbo colormap (RGB in [0,1]).
struct TurboEntry {
  float r;
  float g;
  float b;
};

const std::array<TurboEntry, 256>& turbo_table();

// Piecewise-linear interpolation over the table at t in [0,1] (clamped),
// matching the reference implementation's resampling behavior.
TurboEntry turbo_sample(double t);

}  // namespace dualstream
