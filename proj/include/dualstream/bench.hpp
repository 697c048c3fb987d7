#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dualstream {

// Wall-clock throughput of the full receive loop on synthetic frames:
// encode -> pack -> serialize -> parse -> unpack -> decode -> reconstruct,
// with all four quadrants at width x height.
struct BenchReport {
  int width = 0;
  int height = 0;
  uint64_t iterations = 0;
  double total_ms = 0;
  double fps = 0;  // iterations / elapsed seconds
  std::vector<std::pair<std::string, double>> stage_ms;  // cumulative per stage
  uint64_t cloud_points = 0;  // points in the last reconstruction (output sink)
};

BenchReport run_bench(int width, int height, uint64_t iterations);

std::string bench_to_string(const BenchReport& r);

}  // namespace dualstream
