#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace dualstream {

// CRC-32 (IEEE 802.3, reflected, init/final 0xFFFFFFFF), slicing-by-8.
// crc32("123456789") == 0xCBF43926.
uint32_t crc32(std::span<const uint8_t> bytes, uint32_t seed = 0);

}  // namespace dualstream
