#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace dualstream {

struct Rgb {
  uint8_t r = 0;
  uint8_t g = 0;
  uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// 8-bit RGB, row-major, tightly packed (3 bytes per pixel).
struct ColorFrame {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  static ColorFrame filled(int w, int h, Rgb c);

  Rgb at(int x, int y) const {
    const size_t i = 3 * (static_cast<size_t>(y) * width + x);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const size_t i = 3 * (static_cast<size_t>(y) * width + x);
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
  }

  friend bool operator==(const ColorFrame&, const ColorFrame&) = default;
};

// 16-bit metric depth in millimeters, row-major. Sample value 0 means
// no reading at that pixel.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<uint16_t> samples;

  static DepthFrame filled(int w, int h, uint16_t mm);

  uint16_t at(int x, int y) const { return samples[static_cast<size_t>(y) * width + x]; }
  void set(int x, int y, uint16_t mm) { samples[static_cast<size_t>(y) * width + x] = mm; }

  friend bool operator==(const DepthFrame&, const DepthFrame&) = default;
};

// Binary PPM (P6), maxval 255.
ColorFrame read_ppm(std::istream& in);
ColorFrame read_ppm(const std::filesystem::path& path);
void write_ppm(std::ostream& out, const ColorFrame& f);
void write_ppm(const std::filesystem::path& path, const ColorFrame& f);

// Binary PGM (P5), maxval 65535, big-endian sample order per the PGM spec.
// Readers also accept maxval <= 255 single-byte rasters.
DepthFrame read_pgm16(std::istream& in);
DepthFrame read_pgm16(const std::filesystem::path& path);
void write_pgm16(std::ostream& out, const DepthFrame& f);
void write_pgm16(const std::filesystem::path& path, const DepthFrame& f);

}  // namespace dualstream
