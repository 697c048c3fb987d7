#include "dualstream/image.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "dualstream/error.hpp"

namespace dualstream {
namespace {

[[noreturn]] void bad(const std::string& what) { throw ParseError("netpbm: " + what); }

// Skips whitespace and '#' comment lines, then reads one decimal token.
int read_token(std::istream& in, const char* name) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    if (c != EOF) c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) bad(std::string("expected ") + name);
  long value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > std::numeric_limits<int>::max()) bad(std::string(name) + " out of range");
    c = in.get();
  }
  if (c != EOF) in.unget();
  return static_cast<int>(value);
}

void read_header(std::istream& in, char expected_kind, int& w, int& h, int& maxval) {
  int c0 = in.get();
  int c1 = in.get();
  if (c0 != 'P' || c1 != expected_kind) bad("bad magic");
  w = read_token(in, "width");
  h = read_token(in, "height");
  maxval = read_token(in, "maxval");
  if (w <= 0 || h <= 0) bad("non-positive dimensions");
  if (maxval <= 0 || maxval > 65535) bad("maxval out of range");
  // Exactly one whitespace byte separates the header from the raster.
  int sep = in.get();
  if (sep == EOF || !std::isspace(sep)) bad("missing raster separator");
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

ColorFrame ColorFrame::filled(int w, int h, Rgb c) {
  ColorFrame f;
  f.width = w;
  f.height = h;
  f.pixels.resize(static_cast<size_t>(w) * h * 3);
  for (size_t i = 0; i < f.pixels.size(); i += 3) {
    f.pixels[i] = c.r;
    f.pixels[i + 1] = c.g;
    f.pixels[i + 2] = c.b;
  }
  return f;
}

DepthFrame DepthFrame::filled(int w, int h, uint16_t mm) {
  DepthFrame f;
  f.width = w;
  f.height = h;
  f.samples.assign(static_cast<size_t>(w) * h, mm);
  return f;
}

ColorFrame read_ppm(std::istream& in) {
  int w, h, maxval;
  read_header(in, '6', w, h, maxval);
  if (maxval != 255) bad("ppm maxval must be 255");
  ColorFrame f;
  f.width = w;
  f.height = h;
  f.pixels.resize(static_cast<size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(f.pixels.size())) bad("short ppm raster");
  return f;
}

ColorFrame read_ppm(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_ppm(in);
}

void write_ppm(std::ostream& out, const ColorFrame& f) {
  out << "P6\n" << f.width << " " << f.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(f.pixels.data()),
            static_cast<std::streamsize>(f.pixels.size()));
}

void write_ppm(const std::filesystem::path& path, const ColorFrame& f) {
  auto out = open_out(path);
  write_ppm(out, f);
  if (!out) throw ParseError("write failed: " + path.string());
}

DepthFrame read_pgm16(std::istream& in) {
  int w, h, maxval;
  read_header(in, '5', w, h, maxval);
  DepthFrame f;
  f.width = w;
  f.height = h;
  f.samples.resize(static_cast<size_t>(w) * h);
  if (maxval > 255) {
    std::vector<uint8_t> raw(f.samples.size() * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) bad("short pgm raster");
    for (size_t i = 0; i < f.samples.size(); ++i) {
      f.samples[i] = static_cast<uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
  } else {
    std::vector<uint8_t> raw(f.samples.size());
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) bad("short pgm raster");
    for (size_t i = 0; i < f.samples.size(); ++i) f.samples[i] = raw[i];
  }
  return f;
}

DepthFrame read_pgm16(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_pgm16(in);
}

void write_pgm16(std::ostream& out, const DepthFrame& f) {
  out << "P5\n" << f.width << " " << f.height << "\n65535\n";
  std::vector<uint8_t> raw(f.samples.size() * 2);
  for (size_t i = 0; i < f.samples.size(); ++i) {
    raw[2 * i] = static_cast<uint8_t>(f.samples[i] >> 8);
    raw[2 * i + 1] = static_cast<uint8_t>(f.samples[i] & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

void write_pgm16(const std::filesystem::path& path, const DepthFrame& f) {
  auto out = open_out(path);
  write_pgm16(out, f);
  if (!out) throw ParseError("write failed: " + path.string());
}

}  // namespace dualstream
