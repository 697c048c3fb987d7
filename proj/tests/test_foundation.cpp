#include <doctest.h>

#include <cstring>
#include <sstream>

#include "dualstream/bytes.hpp"
#include "dualstream/config.hpp"
#include "dualstream/crc32.hpp"
#include "dualstream/error.hpp"
#include "dualstream/hash.hpp"
#include "dualstream/rng.hpp"

using namespace dualstream;

TEST_CASE("byte writer/reader round-trips every primitive") {
  ByteWriter w;
  w.u8(0xAB);
  w.u16(0x1234);
  w.u32(0xDEADBEEF);
  w.u64(0x0123456789ABCDEFULL);
  w.f64(-1.5);
  w.str16("hello");
  const std::vector<uint8_t> raw{9, 8, 7};
  w.bytes(raw);

  ByteReader r(w.data());
  CHECK(r.u8() == 0xAB);
  CHECK(r.u16() == 0x1234);
  CHECK(r.u32() == 0xDEADBEEF);
  CHECK(r.u64() == 0x0123456789ABCDEFULL);
  CHECK(r.f64() == -1.5);
  CHECK(r.str16() == "hello");
  const auto tail = r.bytes(3);
  CHECK(std::equal(tail.begin(), tail.end(), raw.begin()));
  CHECK(r.remaining() == 0);
}

TEST_CASE("multi-byte values are little-endian on the wire") {
  ByteWriter w;
  w.u32(0x11223344);
  const auto& b = w.data();
  REQUIRE(b.size() == 4);
  CHECK(b[0] == 0x44);
  CHECK(b[1] == 0x33);
  CHECK(b[2] == 0x22);
  CHECK(b[3] == 0x11);
}

TEST_CASE("reading past the end throws WireError") {
  ByteWriter w;
  w.u16(7);
  ByteReader r(w.data());
  r.u8();
  CHECK_THROWS_AS(r.u32(), WireError);
}

TEST_CASE("crc32 matches the standard check value") {
  const char* msg = "123456789";
  const uint32_t crc =
      crc32(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(msg), 9));
  CHECK(crc == 0xCBF43926u);
}

TEST_CASE("crc32 seed continues a running checksum") {
  std::vector<uint8_t> all{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  const uint32_t whole = crc32(all);
  const uint32_t first = crc32(std::span<const uint8_t>(all.data(), 5));
  const uint32_t chained = crc32(std::span<const uint8_t>(all.data() + 5, all.size() - 5), first);
  CHECK(whole == chained);
}

TEST_CASE("fnv1a64 matches published vectors") {
  CHECK(fnv1a64(std::string("")) == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64(std::string("a")) == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("to_hex is fixed-width lowercase") {
  CHECK(to_hex(0) == "0000000000000000");
  CHECK(to_hex(0xDEADBEEFULL) == "00000000deadbeef");
}

TEST_CASE("splitmix64 streams are deterministic and seed-sensitive") {
  SplitMix64 a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  bool differs = false;
  SplitMix64 a2(42);
  for (int i = 0; i < 100; ++i) differs |= (a2.next() != c.next());
  CHECK(differs);
}

TEST_CASE("u01 stays in [0,1) and gaussian has sane moments") {
  SplitMix64 rng(7);
  double sum = 0, sumsq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.u01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sumsq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sumsq / n - 1.0) < 0.05);
}

TEST_CASE("derive_seed decorrelates adjacent indices") {
  const uint64_t s0 = derive_seed(1, 0);
  const uint64_t s1 = derive_seed(1, 1);
  CHECK(s0 != s1);
  CHECK(derive_seed(1, 0) == s0);  // stable
  CHECK(derive_seed(2, 0) != s0);
}

TEST_CASE("config parses comments, blanks and whitespace") {
  const Config cfg = Config::from_string(
      "# a comment\n"
      "  scheme = TurboHue  # trailing comment\n"
      "\n"
      "d_max_m=2.0\n"
      "lut_bins = 256\n");
  CHECK(cfg.get_str("scheme") == "TurboHue");
  CHECK(cfg.get_double("d_max_m") == 2.0);
  CHECK(cfg.get_int("lut_bins") == 256);
}

TEST_CASE("config rejects duplicates, bad lines and bad numbers") {
  CHECK_THROWS_AS(Config::from_string("a=1\na=2\n"), ParseError);
  CHECK_THROWS_AS(Config::from_string("just a token\n"), ParseError);
  CHECK_THROWS_AS(Config::from_string("=value\n"), ParseError);
  const Config cfg = Config::from_string("x=notanumber\n");
  CHECK_THROWS_AS(cfg.get_double("x"), ParseError);
  CHECK_THROWS_AS(cfg.get_int("x"), ParseError);
  CHECK_THROWS_AS(cfg.get_str("missing"), ParseError);
  CHECK(cfg.get_str("missing", "fb") == "fb");
  CHECK(cfg.get_double("missing", 1.5) == 1.5);
}

TEST_CASE("config errors carry source and line") {
  try {
    Config::from_string("ok=1\nbroken\n", "test.cfg");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("test.cfg:2") != std::string::npos);
  }
}

TEST_CASE("require_known rejects unexpected keys") {
  const Config cfg = Config::from_string("alpha=1\nbeta=2\n");
  CHECK_NOTHROW(cfg.require_known({"alpha", "beta", "gamma"}));
  CHECK_THROWS_AS(cfg.require_known({"alpha"}), ParseError);
}

TEST_CASE("error taxonomy derives from runtime_error") {
  CHECK_THROWS_AS(throw ParseError("x"), std::runtime_error);
  CHECK_THROWS_AS(throw WireError("x"), std::runtime_error);
  CHECK_THROWS_AS(throw StateError("x"), std::runtime_error);
}
