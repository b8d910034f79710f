#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ledgersim/codec.hpp"
#include "ledgersim/rng.hpp"

using namespace ledgersim;

TEST_CASE("writer emits big-endian fixed width") {
  Writer w;
  w.u8(0xab);
  w.u16(0x0102);
  w.u32(0x01020304);
  w.u64(0x0102030405060708ull);
  Bytes expect = {0xab, 0x01, 0x02, 0x01, 0x02, 0x03, 0x04,
                  0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08};
  CHECK(w.bytes() == expect);
}

TEST_CASE("blob and str are length prefixed") {
  Writer w;
  w.str("hi");
  CHECK(w.bytes() == Bytes{0, 0, 0, 2, 'h', 'i'});
}

TEST_CASE("roundtrip of randomized records") {
  Rng rng(7);
  for (int iter = 0; iter < 200; ++iter) {
    Writer w;
    uint64_t a = rng.next();
    uint32_t b = static_cast<uint32_t>(rng.next());
    Bytes blob(rng.below(32));
    for (auto& c : blob) c = static_cast<uint8_t>(rng.below(256));
    bool flag = rng.chance(0.5);
    w.u64(a);
    w.u32(b);
    w.blob(blob);
    w.boolean(flag);

    Reader r(w.bytes());
    CHECK(r.u64() == a);
    CHECK(r.u32() == b);
    CHECK(r.blob() == blob);
    CHECK(r.boolean() == flag);
    CHECK(r.done());
  }
}

TEST_CASE("reader throws on truncation") {
  Writer w;
  w.u64(42);
  Bytes data = w.take();
  data.pop_back();
  Reader r(data);
  CHECK_THROWS_AS(r.u64(), CodecError);

  Writer w2;
  w2.u32(100);  // blob length claims 100 bytes, none follow
  Reader r2(w2.bytes());
  CHECK_THROWS_AS(r2.blob(), CodecError);
}

TEST_CASE("hex helpers") {
  CHECK(to_hex(Bytes{0xde, 0xad, 0xbe, 0xef}) == "deadbeef");
  CHECK(from_hex("deadbeef") == Bytes{0xde, 0xad, 0xbe, 0xef});
  CHECK(from_hex("0xDEADBEEF") == Bytes{0xde, 0xad, 0xbe, 0xef});
  CHECK_THROWS_AS(from_hex("abc"), std::invalid_argument);
  CHECK_THROWS_AS(from_hex("zz"), std::invalid_argument);
}

TEST_CASE("escape_bytes keeps ascii and escapes the rest") {
  CHECK(escape_bytes(Bytes{'a', 'b'}) == "ab");
  CHECK(escape_bytes(Bytes{'a', 0x00, 'b'}) == "a\\x00b");
  CHECK(escape_bytes(Bytes{'\t'}) == "\\x09");
  CHECK(escape_bytes(Bytes{'\\'}) == "\\x5c");
}

TEST_CASE("rng streams are deterministic and forkable") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng c = a.fork(1);
  Rng d = b.fork(1);
  for (int i = 0; i < 100; ++i) CHECK(c.next() == d.next());
  // below() stays in range
  for (int i = 0; i < 1000; ++i) CHECK(c.below(17) < 17);
}
