#include "ledgersim/crypto.hpp"

#include <array>
#include <bit>
#include <cstring>

namespace ledgersim {

namespace {

inline uint32_t rol32(uint32_t x, int n) { return std::rotl(x, n); }

// ---------------------------------------------------------------- sha-256

const uint32_t kSha256K[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
    0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
    0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
    0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
    0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

void sha256_block(uint32_t h[8], const uint8_t* p) {
  uint32_t w[64];
  for (int i = 0; i < 16; ++i) {
    w[i] = uint32_t(p[4 * i]) << 24 | uint32_t(p[4 * i + 1]) << 16 |
           uint32_t(p[4 * i + 2]) << 8 | uint32_t(p[4 * i + 3]);
  }
  for (int i = 16; i < 64; ++i) {
    uint32_t s0 = rol32(w[i - 15], 25) ^ rol32(w[i - 15], 14) ^ (w[i - 15] >> 3);
    uint32_t s1 = rol32(w[i - 2], 15) ^ rol32(w[i - 2], 13) ^ (w[i - 2] >> 10);
    w[i] = w[i - 16] + s0 + w[i - 7] + s1;
  }
  uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
  uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
  for (int i = 0; i < 64; ++i) {
    uint32_t s1 = rol32(e, 26) ^ rol32(e, 21) ^ rol32(e, 7);
    uint32_t ch = (e & f) ^ (~e & g);
    uint32_t t1 = hh + s1 + ch + kSha256K[i] + w[i];
    uint32_t s0 = rol32(a, 30) ^ rol32(a, 19) ^ rol32(a, 10);
    uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
    uint32_t t2 = s0 + maj;
    hh = g; g = f; f = e; e = d + t1;
    d = c; c = b; b = a; a = t1 + t2;
  }
  h[0] += a; h[1] += b; h[2] += c; h[3] += d;
  h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
}

// ------------------------------------------------------------------ sha-1

void sha1_block(uint32_t h[5], const uint8_t* p) {
  uint32_t w[80];
  for (int i = 0; i < 16; ++i) {
    w[i] = uint32_t(p[4 * i]) << 24 | uint32_t(p[4 * i + 1]) << 16 |
           uint32_t(p[4 * i + 2]) << 8 | uint32_t(p[4 * i + 3]);
  }
  for (int i = 16; i < 80; ++i) {
    w[i] = rol32(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
  }
  uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
  for (int i = 0; i < 80; ++i) {
    uint32_t f, k;
    if (i < 20) {
      f = (b & c) | (~b & d);
      k = 0x5a827999;
    } else if (i < 40) {
      f = b ^ c ^ d;
      k = 0x6ed9eba1;
    } else if (i < 60) {
      f = (b & c) | (b & d) | (c & d);
      k = 0x8f1bbcdc;
    } else {
      f = b ^ c ^ d;
      k = 0xca62c1d6;
    }
    uint32_t t = rol32(a, 5) + f + e + k + w[i];
    e = d; d = c; c = rol32(b, 30); b = a; a = t;
  }
  h[0] += a; h[1] += b; h[2] += c; h[3] += d; h[4] += e;
}

// ------------------------------------------------------------- ripemd-160

const uint8_t kRmdRL[80] = {
    0, 1, 2,  3,  4,  5,  6,  7,  8,  9,  10, 11, 12, 13, 14, 15,
    7, 4, 13, 1,  10, 6,  15, 3,  12, 0,  9,  5,  2,  14, 11, 8,
    3, 10, 14, 4, 9,  15, 8,  1,  2,  7,  0,  6,  13, 11, 5,  12,
    1, 9, 11, 10, 0,  8,  12, 4,  13, 3,  7,  15, 14, 5,  6,  2,
    4, 0, 5,  9,  7,  12, 2,  10, 14, 1,  3,  8,  11, 6,  15, 13};

const uint8_t kRmdRR[80] = {
    5,  14, 7, 0, 9, 2,  11, 4,  13, 6,  15, 8,  1,  10, 3,  12,
    6,  11, 3, 7, 0, 13, 5,  10, 14, 15, 8,  12, 4,  9,  1,  2,
    15, 5,  1, 3, 7, 14, 6,  9,  11, 8,  12, 2,  10, 0,  4,  13,
    8,  6,  4, 1, 3, 11, 15, 0,  5,  12, 2,  13, 9,  7,  10, 14,
    12, 15, 10, 4, 1, 5, 8,  7,  6,  2,  13, 14, 0,  3,  9,  11};

const uint8_t kRmdSL[80] = {
    11, 14, 15, 12, 5,  8,  7,  9,  11, 13, 14, 15, 6,  7,  9,  8,
    7,  6,  8,  13, 11, 9,  7,  15, 7,  12, 15, 9,  11, 7,  13, 12,
    11, 13, 6,  7,  14, 9,  13, 15, 14, 8,  13, 6,  5,  12, 7,  5,
    11, 12, 14, 15, 14, 15, 9,  8,  9,  14, 5,  6,  8,  6,  5,  12,
    9,  15, 5,  11, 6,  8,  13, 12, 5,  12, 13, 14, 11, 8,  5,  6};

const uint8_t kRmdSR[80] = {
    8,  9,  9,  11, 13, 15, 15, 5,  7,  7,  8,  11, 14, 14, 12, 6,
    9,  13, 15, 7,  12, 8,  9,  11, 7,  7,  12, 7,  6,  15, 13, 11,
    9,  7,  15, 11, 8,  6,  6,  14, 12, 13, 5,  14, 13, 13, 7,  5,
    15, 5,  8,  11, 14, 14, 6,  14, 6,  9,  12, 9,  12, 5,  15, 8,
    8,  5,  12, 9,  12, 5,  14, 6,  8,  13, 6,  5,  15, 13, 11, 11};

inline uint32_t rmd_f(int j, uint32_t x, uint32_t y, uint32_t z) {
  if (j < 16) return x ^ y ^ z;
  if (j < 32) return (x & y) | (~x & z);
  if (j < 48) return (x | ~y) ^ z;
  if (j < 64) return (x & z) | (y & ~z);
  return x ^ (y | ~z);
}

inline uint32_t rmd_kl(int j) {
  static const uint32_t k[5] = {0x00000000, 0x5a827999, 0x6ed9eba1,
                                0x8f1bbcdc, 0xa953fd4e};
  return k[j / 16];
}

inline uint32_t rmd_kr(int j) {
  static const uint32_t k[5] = {0x50a28be6, 0x5c4dd124, 0x6d703ef3,
                                0x7a6d76e9, 0x00000000};
  return k[j / 16];
}

void ripemd160_block(uint32_t h[5], const uint8_t* p) {
  uint32_t x[16];
  for (int i = 0; i < 16; ++i) {
    x[i] = uint32_t(p[4 * i]) | uint32_t(p[4 * i + 1]) << 8 |
           uint32_t(p[4 * i + 2]) << 16 | uint32_t(p[4 * i + 3]) << 24;
  }
  uint32_t al = h[0], bl = h[1], cl = h[2], dl = h[3], el = h[4];
  uint32_t ar = h[0], br = h[1], cr = h[2], dr = h[3], er = h[4];
  for (int j = 0; j < 80; ++j) {
    uint32_t t = rol32(al + rmd_f(j, bl, cl, dl) + x[kRmdRL[j]] + rmd_kl(j),
                       kRmdSL[j]) +
                 el;
    al = el; el = dl; dl = rol32(cl, 10); cl = bl; bl = t;

    t = rol32(ar + rmd_f(79 - j, br, cr, dr) + x[kRmdRR[j]] + rmd_kr(j),
              kRmdSR[j]) +
        er;
    ar = er; er = dr; dr = rol32(cr, 10); cr = br; br = t;
  }
  uint32_t t = h[1] + cl + dr;
  h[1] = h[2] + dl + er;
  h[2] = h[3] + el + ar;
  h[3] = h[4] + al + br;
  h[4] = h[0] + bl + cr;
  h[0] = t;
}

// 64-byte Merkle-Damgard driver shared by all three digests.
template <typename BlockFn>
void md_pad_run(ByteSpan data, BlockFn block, bool big_endian_length,
                uint32_t* h) {
  uint64_t bitlen = uint64_t(data.size()) * 8;
  size_t full = data.size() / 64;
  for (size_t i = 0; i < full; ++i) block(h, data.data() + i * 64);

  uint8_t tail[128] = {0};
  size_t rem = data.size() - full * 64;
  std::memcpy(tail, data.data() + full * 64, rem);
  tail[rem] = 0x80;
  size_t total = rem + 1 <= 56 ? 64 : 128;
  if (big_endian_length) {
    for (int i = 0; i < 8; ++i) {
      tail[total - 1 - i] = static_cast<uint8_t>(bitlen >> (8 * i));
    }
  } else {
    for (int i = 0; i < 8; ++i) {
      tail[total - 8 + i] = static_cast<uint8_t>(bitlen >> (8 * i));
    }
  }
  block(h, tail);
  if (total == 128) block(h, tail + 64);
}

}  // namespace

Bytes sha256(ByteSpan data) {
  uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                   0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  md_pad_run(data, sha256_block, true, h);
  Bytes out(32);
  for (int i = 0; i < 8; ++i) {
    out[4 * i] = static_cast<uint8_t>(h[i] >> 24);
    out[4 * i + 1] = static_cast<uint8_t>(h[i] >> 16);
    out[4 * i + 2] = static_cast<uint8_t>(h[i] >> 8);
    out[4 * i + 3] = static_cast<uint8_t>(h[i]);
  }
  return out;
}

Bytes sha1(ByteSpan data) {
  uint32_t h[5] = {0x67452301, 0xefcdab89, 0x98badcfe, 0x10325476, 0xc3d2e1f0};
  md_pad_run(data, sha1_block, true, h);
  Bytes out(20);
  for (int i = 0; i < 5; ++i) {
    out[4 * i] = static_cast<uint8_t>(h[i] >> 24);
    out[4 * i + 1] = static_cast<uint8_t>(h[i] >> 16);
    out[4 * i + 2] = static_cast<uint8_t>(h[i] >> 8);
    out[4 * i + 3] = static_cast<uint8_t>(h[i]);
  }
  return out;
}

Bytes ripemd160(ByteSpan data) {
  uint32_t h[5] = {0x67452301, 0xefcdab89, 0x98badcfe, 0x10325476, 0xc3d2e1f0};
  md_pad_run(data, ripemd160_block, false, h);
  Bytes out(20);
  for (int i = 0; i < 5; ++i) {
    out[4 * i] = static_cast<uint8_t>(h[i]);
    out[4 * i + 1] = static_cast<uint8_t>(h[i] >> 8);
    out[4 * i + 2] = static_cast<uint8_t>(h[i] >> 16);
    out[4 * i + 3] = static_cast<uint8_t>(h[i] >> 24);
  }
  return out;
}

Bytes sha256(std::string_view s) {
  return sha256(ByteSpan(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

int leading_zero_bits(ByteSpan digest) {
  int bits = 0;
  for (uint8_t b : digest) {
    if (b == 0) {
      bits += 8;
      continue;
    }
    for (int i = 7; i >= 0; --i) {
      if (b & (1u << i)) return bits;
      ++bits;
    }
  }
  return bits;
}

Bytes sim_keygen(std::string_view label) {
  std::string seed = "ledgersim-key:";
  seed += label;
  return sha256(seed);
}

Bytes sim_sign(ByteSpan key, ByteSpan digest) {
  return sha256(concat(key, digest));
}

bool sim_verify(ByteSpan key, ByteSpan digest, ByteSpan sig) {
  Bytes expect = sim_sign(key, digest);
  return sig.size() == expect.size() &&
         std::equal(sig.begin(), sig.end(), expect.begin());
}

}  // namespace ledgersim
