#pragma once

#include <cstdint>
#include <string_view>

#include "ledgersim/bytes.hpp"

namespace ledgersim {

// Self-contained digest implementations so results are identical on every
// platform and no external crypto library is needed at desk scale.
Bytes sha256(ByteSpan data);
Bytes sha1(ByteSpan data);
Bytes ripemd160(ByteSpan data);

Bytes sha256(std::string_view s);

// Number of leading zero bits of a digest, scanning from byte 0 MSB first.
int leading_zero_bits(ByteSpan digest);

// Simulation signature scheme: a keyed digest over the message digest. The
// verification key doubles as the signing key, which is fine in a simulator
// where the only forgeries are the ones fault injection produces on purpose.
Bytes sim_keygen(std::string_view label);
Bytes sim_sign(ByteSpan key, ByteSpan digest);
bool sim_verify(ByteSpan key, ByteSpan digest, ByteSpan sig);

}  // namespace ledgersim
