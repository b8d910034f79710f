#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ledgersim {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

Bytes to_bytes(std::string_view s);
std::string to_string(ByteSpan b);

std::string to_hex(ByteSpan b);
Bytes from_hex(std::string_view hex);  // throws std::invalid_argument on bad input

Bytes concat(ByteSpan a, ByteSpan b);

// Printable rendering for dumps and logs: ASCII passes through, everything
// else (and tab/newline/backslash) becomes \xNN.
std::string escape_bytes(ByteSpan b);

}  // namespace ledgersim
