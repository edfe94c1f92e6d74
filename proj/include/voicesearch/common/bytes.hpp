#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace voicesearch {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::string to_string(ByteView b) {
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

std::string base64_encode(ByteView data);
// Throws Error(malformed_request) on invalid input.
Bytes base64_decode(std::string_view text);

std::string hex_encode(ByteView data);

std::string sha256_hex(ByteView data);

}  // namespace voicesearch
