#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace alphadesk {

/// FIPS 180-4 SHA-256 digest of `data`.
std::array<std::uint8_t, 32> sha256(std::string_view data);

/// Lowercase hex of the full 256-bit digest.
std::string sha256_hex(std::string_view data);

/// First 128 bits of the digest as 32 hex characters. Content address for
/// factor records: stable across runs and processes, wide enough that unequal
/// canonical texts never collide in practice.
std::string content_id(std::string_view canonical_text);

}  // namespace alphadesk
