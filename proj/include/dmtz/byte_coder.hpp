#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "dmtz/bytes.hpp"

namespace dmtz {

/// Lossless byte coders. The id is what archives record.
enum class CoderId : std::uint8_t {
    store = 0,
    deflate = 1,
};

const char* to_string(CoderId id);
std::optional<CoderId> parse_coder(std::string_view name);
/// Throws Errc::format for ids that are not registered.
CoderId coder_from_byte(std::uint8_t id);

Bytes encode_bytes(CoderId id, std::span<const std::uint8_t> raw);
Bytes decode_bytes(CoderId id, std::span<const std::uint8_t> coded);

/// CRC-32 (IEEE), as used by zlib/PNG.
std::uint32_t crc32(std::span<const std::uint8_t> data);

}  // namespace dmtz
