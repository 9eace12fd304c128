#include "dmtz/byte_coder.hpp"

#include <zlib.h>

#include <string>

namespace dmtz {

const char* to_string(CoderId id) {
    switch (id) {
        case CoderId::store: return "store";
        case CoderId::deflate: return "deflate";
    }
    return "?";
}

std::optional<CoderId> parse_coder(std::string_view name) {
    if (name == "store") return CoderId::store;
    if (name == "deflate") return CoderId::deflate;
    return std::nullopt;
}

CoderId coder_from_byte(std::uint8_t id) {
    if (id > 1) fail(Errc::format, "unknown coder id " + std::to_string(id));
    return static_cast<CoderId>(id);
}

namespace {

// Deflate payload: u64 raw size, then a zlib stream.
Bytes deflate(std::span<const std::uint8_t> raw) {
    Bytes out;
    ByteWriter w(out);
    w.u64(raw.size());
    uLongf cap = compressBound(static_cast<uLong>(raw.size()));
    out.resize(8 + cap);
    const int rc = compress2(out.data() + 8, &cap, raw.data(), static_cast<uLong>(raw.size()), 9);
    if (rc != Z_OK) fail(Errc::internal, "deflate failed");
    out.resize(8 + cap);
    return out;
}

Bytes inflate(std::span<const std::uint8_t> coded) {
    ByteReader r(coded, "deflate payload");
    const std::uint64_t size = r.u64();
    // A zlib stream cannot expand data by more than ~1032x.
    if (size > 1032ull * coded.size() + 64) fail(Errc::format, "deflate payload: implausible size");
    Bytes out(size);
    uLongf got = static_cast<uLongf>(size);
    const auto body = r.raw(r.remaining());
    const int rc = uncompress(out.data(), &got, body.data(), static_cast<uLong>(body.size()));
    if (rc != Z_OK || got != size) fail(Errc::format, "deflate payload: corrupt stream");
    return out;
}

}  // namespace

Bytes encode_bytes(CoderId id, std::span<const std::uint8_t> raw) {
    if (id == CoderId::deflate) return deflate(raw);
    return Bytes(raw.begin(), raw.end());
}

Bytes decode_bytes(CoderId id, std::span<const std::uint8_t> coded) {
    if (id == CoderId::deflate) return inflate(coded);
    return Bytes(coded.begin(), coded.end());
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
    uLong c = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks.
    std::size_t pos = 0;
    while (pos < data.size()) {
        const std::size_t n = std::min<std::size_t>(data.size() - pos, 1u << 30);
        c = ::crc32(c, data.data() + pos, static_cast<uInt>(n));
        pos += n;
    }
    return static_cast<std::uint32_t>(c);
}

}  // namespace dmtz
