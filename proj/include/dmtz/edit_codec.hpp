#pragma once

#include <cstdint>
#include <span>

#include "dmtz/base_codec.hpp"
#include "dmtz/byte_coder.hpp"
#include "dmtz/topo_editor.hpp"

namespace dmtz {

/// Serialized EditSet (before the byte coder):
///   varint n_quantized, varint n_lossless
///   n_quantized varints   index gap (index - previous index - 1, previous starts at -1)
///   ceil(n_quantized/2)   count nibbles, low nibble first; 15 = escape
///   u16 per escape        full count, in record order
///   n_lossless varints    index gap
///   n_lossless f64        residual bits
/// xi and q_max live in the archive header, not here.
Bytes encode_edits(const EditSet& edits);
/// Throws Errc::format on malformed streams.
EditSet decode_edits(std::span<const std::uint8_t> stream, double xi, int q_max);

/// Bytes of the key + f64 baseline for the same edits.
inline std::uint64_t all_lossless_size(const EditSet& e) { return 12 * static_cast<std::uint64_t>(e.size()); }

struct CodedStream {
    CoderId coder = CoderId::store;
    Bytes bytes;
};
/// Runs `preferred` and keeps it only when it beats store.
CodedStream code_edit_stream(std::span<const std::uint8_t> stream, CoderId preferred);

inline constexpr std::uint8_t kArchiveVersion = 1;
inline constexpr std::size_t kArchiveHeaderSize = 60;

struct ArchiveHeader {
    GridDims dims;
    Precision precision = Precision::f64;
    Tier tier = Tier::T4_Separatrix;
    ErrorBoundSpec eb;
    double xi = 0;
    int q_max = 6;
    CoderId edit_coder = CoderId::store;  // coder of section B
    bool external_base = false;           // section A empty; fhat supplied separately
    bool operator==(const ArchiveHeader& o) const;
};

struct Archive {
    ArchiveHeader header;
    Bytes section_a;  // serialized CompressedBlob, empty for external base
    Bytes section_b;  // coded EditStream
};

/// Little-endian layout, offsets in bytes:
///   0  "DMTZ1"          5  version u8       6  CRC-32 u32 of bytes [10, end)
///   10 nx u32  14 ny u32  18 nz u32       22 precision u8   23 tier u8
///   24 eb mode u8        25 eb value f64    33 xi f64         41 q_max u8
///   42 edit coder u8     43 flags u8 (bit0 external base)
///   44 len A u64         52 len B u64       60 section A, section B
Bytes pack_archive(const Archive& archive);
/// Errc::format with "bad magic", "unsupported archive version",
/// "checksum mismatch" or a header field error.
Archive unpack_archive(std::span<const std::uint8_t> bytes);

}  // namespace dmtz
