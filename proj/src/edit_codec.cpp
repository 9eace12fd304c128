#include "dmtz/edit_codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "dmtz/error.hpp"
#include "dmtz/grid_complex.hpp"

namespace dmtz {

namespace {

constexpr std::string_view kMagic = "DMTZ1";
constexpr std::uint8_t kEscape = 15;

template <class Edits>
void write_gaps(ByteWriter& w, const Edits& list) {
    std::int64_t prev = -1;
    for (const auto& e : list) {
        if (e.index <= prev) fail(Errc::invalid_argument, "edit indices must be strictly increasing");
        w.varint(static_cast<std::uint64_t>(e.index - prev - 1));
        prev = e.index;
    }
}

std::vector<std::int64_t> read_gaps(ByteReader& r, std::uint64_t n) {
    std::vector<std::int64_t> idx;
    idx.reserve(static_cast<std::size_t>(n));
    std::int64_t prev = -1;
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t gap = r.varint();
        if (gap > (std::uint64_t{1} << 40)) fail(Errc::format, "edit stream: index gap out of range");
        prev += static_cast<std::int64_t>(gap) + 1;
        idx.push_back(prev);
    }
    return idx;
}

}  // namespace

Bytes encode_edits(const EditSet& edits) {
    Bytes out;
    ByteWriter w(out);
    w.varint(edits.quantized.size());
    w.varint(edits.lossless.size());
    write_gaps(w, edits.quantized);
    std::vector<std::uint16_t> escapes;
    for (std::size_t i = 0; i < edits.quantized.size(); i += 2) {
        std::uint8_t packed = 0;
        for (std::size_t k = 0; k < 2 && i + k < edits.quantized.size(); ++k) {
            const std::uint32_t c = edits.quantized[i + k].count;
            if (c == 0 || c > kMaxStepCount) fail(Errc::invalid_argument, "quantized count out of range");
            std::uint8_t nib = static_cast<std::uint8_t>(c);
            if (c >= kEscape) {
                nib = kEscape;
                escapes.push_back(static_cast<std::uint16_t>(c));
            }
            packed = static_cast<std::uint8_t>(packed | (nib << (4 * k)));
        }
        w.u8(packed);
    }
    for (const auto c : escapes) w.u16(c);
    write_gaps(w, edits.lossless);
    for (const auto& l : edits.lossless) w.f64(l.residual);
    return out;
}

EditSet decode_edits(std::span<const std::uint8_t> stream, double xi, int q_max) {
    ByteReader r(stream, "edit stream");
    EditSet e;
    e.xi = xi;
    e.q_max = q_max;
    const std::uint64_t nq = r.varint();
    const std::uint64_t nl = r.varint();
    // Each record takes at least one byte, so larger counts cannot be valid.
    if (nq > stream.size() || nl > stream.size()) fail(Errc::format, "edit stream: record count exceeds stream size");
    const auto qi = read_gaps(r, nq);
    std::vector<std::uint8_t> nibbles;
    nibbles.reserve(static_cast<std::size_t>(nq));
    for (std::uint64_t i = 0; i < nq; i += 2) {
        const std::uint8_t b = r.u8();
        nibbles.push_back(b & 0x0f);
        if (i + 1 < nq) nibbles.push_back(b >> 4);
        else if (b >> 4) fail(Errc::format, "edit stream: padding nibble not zero");
    }
    e.quantized.reserve(qi.size());
    for (std::size_t i = 0; i < qi.size(); ++i) {
        std::uint32_t c = nibbles[i];
        if (c == 0) fail(Errc::format, "edit stream: zero count");
        e.quantized.push_back({qi[i], c});
    }
    for (auto& q : e.quantized) {
        if (q.count != kEscape) continue;
        q.count = r.u16();
        if (q.count < kEscape) fail(Errc::format, "edit stream: escaped count below escape value");
    }
    const auto li = read_gaps(r, nl);
    e.lossless.reserve(li.size());
    for (const auto i : li) e.lossless.push_back({i, r.f64()});
    if (r.remaining() != 0) fail(Errc::format, "edit stream: trailing bytes");
    std::size_t i = 0, j = 0;
    while (i < e.quantized.size() && j < e.lossless.size()) {
        const auto a = e.quantized[i].index, b = e.lossless[j].index;
        if (a == b) fail(Errc::format, "edit stream: vertex " + std::to_string(a) + " edited twice");
        (a < b ? i : j)++;
    }
    return e;
}

CodedStream code_edit_stream(std::span<const std::uint8_t> stream, CoderId preferred) {
    if (preferred != CoderId::store) {
        Bytes coded = encode_bytes(preferred, stream);
        if (coded.size() < stream.size()) return {preferred, std::move(coded)};
    }
    return {CoderId::store, Bytes(stream.begin(), stream.end())};
}

bool ArchiveHeader::operator==(const ArchiveHeader& o) const {
    return dims == o.dims && precision == o.precision && tier == o.tier && eb.mode == o.eb.mode &&
           std::bit_cast<std::uint64_t>(eb.value) == std::bit_cast<std::uint64_t>(o.eb.value) &&
           std::bit_cast<std::uint64_t>(xi) == std::bit_cast<std::uint64_t>(o.xi) && q_max == o.q_max &&
           edit_coder == o.edit_coder && external_base == o.external_base;
}

Bytes pack_archive(const Archive& a) {
    const ArchiveHeader& h = a.header;
    if (h.external_base && !a.section_a.empty())
        fail(Errc::invalid_argument, "external-base archive cannot carry a base payload");
    Bytes out;
    ByteWriter w(out);
    w.raw(kMagic);
    w.u8(kArchiveVersion);
    w.u32(0);  // checksum, patched below
    w.u32(static_cast<std::uint32_t>(h.dims.nx));
    w.u32(static_cast<std::uint32_t>(h.dims.ny));
    w.u32(static_cast<std::uint32_t>(h.dims.nz));
    w.u8(static_cast<std::uint8_t>(h.precision));
    w.u8(static_cast<std::uint8_t>(h.tier));
    w.u8(static_cast<std::uint8_t>(h.eb.mode));
    w.f64(h.eb.value);
    w.f64(h.xi);
    w.u8(static_cast<std::uint8_t>(h.q_max));
    w.u8(static_cast<std::uint8_t>(h.edit_coder));
    w.u8(h.external_base ? 1 : 0);
    w.u64(a.section_a.size());
    w.u64(a.section_b.size());
    w.raw(a.section_a);
    w.raw(a.section_b);
    const std::uint32_t crc = crc32(std::span<const std::uint8_t>(out).subspan(10));
    for (int i = 0; i < 4; ++i) out[6 + i] = static_cast<std::uint8_t>(crc >> (8 * i));
    return out;
}

Archive unpack_archive(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        fail(Errc::format, "bad magic: not a DMTZ1 archive");
    if (bytes.size() < 6 || bytes[5] != kArchiveVersion)
        fail(Errc::format, "unsupported archive version " + (bytes.size() < 6 ? std::string("?") : std::to_string(bytes[5])));
    ByteReader r(bytes, "archive");
    r.raw(6);
    const std::uint32_t stored = bytes.size() >= 10 ? r.u32() : 0;
    if (bytes.size() < kArchiveHeaderSize || crc32(bytes.subspan(10)) != stored)
        fail(Errc::format, "checksum mismatch");

    Archive a;
    ArchiveHeader& h = a.header;
    h.dims.nx = r.u32();
    h.dims.ny = r.u32();
    h.dims.nz = r.u32();
    check_header_dims(h.dims, "archive");
    const std::uint8_t prec = r.u8();
    if (prec != 4 && prec != 8) fail(Errc::format, "archive: precision must be 4 or 8 bytes");
    h.precision = static_cast<Precision>(prec);
    const std::uint8_t tier = r.u8();
    if (tier < 1 || tier > 5) fail(Errc::format, "archive: tier out of range");
    h.tier = static_cast<Tier>(tier);
    const std::uint8_t mode = r.u8();
    if (mode > 1) fail(Errc::format, "archive: unknown bound mode");
    h.eb.mode = static_cast<BoundMode>(mode);
    h.eb.value = r.f64();
    h.xi = r.f64();
    if (!(h.xi >= 0) || !std::isfinite(h.xi)) fail(Errc::format, "archive: invalid xi");
    h.q_max = r.u8();
    if (h.q_max < 1 || h.q_max > 52) fail(Errc::format, "archive: q_max out of range");
    h.edit_coder = coder_from_byte(r.u8());
    const std::uint8_t flags = r.u8();
    if (flags & ~1u) fail(Errc::format, "archive: unknown flags");
    h.external_base = flags & 1;
    const std::uint64_t la = r.u64();
    const std::uint64_t lb = r.u64();
    if (la > r.remaining() || lb != r.remaining() - la) fail(Errc::format, "archive: section lengths inconsistent");
    if (h.external_base && la != 0) fail(Errc::format, "archive: external-base archive has a base payload");
    const auto sa = r.raw(static_cast<std::size_t>(la));
    const auto sb = r.raw(static_cast<std::size_t>(lb));
    a.section_a.assign(sa.begin(), sa.end());
    a.section_b.assign(sb.begin(), sb.end());
    return a;
}

}  // namespace dmtz
