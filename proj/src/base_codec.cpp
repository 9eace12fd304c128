#include "dmtz/base_codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace dmtz {

namespace {

constexpr std::string_view kBlobMagic = "DMTZB";
constexpr std::uint8_t kBlobVersion = 1;

// First-order Lorenzo predictor over already reconstructed values; samples
// outside the grid read as 0.
double predict(const std::vector<double>& r, const GridDims& d, std::int64_t x, std::int64_t y, std::int64_t z) {
    auto at = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
        if (i < 0 || j < 0 || k < 0) return 0.0;
        return r[static_cast<std::size_t>(i + d.nx * (j + d.ny * k))];
    };
    if (!d.is_3d()) return at(x - 1, y, 0) + at(x, y - 1, 0) - at(x - 1, y - 1, 0);
    return at(x - 1, y, z) + at(x, y - 1, z) + at(x, y, z - 1) - at(x - 1, y - 1, z) - at(x - 1, y, z - 1) -
           at(x, y - 1, z - 1) + at(x - 1, y - 1, z - 1);
}

double reconstruct(double pred, std::int32_t code, double xi) { return pred + static_cast<double>(code) * (2.0 * xi); }

}  // namespace

double effective_bound(const ErrorBoundSpec& eb, std::span<const double> values) {
    if (!(eb.value > 0) || !std::isfinite(eb.value)) fail(Errc::invalid_argument, "error bound must be positive");
    if (eb.mode == BoundMode::absolute) return eb.value;
    if (values.empty()) return 0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return eb.value * (*hi - *lo);
}

CompressedBlob compress_field(const ScalarField& field, const ErrorBoundSpec& eb, CoderId coder,
                              Precision precision) {
    validate_field(field);
    return compress_with_bound(field, effective_bound(eb, field.values), coder, precision);
}

CompressedBlob compress_with_bound(const ScalarField& field, double xi, CoderId coder, Precision precision) {
    validate_field(field);
    if (!(xi >= 0) || !std::isfinite(xi)) fail(Errc::invalid_argument, "error bound must be non-negative");
    CompressedBlob blob;
    blob.dims = field.dims;
    blob.precision = precision;
    blob.xi = xi;
    blob.coder = coder;
    blob.lossless = xi == 0;

    Bytes raw;
    ByteWriter w(raw);
    const GridDims& d = field.dims;
    if (blob.lossless) {
        for (double v : field.values) w.f64(v);
        blob.unpredictable = field.values.size();
    } else {
        std::vector<double> recon(field.values.size());
        std::vector<double> verbatim;
        Bytes codes;
        codes.reserve(2 * field.values.size());
        ByteWriter cw(codes);
        std::size_t i = 0;
        for (std::int64_t z = 0; z < d.nz; ++z)
            for (std::int64_t y = 0; y < d.ny; ++y)
                for (std::int64_t x = 0; x < d.nx; ++x, ++i) {
                    const double v = field.values[i];
                    const double p = predict(recon, d, x, y, z);
                    const double q = std::nearbyint((v - p) / (2.0 * xi));
                    std::uint16_t stored = 0;
                    if (std::abs(q) < kQuantRadius) {
                        const auto code = static_cast<std::int32_t>(q);
                        const double r = reconstruct(p, code, xi);
                        if (std::abs(r - v) <= xi) {
                            stored = static_cast<std::uint16_t>(code + kQuantRadius);
                            recon[i] = r;
                        }
                    }
                    if (stored == 0) {
                        verbatim.push_back(v);
                        recon[i] = v;
                    }
                    cw.u16(stored);
                }
        w.raw(codes);
        for (double v : verbatim) w.f64(v);
        blob.unpredictable = verbatim.size();
    }
    blob.payload = encode_bytes(coder, raw);
    return blob;
}

ScalarField decompress_field(const CompressedBlob& blob) {
    validate_dims(blob.dims);
    const auto n = static_cast<std::size_t>(blob.dims.vertex_count());
    const Bytes raw = decode_bytes(blob.coder, blob.payload);
    ByteReader r(raw, "blob payload");
    if (blob.lossless ? raw.size() != 8 * n
                      : blob.unpredictable > n || raw.size() != 2 * n + 8 * blob.unpredictable)
        fail(Errc::format, "blob payload: size mismatch");
    ScalarField out{blob.dims, std::vector<double>(n)};
    if (blob.lossless) {
        for (auto& v : out.values) v = r.f64();
        return out;
    }
    ByteReader verbatim(std::span<const std::uint8_t>(raw).subspan(2 * n), "blob payload");
    const GridDims& d = blob.dims;
    std::size_t i = 0;
    std::uint64_t used = 0;
    for (std::int64_t z = 0; z < d.nz; ++z)
        for (std::int64_t y = 0; y < d.ny; ++y)
            for (std::int64_t x = 0; x < d.nx; ++x, ++i) {
                const std::uint16_t stored = r.u16();
                if (stored == 0) {
                    if (++used > blob.unpredictable) fail(Errc::format, "blob payload: too many unpredictable values");
                    out.values[i] = verbatim.f64();
                } else {
                    const double p = predict(out.values, d, x, y, z);
                    out.values[i] = reconstruct(p, static_cast<std::int32_t>(stored) - kQuantRadius, blob.xi);
                }
            }
    if (used != blob.unpredictable) fail(Errc::format, "blob payload: unpredictable count mismatch");
    return out;
}

Bytes serialize_blob(const CompressedBlob& blob) {
    Bytes out;
    ByteWriter w(out);
    w.raw(kBlobMagic);
    w.u8(kBlobVersion);
    w.u32(static_cast<std::uint32_t>(blob.dims.nx));
    w.u32(static_cast<std::uint32_t>(blob.dims.ny));
    w.u32(static_cast<std::uint32_t>(blob.dims.nz));
    w.u8(static_cast<std::uint8_t>(blob.precision));
    w.f64(blob.xi);
    w.u8(blob.predictor);
    w.u8(static_cast<std::uint8_t>(blob.coder));
    w.u8(blob.lossless ? 1 : 0);
    w.u64(blob.unpredictable);
    w.u64(blob.payload.size());
    w.raw(blob.payload);
    return out;
}

CompressedBlob parse_blob(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "blob");
    const auto magic = r.raw(kBlobMagic.size());
    if (!std::equal(magic.begin(), magic.end(), kBlobMagic.begin())) fail(Errc::format, "blob: bad magic");
    if (r.u8() != kBlobVersion) fail(Errc::format, "blob: unsupported version");
    CompressedBlob blob;
    blob.dims.nx = r.u32();
    blob.dims.ny = r.u32();
    blob.dims.nz = r.u32();
    const std::uint8_t prec = r.u8();
    if (prec != 4 && prec != 8) fail(Errc::format, "blob: bad precision");
    blob.precision = static_cast<Precision>(prec);
    blob.xi = r.f64();
    if (!(blob.xi >= 0) || !std::isfinite(blob.xi)) fail(Errc::format, "blob: bad error bound");
    blob.predictor = r.u8();
    if (blob.predictor != kPredictorLorenzo1) fail(Errc::format, "blob: unknown predictor");
    blob.coder = coder_from_byte(r.u8());
    const std::uint8_t flags = r.u8();
    if (flags > 1) fail(Errc::format, "blob: bad flags");
    blob.lossless = flags & 1;
    blob.unpredictable = r.u64();
    const std::uint64_t len = r.u64();
    if (len != r.remaining()) fail(Errc::format, "blob: payload length mismatch");
    const auto payload = r.raw(static_cast<std::size_t>(len));
    blob.payload.assign(payload.begin(), payload.end());
    check_header_dims(blob.dims, "blob");
    return blob;
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io, "cannot open " + path.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(Errc::io, "read error on " + path.string());
    return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io, "cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::io, "write error on " + path.string());
}

ScalarField load_raw(const std::filesystem::path& path, const GridDims& dims, Precision precision) {
    validate_dims(dims);
    const Bytes data = read_file(path);
    const auto n = static_cast<std::size_t>(dims.vertex_count());
    const std::size_t width = static_cast<std::size_t>(precision);
    if (data.size() != n * width)
        fail(Errc::format, path.string() + ": size mismatch: " + std::to_string(data.size()) + " bytes, expected " +
                               std::to_string(n * width));
    ScalarField f{dims, std::vector<double>(n)};
    ByteReader r(data);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = precision == Precision::f64 ? r.f64() : std::bit_cast<float>(r.u32());
        if (!std::isfinite(v)) fail(Errc::format, path.string() + ": non-finite value at index " + std::to_string(i));
        f.values[i] = v;
    }
    return f;
}

void save_raw(const std::filesystem::path& path, const ScalarField& field, Precision precision) {
    Bytes out;
    out.reserve(field.values.size() * static_cast<std::size_t>(precision));
    ByteWriter w(out);
    for (double v : field.values) {
        if (precision == Precision::f64)
            w.f64(v);
        else
            w.u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    write_file(path, out);
}

}  // namespace dmtz
