#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "dmtz/byte_coder.hpp"
#include "dmtz/discrete_morse.hpp"

namespace dmtz {

enum class BoundMode : std::uint8_t { absolute = 0, relative = 1 };

struct ErrorBoundSpec {
    BoundMode mode = BoundMode::relative;
    double value = 1e-3;
};

/// xi = value (absolute) or value * (max f - min f) (relative). Throws
/// Errc::invalid_argument if value is not a positive finite number.
double effective_bound(const ErrorBoundSpec& eb, std::span<const double> values);

enum class Precision : std::uint8_t { f32 = 4, f64 = 8 };

inline constexpr std::uint8_t kPredictorLorenzo1 = 1;
inline constexpr std::int32_t kQuantRadius = 32768;

struct CompressedBlob {
    GridDims dims;
    Precision precision = Precision::f64;
    double xi = 0;
    std::uint8_t predictor = kPredictorLorenzo1;
    CoderId coder = CoderId::deflate;
    bool lossless = false;  // set when xi = 0 (constant field under a relative bound)
    std::uint64_t unpredictable = 0;
    Bytes payload;
};

/// Lorenzo prediction from reconstructed neighbours, bins of width 2 xi.
CompressedBlob compress_field(const ScalarField& field, const ErrorBoundSpec& eb, CoderId coder = CoderId::deflate,
                              Precision precision = Precision::f64);
/// Same, with the absolute bound given directly (xi = 0 selects lossless).
CompressedBlob compress_with_bound(const ScalarField& field, double xi, CoderId coder = CoderId::deflate,
                                   Precision precision = Precision::f64);
ScalarField decompress_field(const CompressedBlob& blob);

/// Container: "DMTZB", version, fixed header, payload.
Bytes serialize_blob(const CompressedBlob& blob);
CompressedBlob parse_blob(std::span<const std::uint8_t> bytes);

ScalarField load_raw(const std::filesystem::path& path, const GridDims& dims, Precision precision);
void save_raw(const std::filesystem::path& path, const ScalarField& field, Precision precision);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace dmtz
