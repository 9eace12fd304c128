#pragma once

#include <optional>
#include <string>

#include "dmtz/edit_codec.hpp"
#include "dmtz/metrics.hpp"
#include "dmtz/topo_editor.hpp"

namespace dmtz {

struct CompressOptions {
    ErrorBoundSpec eb;
    Tier tier = Tier::T4_Separatrix;
    int q_max = 6;
    CoderId coder = CoderId::deflate;
    Precision precision = Precision::f64;  // of the original file; recorded in the header
    int threads = 1;
};

struct CompressOutput {
    Bytes archive;
    ArchiveHeader header;
    EditResult edited;
    MetricsReport report;
    MorseSmaleComplex msc_f;
};

/// Base codec, in-memory decompression, edit derivation, packing.
CompressOutput compress_builtin(const ScalarField& f, const CompressOptions& options);
/// Edits against an externally decompressed field. The header records the
/// bound mode and value; xi is derived from f exactly as for builtin.
CompressOutput compress_external(const ScalarField& f, const ScalarField& fhat, const CompressOptions& options);

struct Decoded {
    ArchiveHeader header;
    ScalarField fhat;
    ScalarField g;
    EditSet edits;
    std::uint64_t blob_bytes = 0;
};

/// fhat is required for external-base archives and ignored otherwise.
/// Throws Errc::format on any archive inconsistency.
Decoded decode_archive(std::span<const std::uint8_t> archive, const std::optional<ScalarField>& fhat = std::nullopt);

struct VerifyOutput {
    Tier tier = Tier::T4_Separatrix;
    std::string failure;  // empty when every check passed
    MetricsReport report;
};

/// Checks `tier` (default: the archive's). Asking for more than the archive
/// promises is Errc::format. With `ignore_edits` the bare base-decompressed
/// field is checked instead of g.
VerifyOutput verify_archive(const ScalarField& f, std::span<const std::uint8_t> archive,
                            const std::optional<ScalarField>& fhat, std::optional<Tier> tier, bool ignore_edits,
                            int threads = 1);

/// Report of g against f. W2 is over the 0-dim diagrams, zero-length pairs
/// dropped (they cost nothing).
MetricsReport make_report(const ScalarField& f, const ScalarField& g, const MorseSmaleComplex& msc_f,
                          const MorseSmaleComplex& msc_g, std::uint64_t original_bytes, std::uint64_t blob_bytes,
                          std::uint64_t archive_bytes, std::uint64_t n_edited);

}  // namespace dmtz
