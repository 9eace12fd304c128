#include "dmtz/pipeline.hpp"

#include <bit>

#include "dmtz/error.hpp"

namespace dmtz {

namespace {

std::vector<std::pair<double, double>> finite_points(const PersistenceDiagram& pd) {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : pd.points())
        if (p.second != p.first) out.push_back(p);
    return out;
}

double w2(const ScalarField& f, const ScalarField& g, const CellComplex& cx, Filtration dir) {
    return wasserstein2(finite_points(persistence_0d(f.values, cx, dir)), finite_points(persistence_0d(g.values, cx, dir)));
}

std::uint64_t original_bytes(const ScalarField& f, Precision p) {
    return static_cast<std::uint64_t>(f.size()) * static_cast<std::uint64_t>(p);
}

EditorConfig editor_config(const CompressOptions& o) {
    EditorConfig cfg;
    cfg.tier = o.tier;
    cfg.q_max = o.q_max;
    cfg.threads = o.threads;
    return cfg;
}

// Edits, stream coding, packing and the report; section A already filled.
CompressOutput finish(const ScalarField& f, const ScalarField& fhat, double xi, Archive archive,
                      const CompressOptions& o) {
    CompressOutput out;
    if (xi > 0) {
        out.edited = derive_edits(f, fhat, xi, editor_config(o));
    } else {
        out.edited.g = fhat.values;
        out.edited.edits.xi = xi;
        out.edited.edits.q_max = o.q_max;
    }
    const Bytes stream = encode_edits(out.edited.edits);
    CodedStream coded = code_edit_stream(stream, o.coder);
    archive.header.edit_coder = coded.coder;
    archive.section_b = std::move(coded.bytes);
    out.header = archive.header;
    out.archive = pack_archive(archive);

    const CellComplex cx = CellComplex::build(f.dims);
    out.msc_f = compute_msc(f.values, cx, o.threads);
    const ScalarField g{f.dims, out.edited.g};
    const auto msc_g = compute_msc(g.values, cx, o.threads);
    out.report = make_report(f, g, out.msc_f, msc_g, original_bytes(f, o.precision), archive.section_a.size(),
                             out.archive.size(), out.edited.edits.size());
    return out;
}

ArchiveHeader header_for(const ScalarField& f, const CompressOptions& o, double xi, bool external) {
    ArchiveHeader h;
    h.dims = f.dims;
    h.precision = o.precision;
    h.tier = o.tier;
    h.eb = o.eb;
    h.xi = xi;
    h.q_max = o.q_max;
    h.external_base = external;
    return h;
}

}  // namespace

MetricsReport make_report(const ScalarField& f, const ScalarField& g, const MorseSmaleComplex& msc_f,
                          const MorseSmaleComplex& msc_g, std::uint64_t original, std::uint64_t blob_bytes,
                          std::uint64_t archive_bytes, std::uint64_t n_edited) {
    MetricsReport r;
    const CellComplex cx = CellComplex::build(f.dims);
    r.critical = critical_prf(msc_f.critical, msc_g.critical);
    r.separatrix = separatrix_prf(msc_f, msc_g);
    r.original_bytes = original;
    r.compressed_bytes = blob_bytes;
    r.edit_bytes = archive_bytes - blob_bytes;
    r.n_edited = n_edited;
    r.n_total = static_cast<std::uint64_t>(f.size());
    if (blob_bytes > 0) {
        r.ratio = ratios(original, blob_bytes, r.edit_bytes, n_edited, r.n_total);
    } else {
        // External base: no base payload of ours to measure.
        r.ratio.ocr = static_cast<double>(original) / static_cast<double>(archive_bytes);
        r.ratio.edit_ratio = static_cast<double>(n_edited) / static_cast<double>(r.n_total);
    }
    r.max_abs_error = max_abs_error(f.values, g.values);
    r.w2_sublevel = w2(f, g, cx, Filtration::sublevel);
    r.w2_superlevel = w2(f, g, cx, Filtration::superlevel);
    return r;
}

CompressOutput compress_builtin(const ScalarField& f, const CompressOptions& o) {
    validate_field(f);
    const CompressedBlob blob = compress_field(f, o.eb, o.coder, o.precision);
    const ScalarField fhat = decompress_field(blob);
    Archive a;
    a.header = header_for(f, o, blob.xi, false);
    a.section_a = serialize_blob(blob);
    return finish(f, fhat, blob.xi, std::move(a), o);
}

CompressOutput compress_external(const ScalarField& f, const ScalarField& fhat, const CompressOptions& o) {
    validate_field(f);
    validate_field(fhat);
    if (!(f.dims == fhat.dims)) fail(Errc::invalid_argument, "original and decompressed fields differ in dims");
    const double xi = effective_bound(o.eb, f.values);
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!(std::abs(f.values[i] - fhat.values[i]) <= xi))
            fail(Errc::bound_violation, "external decompressed value at index " + std::to_string(i) +
                                            " is outside the error bound " + format_double(xi));
    Archive a;
    a.header = header_for(f, o, xi, true);
    return finish(f, fhat, xi, std::move(a), o);
}

Decoded decode_archive(std::span<const std::uint8_t> bytes, const std::optional<ScalarField>& fhat) {
    Archive a = unpack_archive(bytes);
    Decoded d;
    d.header = a.header;
    if (a.header.external_base) {
        if (!fhat) fail(Errc::invalid_argument, "archive uses an external base; the decompressed field is required");
        if (!(fhat->dims == a.header.dims)) fail(Errc::format, "external decompressed field does not match archive dims");
        d.fhat = *fhat;
    } else {
        const CompressedBlob blob = parse_blob(a.section_a);
        if (!(blob.dims == a.header.dims)) fail(Errc::format, "base payload dims differ from the archive header");
        if (std::bit_cast<std::uint64_t>(blob.xi) != std::bit_cast<std::uint64_t>(a.header.xi))
            fail(Errc::format, "base payload bound differs from the archive header");
        d.fhat = decompress_field(blob);
        d.blob_bytes = a.section_a.size();
    }
    d.edits = decode_edits(decode_bytes(a.header.edit_coder, a.section_b), a.header.xi, a.header.q_max);
    d.g = apply_edits(d.fhat, d.edits);
    return d;
}

VerifyOutput verify_archive(const ScalarField& f, std::span<const std::uint8_t> archive,
                            const std::optional<ScalarField>& fhat, std::optional<Tier> tier, bool ignore_edits,
                            int threads) {
    validate_field(f);
    const Decoded d = decode_archive(archive, fhat);
    if (!(f.dims == d.header.dims)) fail(Errc::format, "original field does not match archive dims");
    VerifyOutput out;
    out.tier = tier.value_or(d.header.tier);
    if (out.tier > d.header.tier)
        fail(Errc::format, std::string("archive was built for ") + to_string(d.header.tier) + ", cannot verify " +
                               to_string(out.tier));
    const ScalarField& target = ignore_edits ? d.fhat : d.g;
    const CellComplex cx = CellComplex::build(f.dims);
    out.failure = check_tier(f.values, d.fhat.values, target.values, d.header.xi, cx, out.tier);
    const auto msc_f = compute_msc(f.values, cx, threads);
    const auto msc_g = compute_msc(target.values, cx, threads);
    out.report = make_report(f, target, msc_f, msc_g, original_bytes(f, d.header.precision), d.blob_bytes,
                             archive.size(), ignore_edits ? 0 : d.edits.size());
    return out;
}

}  // namespace dmtz
