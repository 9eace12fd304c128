// dmtz: compress / decompress / verify / gen / info.
//
// Exit codes: 0 ok, 1 verification failed, 2 I/O, 3 format or usage,
// 4 error-bound violation, 5 internal.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dmtz/base_codec.hpp"
#include "dmtz/error.hpp"
#include "dmtz/generators.hpp"
#include "dmtz/msc_export.hpp"
#include "dmtz/parallel.hpp"
#include "dmtz/pipeline.hpp"

using namespace dmtz;

namespace {

enum Exit { ok = 0, verify_failed = 1, io = 2, format = 3, bound = 4, internal = 5 };

int exit_for(Errc c) {
    switch (c) {
        case Errc::io: return io;
        case Errc::format:
        case Errc::invalid_argument: return format;
        case Errc::bound_violation: return bound;
        case Errc::internal: return internal;
    }
    return internal;
}

GridDims to_dims(const std::vector<std::int64_t>& v) {
    if (v.size() < 2 || v.size() > 3) fail(Errc::invalid_argument, "--dims takes 2 or 3 values");
    GridDims d{v[0], v[1], v.size() == 3 ? v[2] : 1};
    validate_dims(d);
    return d;
}

Precision to_precision(const std::string& s) {
    if (s == "f32") return Precision::f32;
    if (s == "f64") return Precision::f64;
    fail(Errc::invalid_argument, "precision must be f32 or f64");
}

void print_report(const MetricsReport& r, bool csv) {
    if (csv)
        std::cout << csv_header() << '\n' << to_csv_row(r) << '\n';
    else
        std::cout << to_key_value(r);
}

void write_msc(const std::string& path, const ScalarField& field, int threads) {
    const CellComplex cx = CellComplex::build(field.dims);
    const std::string json = msc_to_json(compute_msc(field.values, cx, threads), cx, field.values);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(json.data()), json.size()));
}

struct Args {
    std::string input, output, original, archive, decompressed, export_msc;
    std::vector<std::int64_t> dims;
    std::string precision = "f64";
    std::string eb_mode = "rel";
    double eb = 1e-3;
    std::string tier;
    int q_max = 6;
    std::string base = "builtin";
    std::string coder = "deflate";
    bool csv = false;
    bool ignore_edits = false;
    std::string family = "gaussian";
    std::uint64_t seed = 1;
    int peaks = 4;
    double jitter = 0;
};

int cmd_compress(const Args& a, int threads) {
    if (a.q_max < 1 || a.q_max > 14) fail(Errc::invalid_argument, "--q-max must be in [1, 14]");
    CompressOptions o;
    if (a.eb_mode != "abs" && a.eb_mode != "rel") fail(Errc::invalid_argument, "--eb-mode must be abs or rel");
    o.eb = {a.eb_mode == "abs" ? BoundMode::absolute : BoundMode::relative, a.eb};
    const auto tier = parse_tier(a.tier.empty() ? "T4" : a.tier);
    if (!tier) fail(Errc::invalid_argument, "unknown tier " + a.tier);
    o.tier = *tier;
    o.q_max = a.q_max;
    const auto coder = parse_coder(a.coder);
    if (!coder) fail(Errc::invalid_argument, "unknown coder " + a.coder);
    o.coder = *coder;
    o.precision = to_precision(a.precision);
    o.threads = threads;
    const GridDims d = to_dims(a.dims);
    const ScalarField f = load_raw(a.input, d, o.precision);
    CompressOutput out;
    if (a.base == "external") {
        if (a.decompressed.empty()) fail(Errc::invalid_argument, "--base external needs --decompressed");
        out = compress_external(f, load_raw(a.decompressed, d, o.precision), o);
    } else if (a.base == "builtin") {
        out = compress_builtin(f, o);
    } else {
        fail(Errc::invalid_argument, "--base must be builtin or external");
    }
    write_file(a.output, out.archive);
    if (!a.export_msc.empty()) write_msc(a.export_msc, f, threads);
    print_report(out.report, a.csv);
    if (!a.csv) {
        const EditorStats& s = out.edited.stats;
        std::cout << "tier = " << to_string(o.tier) << '\n'
                  << "xi = " << format_double(out.header.xi) << '\n'
                  << "n_quantized = " << out.edited.edits.quantized.size() << '\n'
                  << "n_lossless = " << out.edited.edits.lossless.size() << '\n'
                  << "c_passes = " << s.c_passes << '\n'
                  << "s_passes = " << s.s_passes << '\n'
                  << "alternations = " << s.alternations << '\n'
                  << "persistence_rounds = " << s.persistence_rounds << '\n'
                  << "edit_steps = " << s.steps << '\n';
    }
    return ok;
}

std::optional<ScalarField> external_base(const Args& a, const std::vector<std::uint8_t>& bytes) {
    if (a.decompressed.empty()) return std::nullopt;
    const ArchiveHeader h = unpack_archive(bytes).header;
    return load_raw(a.decompressed, h.dims, h.precision);
}

int cmd_decompress(const Args& a, int threads) {
    const Bytes bytes = read_file(a.input);
    const Decoded d = decode_archive(bytes, external_base(a, bytes));
    // Values stay 64-bit unless f32 output is asked for explicitly.
    save_raw(a.output, d.g, to_precision(a.precision));
    if (!a.export_msc.empty()) write_msc(a.export_msc, d.g, threads);
    return ok;
}

int cmd_verify(const Args& a, int threads) {
    const Bytes bytes = read_file(a.archive);
    const ArchiveHeader h = unpack_archive(bytes).header;
    const ScalarField f = load_raw(a.original, h.dims, h.precision);
    std::optional<Tier> tier;
    if (!a.tier.empty()) {
        tier = parse_tier(a.tier);
        if (!tier) fail(Errc::invalid_argument, "unknown tier " + a.tier);
    }
    const VerifyOutput v = verify_archive(f, bytes, external_base(a, bytes), tier, a.ignore_edits, threads);
    print_report(v.report, a.csv);
    if (!v.failure.empty()) {
        std::cout << "verify " << to_string(v.tier) << ": FAIL: " << v.failure << '\n';
        return verify_failed;
    }
    std::cout << "verify " << to_string(v.tier) << ": ok\n";
    return ok;
}

int cmd_gen(const Args& a) {
    GenConfig g;
    const auto fam = parse_family(a.family);
    if (!fam) fail(Errc::invalid_argument, "family must be ramp, gaussian or noise");
    g.family = *fam;
    g.dims = to_dims(a.dims);
    g.seed = a.seed;
    g.peaks = a.peaks;
    g.jitter = a.jitter;
    save_raw(a.output, generate(g), to_precision(a.precision));
    return ok;
}

int cmd_info(const Args& a) {
    const Bytes bytes = read_file(a.input);
    const Archive ar = unpack_archive(bytes);
    const ArchiveHeader& h = ar.header;
    std::cout << "dims = " << h.dims.nx << ' ' << h.dims.ny << ' ' << h.dims.nz << '\n'
              << "precision = " << (h.precision == Precision::f32 ? "f32" : "f64") << '\n'
              << "tier = " << to_string(h.tier) << '\n'
              << "eb_mode = " << (h.eb.mode == BoundMode::absolute ? "abs" : "rel") << '\n'
              << "eb = " << format_double(h.eb.value) << '\n'
              << "xi = " << format_double(h.xi) << '\n'
              << "q_max = " << h.q_max << '\n'
              << "edit_coder = " << to_string(h.edit_coder) << '\n'
              << "base = " << (h.external_base ? "external" : "builtin") << '\n'
              << "section_a_bytes = " << ar.section_a.size() << '\n'
              << "section_b_bytes = " << ar.section_b.size() << '\n'
              << "total_bytes = " << bytes.size() << '\n';
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dmtz: topology-preserving error-bounded lossy compression of 2D/3D scalar grids"};
    app.require_subcommand(1);
    Args a;

    auto* compress = app.add_subcommand("compress", "compress a raw field into a DMTZ1 archive");
    compress->add_option("-i,--input", a.input, "raw little-endian field")->required();
    compress->add_option("-o,--output", a.output, "archive path")->required();
    compress->add_option("--dims", a.dims, "nx ny [nz]")->required()->expected(2, 3);
    compress->add_option("--precision", a.precision, "f32 or f64")->capture_default_str();
    compress->add_option("--eb-mode", a.eb_mode, "abs or rel (times value range)")->capture_default_str();
    compress->add_option("--eb", a.eb, "error bound value")->capture_default_str();
    compress->add_option("--tier", a.tier, "T1..T5 (default T4)");
    compress->add_option("--q-max", a.q_max, "quantized step is xi / 2^q_max")->capture_default_str();
    compress->add_option("--base", a.base, "builtin or external")->capture_default_str();
    compress->add_option("--decompressed", a.decompressed, "externally decompressed field (external base)");
    compress->add_option("--coder", a.coder, "store or deflate")->capture_default_str();
    compress->add_option("--export-msc", a.export_msc, "write the original field's MSC as JSON");
    compress->add_flag("--csv", a.csv, "CSV report instead of key = value");

    auto* decompress = app.add_subcommand("decompress", "rebuild the corrected field from an archive");
    decompress->add_option("-i,--input", a.input, "archive path")->required();
    decompress->add_option("-o,--output", a.output, "raw output path")->required();
    decompress->add_option("--decompressed", a.decompressed, "externally decompressed field (external base)");
    decompress->add_option("--precision", a.precision, "output precision; f32 narrows g")->capture_default_str();
    decompress->add_option("--export-msc", a.export_msc, "write the reconstructed field's MSC as JSON");

    auto* verify = app.add_subcommand("verify", "check an archive's tier guarantees against the original");
    verify->add_option("--original", a.original, "original raw field")->required();
    verify->add_option("--archive", a.archive, "archive path")->required();
    verify->add_option("--decompressed", a.decompressed, "externally decompressed field (external base)");
    verify->add_option("--tier", a.tier, "tier to check (default: the archive's)");
    verify->add_flag("--ignore-edits", a.ignore_edits, "check the base-decompressed field without edits");
    verify->add_flag("--csv", a.csv, "CSV report instead of key = value");

    auto* gen = app.add_subcommand("gen", "write a seeded synthetic field");
    gen->add_option("--family", a.family, "ramp, gaussian or noise")->capture_default_str();
    gen->add_option("--dims", a.dims, "nx ny [nz]")->required()->expected(2, 3);
    gen->add_option("--seed", a.seed)->capture_default_str();
    gen->add_option("--peaks", a.peaks, "gaussian peak count")->capture_default_str();
    gen->add_option("--jitter", a.jitter, "white-noise amplitude")->capture_default_str();
    gen->add_option("--precision", a.precision, "f32 or f64")->capture_default_str();
    gen->add_option("-o,--output", a.output)->required();

    auto* info = app.add_subcommand("info", "print an archive header");
    info->add_option("-i,--input", a.input, "archive path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : format;
    }

    const int threads = threads_from_env();
    try {
        if (*compress) return cmd_compress(a, threads);
        if (*decompress) return cmd_decompress(a, threads);
        if (*verify) return cmd_verify(a, threads);
        if (*gen) return cmd_gen(a);
        if (*info) return cmd_info(a);
    } catch (const Error& e) {
        std::cerr << "dmtz: " << e.what() << '\n';
        return exit_for(e.code());
    } catch (const std::bad_alloc&) {
        std::cerr << "dmtz: out of memory\n";
        return internal;
    } catch (const std::exception& e) {
        std::cerr << "dmtz: " << e.what() << '\n';
        return internal;
    }
    return internal;
}
