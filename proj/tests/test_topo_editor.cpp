#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "doctest.h"
#include "dmtz/base_codec.hpp"
#include "dmtz/error.hpp"
#include "dmtz/topo_editor.hpp"
#include "oracles.hpp"

using namespace dmtz;

namespace {

struct Fixture {
    ScalarField f;
    ScalarField fhat;
    double xi = 0;
};

// Random field, put through the base codec at a relative bound.
Fixture codec_fixture(std::uint64_t seed, const GridDims& d, double rel = 1e-2) {
    Fixture fx;
    fx.f = {d, oracle::random_field(seed, d)};
    const auto blob = compress_field(fx.f, {BoundMode::relative, rel});
    fx.fhat = decompress_field(blob);
    fx.xi = blob.xi;
    return fx;
}

// Random field plus uniform noise in [-xi, xi].
Fixture noise_fixture(std::uint64_t seed, const GridDims& d, double xi) {
    Fixture fx;
    fx.f = {d, oracle::random_field(seed, d)};
    fx.fhat = fx.f;
    fx.xi = xi;
    std::mt19937_64 rng(seed * 7919 + 1);
    std::uniform_real_distribution<double> u(-xi, xi);
    for (auto& v : fx.fhat.values) v += u(rng);
    for (std::size_t i = 0; i < fx.f.size(); ++i)
        if (!(std::abs(fx.f.values[i] - fx.fhat.values[i]) <= xi)) fx.fhat.values[i] = fx.f.values[i];
    return fx;
}

using TupleSet = std::set<std::pair<oracle::Tuple, bool>>;

// Criticality per cell tuple by brute force.
std::set<oracle::Tuple> brute_critical(const std::vector<double>& f, const oracle::BruteComplex& bc) {
    std::set<oracle::Tuple> out;
    for (const auto& [t, p] : oracle::brute_gradient(f, bc))
        if (p.state == 0) out.insert(t);
    return out;
}

oracle::Tuple tuple(const CellComplex& cx, CellId c) {
    const auto t = cx.cell_vertices(c);
    return {t.begin(), t.end()};
}

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return Errc::internal;
}

}  // namespace

TEST_CASE("step arithmetic") {
    CHECK(quantized_step(0.064, 6) == 0.001);
    CHECK(quantized_step(1.0, 1) == 0.5);
    CHECK(quantized_value(1.0, 3, 0.001) == 1.0 - 3.0 * 0.001);
    CHECK(quantized_value(2.5, 0, 0.25) == 2.5);

    // Bound f - xi = 0.75 is reachable from fhat = 0.9.
    CHECK(lower_bound_value(1.0, 0.9, 0.25) == 0.75);
    const double r = lossless_residual(1.0, 0.9, 0.25);
    CHECK(r <= 0);
    CHECK(0.9 + r == 0.75);
    CHECK(clamp_value(1.0, 0.9, 0.25) == 0.75);
    // Capped at fhat when fhat is already the bound.
    CHECK(lower_bound_value(1.0, 0.75, 0.25) == 0.75);
    CHECK(lossless_residual(1.0, 0.75, 0.25) == 0.0);
}

TEST_CASE("lower bound and clamp value stay inside the bound") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e3, 1e3), e(1e-9, 10);
    for (int t = 0; t < 20000; ++t) {
        const double f = u(rng);
        double xi = e(rng);
        if (t % 5 == 0) xi = std::ldexp(xi, -30);
        const double fhat = f + std::uniform_real_distribution<double>(-xi, xi)(rng);
        if (!(std::abs(f - fhat) <= xi)) continue;
        const double lo = lower_bound_value(f, fhat, xi);
        CHECK(f - lo <= xi);
        CHECK(lo <= fhat);
        if (lo > f - xi && lo < fhat) CHECK(f - std::nextafter(lo, -INFINITY) > xi);
        const double c = clamp_value(f, fhat, xi);
        CHECK(std::abs(f - c) <= xi);
        CHECK(c <= fhat);
    }
    // Near zero the bound is finer than fhat's ulp: clamp value is the best
    // reachable value, possibly above the exact bound.
    const double f = 1e-3, fhat = 0.5e-3 + 1e-3, xi = 0.5e-3 + 1e-12;
    const double c = clamp_value(f, fhat, xi);
    CHECK(std::abs(f - c) <= xi);
    CHECK(c >= lower_bound_value(f, fhat, xi));
}

TEST_CASE("editor rejects out-of-bound input") {
    const GridDims d{3, 3, 1};
    ScalarField f{d, oracle::random_field(1, d)};
    ScalarField fhat = f;
    fhat.values[4] += 0.5;
    CHECK(code_of([&] { Editor(f, fhat, 0.1); }) == Errc::bound_violation);
    CHECK(code_of([&] { Editor(f, f, -1.0); }) == Errc::invalid_argument);
    EditorConfig bad;
    bad.q_max = 0;
    CHECK(code_of([&] { Editor(f, f, 0.1, bad); }) == Errc::invalid_argument);
}

TEST_CASE("edit steps descend and clamp at the bound") {
    const GridDims d{4, 4, 1};
    ScalarField f{d, oracle::random_field(2, d)};
    EditorConfig cfg;
    cfg.q_max = 2;
    Editor e(f, f, 0.064, cfg);
    CHECK(e.step_size() == 0.016);
    const std::int64_t v = 5;
    double prev = e.g()[v];
    int stepped = 0;
    for (;;) {
        const auto r = e.apply_edit_step(v);
        if (r == StepResult::clamped) {
            CHECK(e.g()[v] <= prev);
            break;
        }
        CHECK(e.g()[v] < prev);
        prev = e.g()[v];
        ++stepped;
        CHECK(e.count(v) == static_cast<std::uint32_t>(stepped));
    }
    // 0.064 / 0.016 = 4 quanta fit; the fifth call clamps.
    CHECK(stepped == 4);
    CHECK(e.is_lossless(v));
    CHECK(e.g()[v] == e.lower(v));
    prev = e.g()[v];
    CHECK(e.apply_edit_step(v) == StepResult::clamped);
    CHECK(e.g()[v] == prev);
}

TEST_CASE("monotone fuzz of edit steps") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto fx = noise_fixture(seed, {6, 5, 1}, 0.05);
        EditorConfig cfg;
        cfg.q_max = 3;
        Editor e(fx.f, fx.fhat, fx.xi, cfg);
        std::mt19937_64 rng(seed);
        const auto n = static_cast<std::int64_t>(fx.f.size());
        auto before = e.g();
        for (int t = 0; t < 2000; ++t) {
            const auto v = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n));
            e.apply_edit_step(v);
            const auto& g = e.g();
            for (std::int64_t i = 0; i < n; ++i) {
                REQUIRE(g[i] <= before[i]);
                REQUIRE(g[i] >= e.lower(i));
                REQUIRE(std::abs(g[i] - fx.f.values[i]) <= fx.xi);
            }
            before = g;
        }
        CHECK(apply_edits(fx.fhat, e.edits()).values == e.g());
    }
}

TEST_CASE("a sunken centre creates a false minimum that the C-loop removes") {
    // f = x + 3y on 3x3: single minimum at vertex 0. fhat drops the centre
    // below every neighbour.
    const GridDims d{3, 3, 1};
    ScalarField f{d, {0, 1, 2, 3, 4, 5, 6, 7, 8}};
    ScalarField fhat = f;
    fhat.values[4] = -0.5;
    Editor e(f, fhat, 5.0);
    const auto cases = e.classify_false_criticals();
    bool has_fpmin = false;
    for (const auto& c : cases)
        if (c.kind == CaseKind::FPmin) {
            has_fpmin = true;
            CHECK(c.cell == CellId{0, 4});
            CHECK(c.original_partner.has_value());
            CHECK(!c.current_partner.has_value());
        }
    CHECK(has_fpmin);
    e.run_c_loop();
    CHECK(e.classify_false_criticals().empty());
    CHECK(extract_critical(e.current_gradient()) == e.original_msc().critical);
    for (std::int64_t v = 0; v < 9; ++v) CHECK(e.g()[v] <= fhat.values[v]);
}

TEST_CASE("classification equals the brute-force criticality difference") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const GridDims d = seed % 2 ? GridDims{5, 4, 1} : GridDims{3, 3, 3};
        const auto fx = noise_fixture(seed, d, 0.08);
        const auto bc = oracle::brute_complex(d);
        const auto cf = brute_critical(fx.f.values, bc);
        const auto cg = brute_critical(fx.fhat.values, bc);
        TupleSet expected;
        for (const auto& t : cg)
            if (!cf.count(t)) expected.insert({t, true});
        for (const auto& t : cf)
            if (!cg.count(t)) expected.insert({t, false});
        for (EditorConfig cfg : {EditorConfig{Tier::T2_Critical}, EditorConfig{Tier::T1_Extrema}}) {
            Editor e(fx.f, fx.fhat, fx.xi, cfg);
            const int top = e.complex().top_dim();
            TupleSet got;
            for (const auto& c : e.classify_false_criticals()) {
                const bool fp = c.kind == CaseKind::FPmin || c.kind == CaseKind::FP1saddle ||
                                c.kind == CaseKind::FP2saddle || c.kind == CaseKind::FPmax;
                got.insert({tuple(e.complex(), c.cell), fp});
            }
            TupleSet want;
            for (const auto& p : expected) {
                const int dim = static_cast<int>(p.first.size()) - 1;
                if (cfg.tier == Tier::T1_Extrema && dim != 0 && dim != top) continue;
                want.insert(p);
            }
            CAPTURE(seed);
            CHECK(got == want);
        }
    }
}

TEST_CASE("C-loop on an unchanged field takes one pass and no edits") {
    const GridDims d{8, 8, 1};
    ScalarField f{d, oracle::random_field(4, d)};
    Editor e(f, f, 0.01);
    CHECK(e.run_c_loop() == 1);
    CHECK(e.edits().empty());
    for (Tier t : {Tier::T1_Extrema, Tier::T3_Connectivity, Tier::T5_Persistence}) {
        EditorConfig cfg;
        cfg.tier = t;
        const auto r = derive_edits(f, f, 0.01, cfg);
        if (t != Tier::T5_Persistence) {
            CHECK(r.edits.empty());
        }
        CHECK(check_tier(f.values, f.values, r.g, 0.01, CellComplex::build(d), t).empty());
    }
}

TEST_CASE("critical sets survive on 50 fixtures (brute-force check)") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const GridDims d = seed % 3 == 0 ? GridDims{4, 3, 3} : GridDims{7, 6, 1};
        const auto fx = codec_fixture(seed, d, seed % 2 ? 1e-2 : 1e-3);
        EditorConfig cfg;
        cfg.tier = static_cast<Tier>(1 + seed % 5);
        const auto r = derive_edits(fx.f, fx.fhat, fx.xi, cfg);
        const auto bc = oracle::brute_complex(d);
        const auto cf = brute_critical(fx.f.values, bc);
        const auto cg = brute_critical(r.g, bc);
        CAPTURE(seed);
        if (cfg.tier == Tier::T1_Extrema) {
            auto extrema = [&](const std::set<oracle::Tuple>& s) {
                std::set<oracle::Tuple> out;
                for (const auto& t : s)
                    if (t.size() == 1 || static_cast<int>(t.size()) == bc.top + 1) out.insert(t);
                return out;
            };
            CHECK(extrema(cf) == extrema(cg));
        } else {
            CHECK(cf == cg);
        }
        CHECK(max_abs_error(fx.f.values, r.g) <= fx.xi);
        for (std::size_t i = 0; i < r.g.size(); ++i) CHECK(r.g[i] <= fx.fhat.values[i]);
        CHECK(apply_edits(fx.fhat, r.edits).values == r.g);
        ++checked;
    }
    CHECK(checked == 50);
}

TEST_CASE("every tier meets its post-conditions") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        for (const GridDims d : {GridDims{16, 12, 1}, GridDims{6, 5, 5}}) {
            const auto fx = codec_fixture(seed, d);
            const auto cx = CellComplex::build(d);
            for (int t = 1; t <= 5; ++t) {
                EditorConfig cfg;
                cfg.tier = static_cast<Tier>(t);
                const auto r = derive_edits(fx.f, fx.fhat, fx.xi, cfg);
                CAPTURE(seed);
                CAPTURE(t);
                CHECK(check_tier(fx.f.values, fx.fhat.values, r.g, fx.xi, cx, cfg.tier) == "");
                // Lower tiers are implied.
                for (int lower = 1; lower < t; ++lower)
                    CHECK(check_tier(fx.f.values, fx.fhat.values, r.g, fx.xi, cx, static_cast<Tier>(lower)) == "");
            }
        }
    }
}

TEST_CASE("connectivity does not imply identical separatrix geometry") {
    // T3 keeps endpoints; on some of these fields the cell paths still move.
    int geometry_differs = 0;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const GridDims d{12, 10, 1};
        const auto fx = codec_fixture(seed, d);
        const auto cx = CellComplex::build(d);
        EditorConfig cfg;
        cfg.tier = Tier::T3_Connectivity;
        const auto r = derive_edits(fx.f, fx.fhat, fx.xi, cfg);
        CHECK(check_tier(fx.f.values, fx.fhat.values, r.g, fx.xi, cx, Tier::T3_Connectivity) == "");
        if (!check_tier(fx.f.values, fx.fhat.values, r.g, fx.xi, cx, Tier::T4_Separatrix).empty()) ++geometry_differs;
    }
    CHECK(geometry_differs > 0);
}

TEST_CASE("T5 diagrams equal the clamped diagrams of f") {
    const auto fx = codec_fixture(7, {32, 32, 1});
    EditorConfig cfg;
    cfg.tier = Tier::T5_Persistence;
    const auto r = derive_edits(fx.f, fx.fhat, fx.xi, cfg);
    const auto cx = CellComplex::build(fx.f.dims);
    std::vector<double> lower(fx.f.size());
    for (std::size_t i = 0; i < lower.size(); ++i) lower[i] = clamp_value(fx.f.values[i], fx.fhat.values[i], fx.xi);
    CHECK(persistence_shift_matches(fx.f.values, r.g, lower, cx));
    // Independent sweep: g's diagram points are f's vertex pairs at g's values.
    for (bool super : {false, true}) {
        const auto pf = persistence_0d(fx.f.values, cx, super ? Filtration::superlevel : Filtration::sublevel);
        const auto ref = oracle::sweep_persistence(r.g, fx.f.dims, super);
        std::vector<std::pair<double, double>> expected;
        for (const auto& p : pf.pairs) expected.emplace_back(lower[p.birth_vertex], lower[p.death_vertex]);
        std::sort(expected.begin(), expected.end());
        CHECK(expected == ref.pairs);
    }
}

TEST_CASE("derive and apply round trip bit-exactly, incremental or not") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const GridDims d = seed % 2 ? GridDims{20, 20, 1} : GridDims{7, 7, 7};
        const auto fx = codec_fixture(seed, d);
        EditorConfig cfg;
        const auto full = derive_edits(fx.f, fx.fhat, fx.xi, cfg);
        cfg.incremental = true;
        const auto inc = derive_edits(fx.f, fx.fhat, fx.xi, cfg);
        CHECK(full.edits == inc.edits);
        cfg.incremental = false;
        cfg.threads = 3;
        CHECK(derive_edits(fx.f, fx.fhat, fx.xi, cfg).edits == full.edits);
        const auto g = apply_edits(fx.fhat, full.edits);
        REQUIRE(g.size() == full.g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            CHECK(std::bit_cast<std::uint64_t>(g.values[i]) == std::bit_cast<std::uint64_t>(full.g[i]));
    }
}

TEST_CASE("apply_edits rejects malformed edit sets") {
    const GridDims d{3, 3, 1};
    ScalarField fhat{d, oracle::random_field(5, d)};
    EditSet ok;
    ok.xi = 0.1;
    ok.quantized = {{1, 2}, {4, 1}};
    ok.lossless = {{2, -0.05}};
    const auto g = apply_edits(fhat, ok);
    CHECK(g.values[1] == quantized_value(fhat.values[1], 2, quantized_step(0.1, 6)));
    CHECK(g.values[2] == fhat.values[2] + -0.05);
    CHECK(g.values[0] == fhat.values[0]);

    auto bad = [&](auto mutate) {
        EditSet e = ok;
        mutate(e);
        return code_of([&] { apply_edits(fhat, e); });
    };
    CHECK(bad([](EditSet& e) { e.quantized = {{4, 1}, {1, 2}}; }) == Errc::format);
    CHECK(bad([](EditSet& e) { e.quantized.push_back({9, 1}); }) == Errc::format);
    CHECK(bad([](EditSet& e) { e.quantized[0].count = 0; }) == Errc::format);
    CHECK(bad([](EditSet& e) { e.quantized[0].count = kMaxStepCount + 1; }) == Errc::format);
    CHECK(bad([](EditSet& e) { e.lossless[0].residual = 0.01; }) == Errc::format);
    CHECK(bad([](EditSet& e) { e.lossless[0].residual = NAN; }) == Errc::format);
    CHECK(bad([](EditSet& e) { e.lossless.push_back({4, -0.01}); }) == Errc::format);
    CHECK(bad([](EditSet& e) { e.q_max = 60; }) == Errc::format);
}

TEST_CASE("step cap raises an internal error") {
    const auto fx = codec_fixture(3, {16, 16, 1});
    EditorConfig cfg;
    cfg.max_steps = 1;
    CHECK(code_of([&] { derive_edits(fx.f, fx.fhat, fx.xi, cfg); }) == Errc::internal);
}

TEST_CASE("tier names") {
    CHECK(parse_tier("T3") == Tier::T3_Connectivity);
    CHECK(parse_tier("t5") == Tier::T5_Persistence);
    CHECK(parse_tier("1") == Tier::T1_Extrema);
    CHECK(!parse_tier("T6").has_value());
    CHECK(!parse_tier("").has_value());
    CHECK(std::string(to_string(Tier::T4_Separatrix)) == "T4");
}
