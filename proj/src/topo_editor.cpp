#include "dmtz/topo_editor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dmtz/error.hpp"

namespace dmtz {

const char* to_string(Tier t) {
    switch (t) {
        case Tier::T1_Extrema: return "T1";
        case Tier::T2_Critical: return "T2";
        case Tier::T3_Connectivity: return "T3";
        case Tier::T4_Separatrix: return "T4";
        case Tier::T5_Persistence: return "T5";
    }
    return "?";
}

std::optional<Tier> parse_tier(std::string_view s) {
    if (!s.empty() && (s.front() == 'T' || s.front() == 't')) s.remove_prefix(1);
    if (s.size() != 1 || s[0] < '1' || s[0] > '5') return std::nullopt;
    return static_cast<Tier>(s[0] - '0');
}

const char* to_string(CaseKind k) {
    switch (k) {
        case CaseKind::FPmin: return "FPmin";
        case CaseKind::FNmin: return "FNmin";
        case CaseKind::FP1saddle: return "FP1saddle";
        case CaseKind::FN1saddle: return "FN1saddle";
        case CaseKind::FP2saddle: return "FP2saddle";
        case CaseKind::FN2saddle: return "FN2saddle";
        case CaseKind::FPmax: return "FPmax";
        case CaseKind::FNmax: return "FNmax";
    }
    return "?";
}

double lower_bound_value(double f, double fhat, double xi) {
    double x = f - xi;
    while (f - x > xi) x = std::nextafter(x, std::numeric_limits<double>::infinity());
    return std::min(x, fhat);
}

double clamp_value(double f, double fhat, double xi) { return fhat + lossless_residual(f, fhat, xi); }

double lossless_residual(double f, double fhat, double xi) {
    const double x = lower_bound_value(f, fhat, xi);
    const double r0 = x - fhat;
    if (fhat + r0 == x) return r0;
    double best = 0;
    double best_value = fhat;
    double up = r0, down = r0;
    for (int k = 0; k < 8; ++k) {
        up = std::nextafter(up, std::numeric_limits<double>::infinity());
        down = std::nextafter(down, -std::numeric_limits<double>::infinity());
        for (const double r : {up, down}) {
            if (r > 0) continue;
            const double v = fhat + r;
            if (v == x) return r;
            if (f - v <= xi && v < best_value) {
                best = r;
                best_value = v;
            }
        }
    }
    return best;
}

namespace {

CaseKind case_kind(int dim, int top, bool false_positive) {
    if (dim == 0) return false_positive ? CaseKind::FPmin : CaseKind::FNmin;
    if (dim == top) return false_positive ? CaseKind::FPmax : CaseKind::FNmax;
    if (dim == 1) return false_positive ? CaseKind::FP1saddle : CaseKind::FN1saddle;
    return false_positive ? CaseKind::FP2saddle : CaseKind::FN2saddle;
}

std::string describe(CellId c) { return "dim " + std::to_string(c.dim) + " cell " + std::to_string(c.index); }

bool same_points(const PersistenceDiagram& expected_from, const PersistenceDiagram& actual,
                 std::span<const double> lower) {
    if (expected_from.pairs.size() != actual.pairs.size()) return false;
    std::vector<std::pair<double, double>> expected;
    expected.reserve(expected_from.pairs.size());
    for (const auto& p : expected_from.pairs) expected.emplace_back(lower[p.birth_vertex], lower[p.death_vertex]);
    std::sort(expected.begin(), expected.end());
    if (expected != actual.points()) return false;
    return expected_from.essential_vertex < 0 || lower[expected_from.essential_vertex] == actual.essential;
}

}  // namespace

Editor::Editor(const ScalarField& f, const ScalarField& fhat, double xi, const EditorConfig& config)
    : config_(config), xi_(xi) {
    validate_field(f);
    validate_field(fhat);
    if (!(f.dims == fhat.dims)) fail(Errc::invalid_argument, "original and decompressed fields differ in dims");
    if (!(xi >= 0) || !std::isfinite(xi)) fail(Errc::invalid_argument, "error bound must be non-negative");
    if (config.q_max < 1 || config.q_max > 52) fail(Errc::invalid_argument, "q_max must be in [1, 52]");
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(std::abs(f.values[i] - fhat.values[i]) <= xi))
            fail(Errc::bound_violation, "decompressed value at index " + std::to_string(i) + " violates the bound");
    }
    complex_ = CellComplex::build(f.dims);
    step_ = quantized_step(xi, config.q_max);
    const auto n = static_cast<std::int64_t>(f.size());
    if (config.max_steps > 0) {
        max_steps_ = config.max_steps;
    } else {
        const double cap = 4.0 * static_cast<double>(n) * std::ldexp(1.0, config.q_max);
        max_steps_ = cap > 4e18 ? std::numeric_limits<std::int64_t>::max() : static_cast<std::int64_t>(cap);
    }
    f_ = f.values;
    fhat_ = fhat.values;
    g_ = fhat.values;
    lower_.resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) lower_[i] = clamp_value(f_[i], fhat_[i], xi_);
    q_.assign(f.size(), 0);
    lossless_.assign(f.size(), 0);
    residual_.assign(f.size(), 0.0);
    grad_f_ = compute_gradient(f_, complex_, config.threads);
    msc_f_.critical = extract_critical(grad_f_);
    if (config.tier >= Tier::T3_Connectivity) msc_f_.separatrices = trace_all(grad_f_, complex_);
    grad_g_ = compute_gradient(g_, complex_, config.threads);
}

void Editor::note_change(std::int64_t v) {
    if (config_.incremental) changed_.push_back(v);
}

void Editor::refresh() {
    if (config_.incremental) {
        update_gradient(grad_g_, g_, complex_, changed_);
    } else {
        grad_g_ = compute_gradient(g_, complex_, config_.threads);
    }
    changed_.clear();
}

StepResult Editor::apply_edit_step(std::int64_t v) {
    if (lossless_[v]) return StepResult::clamped;
    if (++stats_.steps > max_steps_) fail(Errc::internal, "editor step cap exceeded");
    if (q_[v] < kMaxStepCount) {
        const double next = quantized_value(fhat_[v], q_[v] + 1, step_);
        if (next >= lower_[v]) {
            ++q_[v];
            g_[v] = next;
            note_change(v);
            return StepResult::stepped;
        }
    }
    clamp(v);
    return StepResult::clamped;
}

void Editor::clamp(std::int64_t v) {
    if (lossless_[v]) return;
    residual_[v] = lossless_residual(f_[v], fhat_[v], xi_);
    g_[v] = fhat_[v] + residual_[v];
    lossless_[v] = 1;
    q_[v] = 0;
    ++stats_.clamps;
    note_change(v);
}

std::vector<FalseCase> Editor::classify_false_criticals() const {
    std::vector<FalseCase> out;
    const int top = complex_.top_dim();
    for (int dim = 0; dim <= top; ++dim) {
        if (config_.tier == Tier::T1_Extrema && dim != 0 && dim != top) continue;
        for (std::int64_t i = 0; i < complex_.cell_count(dim); ++i) {
            const CellId c{static_cast<std::int8_t>(dim), i};
            const bool orig = grad_f_.is_critical(c);
            const bool cur = grad_g_.is_critical(c);
            if (orig == cur) continue;
            out.push_back({case_kind(dim, top, cur), c, grad_f_.partner(c), grad_g_.partner(c)});
        }
    }
    return out;
}

std::int64_t Editor::drive_below(std::int64_t x, std::int64_t w) {
    std::int64_t steps = 0;
    while (!g_less(x, w) && !lossless_[x]) {
        apply_edit_step(x);
        ++steps;
    }
    return steps;
}

// Original pairing a -> b: the extra vertex x of b must drop below every
// vertex of a (b enters P_a), and with `strong` also below the extra vertex
// of every other cofacet (b is the minimal member of P_a).
std::int64_t Editor::require_pair(CellId a, CellId b, bool strong) {
    const std::int64_t x = extra_vertex(complex_, a, b);
    std::int64_t w = -1;
    for (const std::int64_t v : complex_.cell_vertices(a))
        if (w < 0 || g_less(v, w)) w = v;
    if (strong) {
        for (const CellId c : complex_.cofacets(a)) {
            if (c == b) continue;
            const std::int64_t y = extra_vertex(complex_, a, c);
            if (g_less(y, w)) w = y;
        }
    }
    return drive_below(x, w);
}

// Originally critical a: every cofacet currently in P_a must leave it, by
// lowering a vertex of a below the cofacet's extra vertex. Only vertices
// below that extra vertex in f are candidates; most slack first.
std::int64_t Editor::require_unpaired_up(CellId a) {
    std::int64_t steps = 0;
    const auto vs = complex_.cell_vertices(a);
    for (const CellId b : complex_.cofacets(a)) {
        const std::int64_t x = extra_vertex(complex_, a, b);
        const std::int64_t m = lowest_vertex(g_, vs);
        if (!g_less(x, m)) continue;
        std::vector<std::int64_t> cand;
        for (const std::int64_t v : vs)
            if (f_less(v, x) && !lossless_[v]) cand.push_back(v);
        std::sort(cand.begin(), cand.end(), [&](std::int64_t p, std::int64_t q) {
            const double sp = g_[p] - lower_[p], sq = g_[q] - lower_[q];
            return sp != sq ? sp > sq : p < q;
        });
        for (const std::int64_t v : cand) {
            steps += drive_below(v, x);
            if (g_less(v, x)) break;
        }
    }
    return steps;
}

// Re-establish the original pairing of `a`, recursing into the facet whose
// pairing claims or should claim it.
std::int64_t Editor::fix_cell(CellId a, bool strong, int depth) {
    if (depth > 3) return 0;
    const Pairing orig = grad_f_.at(a);
    const Pairing cur = grad_g_.at(a);
    if (orig == cur) return 0;
    std::int64_t steps = 0;
    if (cur.state == PairState::down && orig != cur)
        steps += fix_cell({static_cast<std::int8_t>(a.dim - 1), cur.partner}, true, depth + 1);
    switch (orig.state) {
        case PairState::up:
            steps += require_pair(a, {static_cast<std::int8_t>(a.dim + 1), orig.partner}, strong || depth > 0);
            break;
        case PairState::critical:
            steps += require_unpaired_up(a);
            break;
        case PairState::down:
            steps += fix_cell({static_cast<std::int8_t>(a.dim - 1), orig.partner}, true, depth + 1);
            break;
    }
    return steps;
}

std::int64_t Editor::fix_false_critical(const FalseCase& c) { return fix_cell(c.cell, false, 0); }

// Last resort when no targeted fix moved anything: one step at every free
// vertex of the closed 1-ring. Pairings depend only on that ring, so with the
// ring fully at its lower bound the original pairing is restored.
std::int64_t Editor::ring_fallback(const std::vector<CellId>& cells) {
    std::vector<std::int64_t> ring;
    for (const CellId c : cells)
        for (const std::int64_t v : complex_.cell_vertices(c)) {
            ring.push_back(v);
            for (const std::int64_t w : complex_.neighbors(v)) ring.push_back(w);
        }
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    std::int64_t steps = 0;
    for (const std::int64_t v : ring) {
        if (lossless_[v]) continue;
        apply_edit_step(v);
        ++steps;
    }
    return steps;
}

std::int64_t Editor::run_c_loop() {
    std::int64_t passes = 0;
    for (;;) {
        refresh();
        ++passes;
        ++stats_.c_passes;
        const auto cases = classify_false_criticals();
        if (cases.empty()) return passes;
        stats_.false_cases += static_cast<std::int64_t>(cases.size());
        std::int64_t steps = 0;
        for (const auto& c : cases) steps += fix_false_critical(c);
        if (steps == 0) {
            std::vector<CellId> cells;
            for (const auto& c : cases) cells.push_back(c.cell);
            if (ring_fallback(cells) == 0)
                fail(Errc::internal, "C-loop stalled at " + describe(cases.front().cell) +
                                         " with every nearby vertex at its lower bound");
        }
    }
}

Separatrix Editor::trace_like(const Separatrix& original) const {
    switch (original.kind) {
        case SeparatrixKind::descending: return trace_descending(grad_g_, complex_, original.origin);
        case SeparatrixKind::ascending: return trace_ascending(grad_g_, complex_, original.origin);
        case SeparatrixKind::connector: return trace_connectors(grad_g_, complex_, original.origin);
    }
    fail(Errc::internal, "unknown separatrix kind");
}

bool Editor::separatrix_matches(std::size_t index, const Separatrix& current) const {
    const Separatrix& orig = msc_f_.separatrices[index];
    if (config_.tier == Tier::T3_Connectivity)
        return orig.reached == current.reached && orig.boundary_exits == current.boundary_exits;
    return orig.branches == current.branches;
}

std::optional<Troublemaker> Editor::find_troublemaker(std::size_t index) const {
    const Separatrix& sep = msc_f_.separatrices[index];
    const int top = complex_.top_dim();
    auto diverged = [&](CellId c) { return grad_f_.at(c) != grad_g_.at(c); };
    auto make = [&](CellId c) { return Troublemaker{c, grad_f_.partner(c), grad_g_.partner(c), index}; };
    switch (sep.kind) {
        case SeparatrixKind::descending:
            for (const auto& branch : sep.branches)
                for (const CellId c : branch)
                    if (c.dim == 0 && diverged(c)) return make(c);
            break;
        case SeparatrixKind::ascending:
            for (const auto& branch : sep.branches)
                for (const CellId t : branch) {
                    if (t.dim != top || !diverged(t)) continue;
                    // The divergence sits at the (top-1)-cell that pairs with t.
                    if (auto p = grad_f_.partner(t)) return make(*p);
                    if (auto p = grad_g_.partner(t)) return make(*p);
                    return make(t);
                }
            break;
        case SeparatrixKind::connector:
            for (const CellId t : sep.branches.front()) {
                if (t.dim != 2) continue;
                for (const CellId e : complex_.facets(t))
                    if (diverged(e)) return make(e);
            }
            break;
    }
    return std::nullopt;
}

std::int64_t Editor::fix_troublemaker(const Troublemaker& tm) { return fix_cell(tm.cell, true, 0); }

bool Editor::run_s_loop() {
    for (;;) {
        refresh();
        if (!classify_false_criticals().empty()) return false;
        ++stats_.s_passes;
        std::vector<Troublemaker> tms;
        std::vector<CellId> stuck;
        for (std::size_t i = 0; i < msc_f_.separatrices.size(); ++i) {
            if (separatrix_matches(i, trace_like(msc_f_.separatrices[i]))) continue;
            if (auto tm = find_troublemaker(i))
                tms.push_back(*tm);
            else
                stuck.push_back(msc_f_.separatrices[i].origin);
        }
        if (tms.empty() && stuck.empty()) return true;
        stats_.troublemakers += static_cast<std::int64_t>(tms.size());
        std::int64_t steps = 0;
        for (const auto& tm : tms) steps += fix_troublemaker(tm);
        if (steps == 0) {
            for (const auto& tm : tms) stuck.push_back(tm.cell);
            if (ring_fallback(stuck) == 0)
                fail(Errc::internal, "S-loop stalled at " + describe(stuck.front()) +
                                         " with every nearby vertex at its lower bound");
        }
    }
}

void Editor::clamp_original_critical_vertices() {
    for (const CellId c : msc_f_.critical.all())
        for (const std::int64_t v : complex_.cell_vertices(c)) clamp(v);
}

bool Editor::persistence_matches() const { return persistence_shift_matches(f_, g_, lower_, complex_); }

std::int64_t Editor::refine_persistence() {
    ++stats_.persistence_rounds;
    std::vector<std::int64_t> involved;
    for (const Filtration dir : {Filtration::sublevel, Filtration::superlevel}) {
        for (const auto* values : {&f_, &g_}) {
            const auto pd = persistence_0d(*values, complex_, dir);
            for (const auto& p : pd.pairs) {
                involved.push_back(p.birth_vertex);
                involved.push_back(p.death_vertex);
            }
            if (pd.essential_vertex >= 0) involved.push_back(pd.essential_vertex);
        }
    }
    std::sort(involved.begin(), involved.end());
    involved.erase(std::unique(involved.begin(), involved.end()), involved.end());
    auto clamp_free = [&](const std::vector<std::int64_t>& vs) {
        std::int64_t n = 0;
        for (const auto v : vs)
            if (!lossless_[v]) {
                clamp(v);
                ++n;
            }
        return n;
    };
    if (const auto n = clamp_free(involved)) return n;
    std::vector<std::int64_t> ring;
    for (const auto v : involved)
        for (const auto w : complex_.neighbors(v)) ring.push_back(w);
    if (const auto n = clamp_free(ring)) return n;
    std::vector<std::int64_t> all(f_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::int64_t>(i);
    return clamp_free(all);
}

void Editor::run() {
    if (config_.tier == Tier::T5_Persistence) clamp_original_critical_vertices();
    for (;;) {
        run_c_loop();
        if (config_.tier >= Tier::T3_Connectivity) {
            while (!run_s_loop()) {
                ++stats_.alternations;
                run_c_loop();
            }
        }
        if (config_.tier == Tier::T5_Persistence && !persistence_matches()) {
            if (refine_persistence() == 0)
                fail(Errc::internal, "persistence diagrams differ with every vertex at its lower bound");
            continue;
        }
        break;
    }
    refresh();
}

EditSet Editor::edits() const {
    EditSet e;
    e.xi = xi_;
    e.q_max = config_.q_max;
    for (std::size_t i = 0; i < g_.size(); ++i) {
        const auto v = static_cast<std::int64_t>(i);
        if (lossless_[i])
            e.lossless.push_back({v, residual_[i]});
        else if (q_[i] > 0)
            e.quantized.push_back({v, q_[i]});
    }
    return e;
}

EditResult derive_edits(const ScalarField& f, const ScalarField& fhat, double xi, const EditorConfig& config) {
    Editor e(f, fhat, xi, config);
    e.run();
    return {e.edits(), e.g(), e.stats()};
}

ScalarField apply_edits(const ScalarField& fhat, const EditSet& edits) {
    const auto n = static_cast<std::int64_t>(fhat.size());
    std::int64_t prev = -1;
    for (const auto& q : edits.quantized) {
        if (q.index <= prev || q.index >= n) fail(Errc::format, "quantized edit index out of order or range");
        if (q.count == 0 || q.count > kMaxStepCount) fail(Errc::format, "quantized edit count out of range");
        prev = q.index;
    }
    prev = -1;
    for (const auto& l : edits.lossless) {
        if (l.index <= prev || l.index >= n) fail(Errc::format, "lossless edit index out of order or range");
        if (!(l.residual <= 0) || !std::isfinite(l.residual)) fail(Errc::format, "lossless residual must be <= 0");
        prev = l.index;
    }
    std::size_t i = 0, j = 0;
    while (i < edits.quantized.size() && j < edits.lossless.size()) {
        const auto a = edits.quantized[i].index, b = edits.lossless[j].index;
        if (a == b) fail(Errc::format, "vertex " + std::to_string(a) + " has both a quantized and a lossless edit");
        if (a < b)
            ++i;
        else
            ++j;
    }
    if (!edits.quantized.empty() && (edits.q_max < 1 || edits.q_max > 52)) fail(Errc::format, "q_max out of range");

    ScalarField g = fhat;
    const double step = quantized_step(edits.xi, edits.q_max);
    for (const auto& q : edits.quantized) g.values[q.index] = quantized_value(fhat.values[q.index], q.count, step);
    for (const auto& l : edits.lossless) g.values[l.index] = fhat.values[l.index] + l.residual;
    return g;
}

bool persistence_shift_matches(std::span<const double> f, std::span<const double> g, std::span<const double> lower,
                               const CellComplex& complex) {
    for (const Filtration dir : {Filtration::sublevel, Filtration::superlevel}) {
        if (!same_points(persistence_0d(f, complex, dir), persistence_0d(g, complex, dir), lower)) return false;
    }
    return true;
}

std::string check_tier(std::span<const double> f, std::span<const double> fhat, std::span<const double> g, double xi,
                       const CellComplex& complex, Tier tier) {
    if (f.size() != g.size() || static_cast<std::int64_t>(f.size()) != complex.dims().vertex_count())
        return "field sizes differ";
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!(std::abs(f[i] - g[i]) <= xi)) return "error bound violated at vertex " + std::to_string(i);
    const GradientField gf = compute_gradient(f, complex);
    const GradientField gg = compute_gradient(g, complex);
    const CriticalSet cf = extract_critical(gf);
    const CriticalSet cg = extract_critical(gg);
    const int top = complex.top_dim();
    for (int dim = 0; dim <= top; ++dim) {
        if (tier == Tier::T1_Extrema && dim != 0 && dim != top) continue;
        for (std::int64_t i = 0; i < complex.cell_count(dim); ++i) {
            const CellId c{static_cast<std::int8_t>(dim), i};
            const bool a = gf.is_critical(c), b = gg.is_critical(c);
            if (a != b) return std::string("false critical cell: ") + to_string(case_kind(dim, top, b)) + " at " + describe(c);
        }
    }
    if (tier >= Tier::T3_Connectivity) {
        for (const Separatrix& s : trace_all(gf, complex)) {
            Separatrix cur;
            switch (s.kind) {
                case SeparatrixKind::descending: cur = trace_descending(gg, complex, s.origin); break;
                case SeparatrixKind::ascending: cur = trace_ascending(gg, complex, s.origin); break;
                case SeparatrixKind::connector: cur = trace_connectors(gg, complex, s.origin); break;
            }
            const bool ok = tier == Tier::T3_Connectivity
                                ? s.reached == cur.reached && s.boundary_exits == cur.boundary_exits
                                : s.branches == cur.branches;
            if (!ok) return std::string(to_string(s.kind)) + " separatrix of saddle " + describe(s.origin) + " differs";
        }
    }
    if (tier == Tier::T5_Persistence) {
        if (fhat.size() != f.size()) return "T5 check needs the decompressed field";
        std::vector<double> lower(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) lower[i] = clamp_value(f[i], fhat[i], xi);
        if (!persistence_shift_matches(f, g, lower, complex)) return "0-dim persistence diagrams differ";
    }
    return {};
}

}  // namespace dmtz
