#include "dmtz/discrete_morse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <string>

#include "dmtz/error.hpp"
#include "dmtz/parallel.hpp"

namespace dmtz {

int threads_from_env() {
    const char* env = std::getenv("DMTZ_THREADS");
    int n = env ? std::atoi(env) : 0;
    if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return n;
}

void validate_field(const ScalarField& field) {
    validate_dims(field.dims);
    if (static_cast<std::int64_t>(field.values.size()) != field.dims.vertex_count())
        fail(Errc::invalid_argument, "field has " + std::to_string(field.values.size()) + " values, grid needs " +
                                         std::to_string(field.dims.vertex_count()));
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        if (!std::isfinite(field.values[i]))
            fail(Errc::invalid_argument, "non-finite value at index " + std::to_string(i));
    }
}

ExtendedCellKey extended_key(std::span<const double> values, const CellComplex& complex, CellId cell) {
    const auto vs = complex.cell_vertices(cell);
    ExtendedCellKey key;
    for (auto v : vs) key.push_back({values[static_cast<std::size_t>(v)], v});
    std::sort(key.begin(), key.end(), [](const auto& a, const auto& b) {
        return b.first < a.first || (a.first == b.first && b.second < a.second);
    });
    return key;
}

bool key_less(const ExtendedCellKey& a, const ExtendedCellKey& b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t k = 0; k < n; ++k) {
        if (a[k] == b[k]) continue;
        return a[k].first < b[k].first || (a[k].first == b[k].first && a[k].second < b[k].second);
    }
    return a.size() < b.size();
}

bool extended_less(std::span<const double> values, const CellComplex& complex, CellId a, CellId b) {
    return key_less(extended_key(values, complex, a), extended_key(values, complex, b));
}

std::int64_t lowest_vertex(std::span<const double> values, const VertexTuple& vertices) {
    std::int64_t lo = vertices[0];
    for (std::size_t k = 1; k < vertices.size(); ++k)
        if (sos_less(values, vertices[k], lo)) lo = vertices[k];
    return lo;
}

std::int64_t extra_vertex(const CellComplex& complex, CellId cell, CellId cofacet) {
    const auto inner = complex.cell_vertices(cell);
    for (auto v : complex.cell_vertices(cofacet)) {
        if (std::find(inner.begin(), inner.end(), v) == inner.end()) return v;
    }
    fail(Errc::internal, "extra_vertex: cells are not incident");
}

CellList steepest_candidates(std::span<const double> values, const CellComplex& complex, CellId a) {
    CellList out;
    const std::int64_t lo = lowest_vertex(values, complex.cell_vertices(a));
    for (const CellId b : complex.cofacets(a)) {
        if (sos_less(values, extra_vertex(complex, a, b), lo)) out.push_back(b);
    }
    return out;
}

GradientField::GradientField(const CellComplex& complex) : top_(complex.top_dim()) {
    cells_.resize(static_cast<std::size_t>(top_) + 1);
    for (int d = 0; d <= top_; ++d) cells_[d].assign(static_cast<std::size_t>(complex.cell_count(d)), Pairing{});
}

std::optional<CellId> GradientField::partner(CellId c) const {
    const Pairing& p = at(c);
    switch (p.state) {
        case PairState::up:
            return CellId{static_cast<std::int8_t>(c.dim + 1), p.partner};
        case PairState::down:
            return CellId{static_cast<std::int8_t>(c.dim - 1), p.partner};
        default:
            return std::nullopt;
    }
}

namespace {

// Pairing of one cell given the (final) pairing of the dimension below.
Pairing pair_cell(const GradientField& gradient, std::span<const double> values, const CellComplex& complex,
                  CellId a) {
    const auto vs = complex.cell_vertices(a);
    std::size_t lo_pos = 0;
    for (std::size_t k = 1; k < vs.size(); ++k)
        if (sos_less(values, vs[k], vs[lo_pos])) lo_pos = k;

    if (a.dim > 0) {
        const CellId top_facet = complex.facets(a)[lo_pos];
        const Pairing& fp = gradient.at(top_facet);
        if (fp.state == PairState::up && fp.partner == a.index) return {PairState::down, top_facet.index};
    }
    if (a.dim < complex.top_dim()) {
        const std::int64_t lo = vs[lo_pos];
        std::int64_t best = -1;
        std::int64_t best_extra = -1;
        for (const CellId b : complex.cofacets(a)) {
            const std::int64_t x = extra_vertex(complex, a, b);
            if (!sos_less(values, x, lo)) continue;
            if (best < 0 || sos_less(values, x, best_extra)) {
                best = b.index;
                best_extra = x;
            }
        }
        if (best >= 0) return {PairState::up, best};
    }
    return {};
}

}  // namespace

GradientField compute_gradient(std::span<const double> values, const CellComplex& complex, int threads) {
    if (static_cast<std::int64_t>(values.size()) != complex.dims().vertex_count())
        fail(Errc::invalid_argument, "field and complex dimensions disagree");
    GradientField gradient(complex);
    for (int d = 0; d <= complex.top_dim(); ++d) {
        const auto dim = static_cast<std::int8_t>(d);
        parallel_for(complex.cell_count(d), threads, [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t i = lo; i < hi; ++i) {
                const CellId a{dim, i};
                gradient.at(a) = pair_cell(gradient, values, complex, a);
            }
        });
    }
    return gradient;
}

void update_gradient(GradientField& gradient, std::span<const double> values, const CellComplex& complex,
                     std::span<const std::int64_t> changed) {
    const std::int64_t nv = complex.dims().vertex_count();
    std::vector<char> ring(static_cast<std::size_t>(nv), 0);
    std::vector<std::int64_t> ring_list;
    auto mark = [&](std::int64_t v) {
        if (!ring[static_cast<std::size_t>(v)]) {
            ring[static_cast<std::size_t>(v)] = 1;
            ring_list.push_back(v);
        }
    };
    for (auto v : changed) {
        mark(v);
        for (auto w : complex.neighbors(v)) mark(w);
    }
    for (int d = 0; d <= complex.top_dim(); ++d) {
        std::vector<CellId> cells;
        for (auto v : ring_list) {
            auto s = complex.star(v, d);
            cells.insert(cells.end(), s.begin(), s.end());
        }
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        for (const CellId a : cells) gradient.at(a) = pair_cell(gradient, values, complex, a);
    }
}

std::vector<CellId> CriticalSet::all() const {
    std::vector<CellId> out = minima;
    out.insert(out.end(), one_saddles.begin(), one_saddles.end());
    out.insert(out.end(), two_saddles.begin(), two_saddles.end());
    out.insert(out.end(), maxima.begin(), maxima.end());
    return out;
}

std::int64_t CriticalSet::euler_sum() const {
    const auto n = [](const std::vector<CellId>& v) { return static_cast<std::int64_t>(v.size()); };
    const std::int64_t s = n(minima) - n(one_saddles);
    return top_dim == 3 ? s + n(two_saddles) - n(maxima) : s + n(maxima);
}

CriticalSet extract_critical(const GradientField& gradient) {
    CriticalSet cs;
    const int top = gradient.top_dim();
    cs.top_dim = top;
    for (int d = 0; d <= top; ++d) {
        for (std::int64_t i = 0; i < gradient.count(d); ++i) {
            const CellId c{static_cast<std::int8_t>(d), i};
            if (!gradient.is_critical(c)) continue;
            if (d == 0)
                cs.minima.push_back(c);
            else if (d == top)
                cs.maxima.push_back(c);
            else if (d == 1)
                cs.one_saddles.push_back(c);
            else
                cs.two_saddles.push_back(c);
        }
    }
    return cs;
}

const char* to_string(SeparatrixKind kind) {
    switch (kind) {
        case SeparatrixKind::descending:
            return "descending";
        case SeparatrixKind::ascending:
            return "ascending";
        case SeparatrixKind::connector:
            return "connector";
    }
    return "?";
}

namespace {

[[noreturn]] void cycle_detected(CellId origin) {
    fail(Errc::internal, "cycle detected while tracing from cell (" + std::to_string(origin.dim) + ", " +
                             std::to_string(origin.index) + "): corrupt gradient field");
}

}  // namespace

Separatrix trace_descending(const GradientField& gradient, const CellComplex& complex, CellId saddle) {
    if (saddle.dim != 1 || !gradient.is_critical(saddle))
        fail(Errc::invalid_argument, "trace_descending needs a critical 1-cell");
    Separatrix sep;
    sep.kind = SeparatrixKind::descending;
    sep.origin = saddle;
    const std::int64_t limit = complex.total_cells();
    for (const CellId start : complex.facets(saddle)) {
        std::vector<CellId> path{saddle};
        CellId v = start;
        for (std::int64_t steps = 0;; ++steps) {
            if (steps > limit) cycle_detected(saddle);
            path.push_back(v);
            const Pairing& p = gradient.at(v);
            if (p.state == PairState::critical) {
                sep.reached.push_back(v);
                break;
            }
            if (p.state != PairState::up) fail(Errc::internal, "vertex paired downward");
            const CellId edge{1, p.partner};
            path.push_back(edge);
            const auto ev = complex.cell_vertices(edge);
            v = CellId{0, ev[0] == v.index ? ev[1] : ev[0]};
        }
        sep.branches.push_back(std::move(path));
    }
    std::sort(sep.reached.begin(), sep.reached.end());
    return sep;
}

Separatrix trace_ascending(const GradientField& gradient, const CellComplex& complex, CellId saddle) {
    const int top = complex.top_dim();
    if (saddle.dim != top - 1 || !gradient.is_critical(saddle))
        fail(Errc::invalid_argument, "trace_ascending needs a critical (top-1)-cell");
    Separatrix sep;
    sep.kind = SeparatrixKind::ascending;
    sep.origin = saddle;
    const std::int64_t limit = complex.total_cells();
    for (const CellId first : complex.cofacets(saddle)) {
        std::vector<CellId> path{saddle};
        CellId current = saddle;
        CellId t = first;
        for (std::int64_t steps = 0;; ++steps) {
            if (steps > limit) cycle_detected(saddle);
            path.push_back(t);
            const Pairing& p = gradient.at(t);
            if (p.state == PairState::critical) {
                sep.reached.push_back(t);
                break;
            }
            const CellId c{static_cast<std::int8_t>(top - 1), p.partner};
            if (c == current) fail(Errc::internal, "ascending path re-entered its own pair");
            path.push_back(c);
            const auto cof = complex.cofacets(c);
            std::optional<CellId> next;
            for (const CellId u : cof)
                if (u != t) next = u;
            if (!next) {
                ++sep.boundary_exits;
                break;
            }
            current = c;
            t = *next;
        }
        sep.branches.push_back(std::move(path));
    }
    std::sort(sep.reached.begin(), sep.reached.end());
    return sep;
}

Separatrix trace_connectors(const GradientField& gradient, const CellComplex& complex, CellId two_saddle) {
    if (complex.top_dim() != 3 || two_saddle.dim != 2 || !gradient.is_critical(two_saddle))
        fail(Errc::invalid_argument, "trace_connectors needs a critical 2-cell of a 3D complex");
    Separatrix sep;
    sep.kind = SeparatrixKind::connector;
    sep.origin = two_saddle;
    std::vector<CellId> visit{two_saddle};
    std::vector<char> seen(static_cast<std::size_t>(complex.cell_count(2)), 0);
    seen[static_cast<std::size_t>(two_saddle.index)] = 1;
    std::deque<CellId> queue{two_saddle};
    const std::int64_t limit = complex.total_cells();
    std::int64_t steps = 0;
    while (!queue.empty()) {
        if (++steps > limit) cycle_detected(two_saddle);
        const CellId t = queue.front();
        queue.pop_front();
        const Pairing& tp = gradient.at(t);
        for (const CellId e : complex.facets(t)) {
            if (tp.state == PairState::down && tp.partner == e.index) continue;
            const Pairing& ep = gradient.at(e);
            if (ep.state == PairState::critical) {
                visit.push_back(e);
                sep.reached.push_back(e);
            } else if (ep.state == PairState::up && ep.partner != t.index) {
                const CellId next{2, ep.partner};
                if (seen[static_cast<std::size_t>(next.index)]) continue;
                seen[static_cast<std::size_t>(next.index)] = 1;
                visit.push_back(e);
                visit.push_back(next);
                queue.push_back(next);
            }
        }
    }
    std::sort(sep.reached.begin(), sep.reached.end());
    sep.reached.erase(std::unique(sep.reached.begin(), sep.reached.end()), sep.reached.end());
    sep.branches.push_back(std::move(visit));
    return sep;
}

std::vector<Separatrix> trace_all(const GradientField& gradient, const CellComplex& complex) {
    const CriticalSet cs = extract_critical(gradient);
    const int top = complex.top_dim();
    std::vector<Separatrix> out;
    for (const CellId s : cs.one_saddles) out.push_back(trace_descending(gradient, complex, s));
    const auto& upper = top == 2 ? cs.one_saddles : cs.two_saddles;
    for (const CellId s : upper) out.push_back(trace_ascending(gradient, complex, s));
    if (top == 3)
        for (const CellId s : cs.two_saddles) out.push_back(trace_connectors(gradient, complex, s));
    return out;
}

MorseSmaleComplex compute_msc(std::span<const double> values, const CellComplex& complex, int threads) {
    const GradientField gradient = compute_gradient(values, complex, threads);
    return {extract_critical(gradient), trace_all(gradient, complex)};
}

}  // namespace dmtz
