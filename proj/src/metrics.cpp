#include "dmtz/metrics.hpp"

#include "dmtz/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <tuple>

namespace dmtz {

namespace {

double ratio_or_one(std::size_t num, std::size_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

template <class T>
std::size_t multiset_overlap(std::vector<T> a, std::vector<T> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t n = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

using BranchKey = std::tuple<int, CellId, std::vector<CellId>>;

std::vector<BranchKey> branch_keys(const MorseSmaleComplex& msc) {
    std::vector<BranchKey> keys;
    for (const auto& s : msc.separatrices)
        for (const auto& b : s.branches) keys.emplace_back(static_cast<int>(s.kind), s.origin, b);
    return keys;
}

struct UnionFind {
    std::vector<std::int64_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::int64_t find(std::int64_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
};

// Minimum-cost perfect assignment on a square matrix (potentials method).
double assignment_cost(const std::vector<std::vector<double>>& c) {
    const std::size_t n = c.size();
    if (n == 0) return 0;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0), v(n + 1, 0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0;
    for (std::size_t j = 1; j <= n; ++j) total += c[p[j] - 1][j - 1];
    return total;
}

}  // namespace

Prf critical_prf(const CriticalSet& original, const CriticalSet& reconstructed) {
    const auto a = original.all();
    const auto b = reconstructed.all();
    const std::size_t m = multiset_overlap(a, b);
    return {ratio_or_one(m, a.size()), ratio_or_one(m, b.size())};
}

Prf separatrix_prf(const MorseSmaleComplex& original, const MorseSmaleComplex& reconstructed) {
    auto a = branch_keys(original);
    auto b = branch_keys(reconstructed);
    const std::size_t na = a.size(), nb = b.size();
    const std::size_t m = multiset_overlap(std::move(a), std::move(b));
    return {ratio_or_one(m, na), ratio_or_one(m, nb)};
}

Ratios ratios(std::uint64_t original_bytes, std::uint64_t compressed_bytes, std::uint64_t edit_bytes,
              std::uint64_t n_edited, std::uint64_t n_total) {
    if (original_bytes == 0 || compressed_bytes == 0 || n_total == 0 || n_edited > n_total)
        fail(Errc::invalid_argument, "ratios: sizes must be positive and n_edited <= n_total");
    Ratios r;
    r.cr = static_cast<double>(original_bytes) / static_cast<double>(compressed_bytes);
    r.ocr = static_cast<double>(original_bytes) / static_cast<double>(compressed_bytes + edit_bytes);
    r.edit_ratio = static_cast<double>(n_edited) / static_cast<double>(n_total);
    return r;
}

std::vector<std::pair<double, double>> PersistenceDiagram::points() const {
    std::vector<std::pair<double, double>> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.emplace_back(p.birth, p.death);
    std::sort(out.begin(), out.end());
    return out;
}

PersistenceDiagram persistence_0d(std::span<const double> values, const CellComplex& complex, Filtration direction) {
    const auto n = static_cast<std::size_t>(complex.dims().vertex_count());
    if (values.size() != n) fail(Errc::invalid_argument, "persistence_0d: field size mismatch");
    const bool up = direction == Filtration::sublevel;
    // before(a, b): a enters the filtration first.
    auto before = [&](std::int64_t a, std::int64_t b) { return up ? sos_less(values, a, b) : sos_less(values, b, a); };
    std::vector<std::int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), before);

    PersistenceDiagram pd;
    UnionFind uf(n);
    std::vector<char> in(n, 0);
    std::vector<std::int64_t> birth(n);  // indexed by root
    std::vector<std::int64_t> roots;
    for (const std::int64_t v : order) {
        roots.clear();
        for (const std::int64_t w : complex.neighbors(v))
            if (in[w]) roots.push_back(uf.find(w));
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        in[v] = 1;
        if (roots.empty()) {
            birth[v] = v;
            continue;
        }
        std::int64_t elder = roots.front();
        for (const auto r : roots)
            if (before(birth[r], birth[elder])) elder = r;
        for (const auto r : roots) {
            if (r == elder) continue;
            pd.pairs.push_back({values[birth[r]], values[v], birth[r], v});
            uf.parent[r] = elder;
        }
        uf.parent[v] = elder;
    }
    if (!order.empty()) {
        pd.essential_vertex = order.front();
        pd.essential = values[order.front()];
    }
    std::sort(pd.pairs.begin(), pd.pairs.end(), [](const PersistencePair& a, const PersistencePair& b) {
        return std::tie(a.birth, a.death, a.birth_vertex, a.death_vertex) <
               std::tie(b.birth, b.death, b.birth_vertex, b.death_vertex);
    });
    return pd;
}

double wasserstein2(std::span<const std::pair<double, double>> a, std::span<const std::pair<double, double>> b) {
    const std::size_t n = a.size(), m = b.size();
    auto diag = [](const std::pair<double, double>& p) {
        const double d = p.second - p.first;
        return 0.5 * d * d;
    };
    std::vector<std::vector<double>> c(n + m, std::vector<double>(n + m, 0.0));
    for (std::size_t i = 0; i < n + m; ++i)
        for (std::size_t j = 0; j < m + n; ++j) {
            if (i < n && j < m) {
                const double db = a[i].first - b[j].first, dd = a[i].second - b[j].second;
                c[i][j] = db * db + dd * dd;
            } else if (i < n) {
                c[i][j] = diag(a[i]);
            } else if (j < m) {
                c[i][j] = diag(b[j]);
            }
        }
    return std::sqrt(std::max(0.0, assignment_cost(c)));
}

double max_abs_error(std::span<const double> f, std::span<const double> g) {
    if (f.size() != g.size()) fail(Errc::invalid_argument, "max_abs_error: size mismatch");
    double m = 0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - g[i]));
    return m;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::pair<const char*, std::string>> report_fields(const MetricsReport& r) {
    return {
        {"critical_recall", format_double(r.critical.recall)},
        {"critical_precision", format_double(r.critical.precision)},
        {"separatrix_recall", format_double(r.separatrix.recall)},
        {"separatrix_precision", format_double(r.separatrix.precision)},
        {"cr", format_double(r.ratio.cr)},
        {"ocr", format_double(r.ratio.ocr)},
        {"edit_ratio", format_double(r.ratio.edit_ratio)},
        {"max_abs_error", format_double(r.max_abs_error)},
        {"w2_sublevel_dim0", format_double(r.w2_sublevel)},
        {"w2_superlevel_dim0", format_double(r.w2_superlevel)},
        {"original_bytes", std::to_string(r.original_bytes)},
        {"compressed_bytes", std::to_string(r.compressed_bytes)},
        {"edit_bytes", std::to_string(r.edit_bytes)},
        {"n_edited", std::to_string(r.n_edited)},
        {"n_total", std::to_string(r.n_total)},
    };
}

}  // namespace

std::string to_key_value(const MetricsReport& r) {
    std::ostringstream os;
    for (const auto& [k, v] : report_fields(r)) os << k << " = " << v << '\n';
    return os.str();
}

std::string csv_header() {
    std::string out;
    for (const auto& [k, v] : report_fields(MetricsReport{})) {
        if (!out.empty()) out += ',';
        out += k;
    }
    return out;
}

std::string to_csv_row(const MetricsReport& r) {
    std::string out;
    bool first = true;
    for (const auto& [k, v] : report_fields(r)) {
        if (!first) out += ',';
        first = false;
        out += v;
    }
    return out;
}

}  // namespace dmtz
