#pragma once

// Brute-force reference implementations used only by the tests. They work on
// explicit vertex tuples and exhaustive comparisons and share no code path
// with the library beyond the GridDims struct.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "dmtz/grid_complex.hpp"

namespace oracle {

using Tuple = std::vector<std::int64_t>;  // ascending vertex indices

struct BruteComplex {
    int top = 2;
    std::array<std::set<Tuple>, 4> cells;
    std::map<Tuple, std::vector<Tuple>> cofacets;
};

inline BruteComplex brute_complex(const dmtz::GridDims& d) {
    BruteComplex bc;
    bc.top = d.is_3d() ? 3 : 2;
    const int axes = bc.top;
    std::vector<int> perm(axes);
    std::iota(perm.begin(), perm.end(), 0);
    auto vid = [&](std::int64_t x, std::int64_t y, std::int64_t z) { return x + d.nx * (y + d.ny * z); };
    const std::int64_t zmax = d.is_3d() ? d.nz - 1 : 1;
    for (std::int64_t z = 0; z < zmax; ++z)
        for (std::int64_t y = 0; y + 1 < d.ny; ++y)
            for (std::int64_t x = 0; x + 1 < d.nx; ++x) {
                std::sort(perm.begin(), perm.end());
                do {
                    std::array<std::int64_t, 3> p{x, y, z};
                    Tuple top{vid(p[0], p[1], p[2])};
                    for (int a : perm) {
                        p[a] += 1;
                        top.push_back(vid(p[0], p[1], p[2]));
                    }
                    const int n = static_cast<int>(top.size());
                    for (int mask = 1; mask < (1 << n); ++mask) {
                        Tuple face;
                        for (int k = 0; k < n; ++k)
                            if (mask & (1 << k)) face.push_back(top[k]);
                        std::sort(face.begin(), face.end());
                        bc.cells[face.size() - 1].insert(face);
                    }
                } while (std::next_permutation(perm.begin(), perm.end()));
            }
    for (int dim = 0; dim < bc.top; ++dim)
        for (const auto& hi : bc.cells[dim + 1])
            for (std::size_t k = 0; k < hi.size(); ++k) {
                Tuple lo = hi;
                lo.erase(lo.begin() + static_cast<long>(k));
                bc.cofacets[lo].push_back(hi);
            }
    return bc;
}

using Key = std::vector<std::pair<double, std::int64_t>>;

inline Key key_of(const std::vector<double>& f, const Tuple& t) {
    Key k;
    for (auto v : t) k.push_back({f[v], v});
    std::sort(k.begin(), k.end(), [](auto a, auto b) { return a > b; });
    return k;
}

// Brute-force pairing: G0(b) is found by comparing the keys of every facet of
// b; P_a = { b : G0(b) = a }; a pairs with the key-minimal member of P_a.
struct BrutePair {
    int state = 0;  // 0 critical, 1 up, 2 down
    Tuple partner;
};

inline std::map<Tuple, BrutePair> brute_gradient(const std::vector<double>& f, const BruteComplex& bc) {
    std::map<Tuple, BrutePair> g;
    for (int dim = 0; dim <= bc.top; ++dim)
        for (const auto& a : bc.cells[dim]) g[a];
    auto top_facet = [&](const Tuple& b) {
        Tuple best;
        Key best_key;
        for (std::size_t k = 0; k < b.size(); ++k) {
            Tuple face = b;
            face.erase(face.begin() + static_cast<long>(k));
            Key fk = key_of(f, face);
            if (best.empty() || best_key < fk) {
                best = face;
                best_key = fk;
            }
        }
        return best;
    };
    for (int dim = 0; dim < bc.top; ++dim) {
        for (const auto& a : bc.cells[dim]) {
            if (g[a].state == 2) continue;
            auto it = bc.cofacets.find(a);
            if (it == bc.cofacets.end()) continue;
            std::optional<Tuple> best;
            for (const auto& b : it->second) {
                if (top_facet(b) != a) continue;
                if (!best || key_of(f, b) < key_of(f, *best)) best = b;
            }
            if (best) {
                g[a] = {1, *best};
                g[*best] = {2, a};
            }
        }
    }
    return g;
}

// Sublevel 0-dimensional persistence by sweeping every threshold and
// recomputing connected components with BFS. Pairs are (birth, death) values
// plus the vertex ids; the essential class is returned separately.
struct SweepDiagram {
    std::vector<std::pair<double, double>> pairs;
    double essential = 0;
};

inline SweepDiagram sweep_persistence(const std::vector<double>& f, const dmtz::GridDims& d, bool superlevel) {
    const BruteComplex bc = brute_complex(d);
    const std::int64_t n = d.vertex_count();
    std::vector<std::vector<std::int64_t>> adj(n);
    for (const auto& e : bc.cells[1]) {
        adj[e[0]].push_back(e[1]);
        adj[e[1]].push_back(e[0]);
    }
    auto below = [&](std::int64_t a, std::int64_t b) {
        // a before b in the sweep
        const double fa = superlevel ? -f[a] : f[a];
        const double fb = superlevel ? -f[b] : f[b];
        if (fa != fb) return fa < fb;
        return superlevel ? a > b : a < b;
    };
    std::vector<std::int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), below);
    SweepDiagram out;
    std::vector<char> in(n, 0);
    for (std::int64_t step = 0; step < n; ++step) {
        const std::int64_t v = order[step];
        // Components of the set before v, found by BFS; each keyed by its
        // earliest vertex (the birth).
        std::vector<std::int64_t> root(n, -1);
        for (std::int64_t s = 0; s < step; ++s) {
            const std::int64_t src = order[s];
            if (root[src] >= 0) continue;
            std::vector<std::int64_t> stack{src};
            root[src] = src;
            while (!stack.empty()) {
                auto u = stack.back();
                stack.pop_back();
                for (auto w : adj[u])
                    if (in[w] && root[w] < 0) {
                        root[w] = src;
                        stack.push_back(w);
                    }
            }
        }
        std::set<std::int64_t> touching;
        for (auto w : adj[v])
            if (in[w]) touching.insert(root[w]);
        in[v] = 1;
        if (touching.size() >= 2) {
            // Roots are the sweep-earliest vertex of each component, so the
            // elder is the one earliest in `order`.
            std::int64_t elder = *touching.begin();
            for (auto r : touching)
                if (below(r, elder)) elder = r;
            for (auto r : touching)
                if (r != elder) out.pairs.push_back({f[r], f[v]});
        }
    }
    out.essential = f[order.front()];
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

inline std::vector<double> random_field(std::uint64_t seed, const dmtz::GridDims& d, int levels = 0) {
    std::mt19937_64 rng(seed);
    std::vector<double> f(static_cast<std::size_t>(d.vertex_count()));
    for (auto& v : f) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = levels > 0 ? std::floor(u * levels) : u;
    }
    return f;
}

}  // namespace oracle
