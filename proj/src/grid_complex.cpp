#include "dmtz/grid_complex.hpp"

#include <algorithm>
#include <string>

#include "dmtz/error.hpp"

namespace dmtz {

namespace {

Coord mask_coord(std::uint8_t mask) { return {mask & 1, (mask >> 1) & 1, (mask >> 2) & 1}; }

Coord add(const Coord& a, const Coord& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Coord sub(const Coord& a, const Coord& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
bool same(const Coord& a, const Coord& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

// All chains 0 = s0 < s1 < ... < s_dim with every s_k a subset of `full`.
void enumerate_chains(std::uint8_t full, int dim, std::array<std::uint8_t, 4>& chain, int depth,
                      std::vector<std::array<std::uint8_t, 4>>& out) {
    if (depth == dim) {
        out.push_back(chain);
        return;
    }
    const std::uint8_t last = chain[depth];
    for (int next = 1; next <= full; ++next) {
        const auto m = static_cast<std::uint8_t>(next);
        if ((m & ~full) != 0 || (m & last) != last || m == last) continue;
        chain[depth + 1] = m;
        enumerate_chains(full, dim, chain, depth + 1, out);
    }
}

}  // namespace

void validate_dims(const GridDims& dims) {
    if (dims.nx < 2 || dims.ny < 2 || dims.nz < 1) {
        fail(Errc::invalid_argument, "grid dimensions too small: need nx >= 2, ny >= 2, nz >= 1 (got " +
                                         std::to_string(dims.nx) + "x" + std::to_string(dims.ny) + "x" +
                                         std::to_string(dims.nz) + ")");
    }
}

void check_header_dims(const GridDims& dims, const char* what) {
    constexpr std::int64_t kMaxAxis = std::int64_t{1} << 30;
    if (dims.nx > kMaxAxis || dims.ny > kMaxAxis || dims.nz > kMaxAxis ||
        dims.nx * dims.ny > (std::int64_t{1} << 40) / std::max<std::int64_t>(dims.nz, 1))
        fail(Errc::format, std::string(what) + ": grid too large");
    try {
        validate_dims(dims);
    } catch (const Error& e) {
        fail(Errc::format, std::string(what) + ": " + e.what());
    }
}

CellComplex CellComplex::build(const GridDims& dims) {
    validate_dims(dims);
    CellComplex cx;
    cx.dims_ = dims;
    const int top = dims.top_dim();
    const std::uint8_t full = dims.is_3d() ? 7 : 3;

    for (int d = 0; d <= top; ++d) {
        std::vector<std::array<std::uint8_t, 4>> chains;
        std::array<std::uint8_t, 4> chain{};
        enumerate_chains(full, d, chain, 0, chains);
        std::int64_t start = 0;
        for (const auto& c : chains) {
            SimplexType t;
            t.dim = d;
            t.chain = c;
            t.extent = mask_coord(c[d]);
            t.base_dims = {dims.nx - t.extent.x, dims.ny - t.extent.y, dims.nz - t.extent.z};
            t.start = start;
            for (int k = 0; k <= d; ++k) {
                const Coord s = mask_coord(c[k]);
                t.vertex_shifts.push_back(s);
                t.vertex_offsets[k] = s.x + dims.nx * (s.y + dims.ny * s.z);
            }
            start += t.base_dims.x * t.base_dims.y * t.base_dims.z;
            cx.types_by_dim_[d].push_back(static_cast<int>(cx.types_.size()));
            cx.types_.push_back(std::move(t));
        }
        cx.counts_[d] = start;
    }

    // Facet templates follow directly from the chain structure: dropping s0
    // moves the base to p + s1; dropping any other s_k keeps the base.
    for (auto& t : cx.types_) {
        if (t.dim == 0) continue;
        for (int k = 0; k <= t.dim; ++k) {
            std::array<std::uint8_t, 4> fc{};
            Coord delta;
            if (k == 0) {
                const std::uint8_t s1 = t.chain[1];
                delta = mask_coord(s1);
                for (int j = 1; j <= t.dim; ++j) fc[j - 1] = static_cast<std::uint8_t>(t.chain[j] & ~s1);
            } else {
                int w = 0;
                for (int j = 0; j <= t.dim; ++j)
                    if (j != k) fc[w++] = t.chain[j];
            }
            t.facets.push_back({delta, cx.find_type(t.dim - 1, fc)});
        }
    }

    // Cofacet templates by exhaustive containment over neighbouring bases.
    const int zr = dims.is_3d() ? 1 : 0;
    for (std::size_t ti = 0; ti < cx.types_.size(); ++ti) {
        auto& t = cx.types_[ti];
        if (t.dim == top) continue;
        for (int ui : cx.types_by_dim_[t.dim + 1]) {
            const auto& u = cx.types_[ui];
            for (int dz = -zr; dz <= zr; ++dz)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const Coord delta{dx, dy, dz};
                        bool contained = true;
                        for (const auto& tv : t.vertex_shifts) {
                            bool hit = false;
                            for (const auto& uv : u.vertex_shifts) hit = hit || same(tv, add(delta, uv));
                            if (!hit) {
                                contained = false;
                                break;
                            }
                        }
                        if (contained) t.cofacets.push_back({delta, ui});
                    }
        }
    }
    return cx;
}

std::int64_t CellComplex::total_cells() const {
    std::int64_t n = 0;
    for (int d = 0; d <= top_dim(); ++d) n += counts_[d];
    return n;
}

int CellComplex::find_type(int dim, const std::array<std::uint8_t, 4>& chain) const {
    for (int ti : types_by_dim_[dim]) {
        const auto& t = types_[ti];
        if (std::equal(chain.begin(), chain.begin() + dim + 1, t.chain.begin())) return ti;
    }
    fail(Errc::internal, "simplex chain not in type table");
}

std::int64_t CellComplex::index_of(int type, const Coord& b) const {
    const auto& t = types_[type];
    return t.start + b.x + t.base_dims.x * (b.y + t.base_dims.y * b.z);
}

std::optional<std::int64_t> CellComplex::checked_index(int type, const Coord& b) const {
    const auto& t = types_[type];
    if (b.x < 0 || b.y < 0 || b.z < 0 || b.x >= t.base_dims.x || b.y >= t.base_dims.y || b.z >= t.base_dims.z)
        return std::nullopt;
    return index_of(type, b);
}

std::pair<int, Coord> CellComplex::decode(CellId cell) const {
    const auto& ids = types_by_dim_[cell.dim];
    int type = ids.front();
    for (int ti : ids) {
        if (types_[ti].start <= cell.index)
            type = ti;
        else
            break;
    }
    const auto& t = types_[type];
    std::int64_t local = cell.index - t.start;
    Coord b;
    b.x = local % t.base_dims.x;
    local /= t.base_dims.x;
    b.y = local % t.base_dims.y;
    b.z = local / t.base_dims.y;
    return {type, b};
}

CellList CellComplex::facets(CellId cell) const {
    CellList out;
    if (cell.dim == 0) return out;
    const auto [type, base] = decode(cell);
    for (const auto& f : types_[type].facets)
        out.push_back({static_cast<std::int8_t>(cell.dim - 1), index_of(f.type, add(base, f.delta))});
    return out;
}

CellList CellComplex::cofacets(CellId cell) const {
    CellList out;
    if (cell.dim >= top_dim()) return out;
    const auto [type, base] = decode(cell);
    for (const auto& c : types_[type].cofacets) {
        if (auto idx = checked_index(c.type, add(base, c.delta)))
            out.push_back({static_cast<std::int8_t>(cell.dim + 1), *idx});
    }
    return out;
}

VertexTuple CellComplex::cell_vertices(CellId cell) const {
    VertexTuple out;
    if (cell.dim == 0) {
        out.push_back(cell.index);
        return out;
    }
    const auto [type, base] = decode(cell);
    const std::int64_t v0 = vertex_index(base);
    const auto& t = types_[type];
    for (int k = 0; k <= t.dim; ++k) out.push_back(v0 + t.vertex_offsets[k]);
    return out;
}

std::vector<CellId> CellComplex::star(std::int64_t v, int dim) const {
    std::vector<CellId> out;
    const Coord c = vertex_coord(v);
    for (int ti : types_by_dim_[dim]) {
        for (const auto& shift : types_[ti].vertex_shifts) {
            if (auto idx = checked_index(ti, sub(c, shift))) out.push_back({static_cast<std::int8_t>(dim), *idx});
        }
    }
    return out;
}

StaticList<std::int64_t, kMaxIncident> CellComplex::neighbors(std::int64_t v) const {
    StaticList<std::int64_t, kMaxIncident> out;
    for (const CellId e : cofacets({0, v})) {
        const auto ev = cell_vertices(e);
        out.push_back(ev[0] == v ? ev[1] : ev[0]);
    }
    return out;
}

Coord CellComplex::vertex_coord(std::int64_t v) const {
    Coord c;
    c.x = v % dims_.nx;
    v /= dims_.nx;
    c.y = v % dims_.ny;
    c.z = v / dims_.ny;
    return c;
}

std::optional<CellId> CellComplex::find_cell(const std::vector<std::int64_t>& vertices) const {
    if (vertices.empty() || vertices.size() > static_cast<std::size_t>(top_dim()) + 1) return std::nullopt;
    std::vector<std::int64_t> vs = vertices;
    std::sort(vs.begin(), vs.end());
    for (auto v : vs)
        if (v < 0 || v >= dims_.vertex_count()) return std::nullopt;
    const int dim = static_cast<int>(vs.size()) - 1;
    const Coord base = vertex_coord(vs[0]);
    std::array<std::uint8_t, 4> chain{};
    for (int k = 0; k <= dim; ++k) {
        const Coord s = sub(vertex_coord(vs[k]), base);
        if (s.x < 0 || s.x > 1 || s.y < 0 || s.y > 1 || s.z < 0 || s.z > 1) return std::nullopt;
        chain[k] = static_cast<std::uint8_t>(s.x | (s.y << 1) | (s.z << 2));
        if (k > 0 && ((chain[k] & chain[k - 1]) != chain[k - 1] || chain[k] == chain[k - 1])) return std::nullopt;
    }
    for (int ti : types_by_dim_[dim]) {
        if (std::equal(chain.begin(), chain.begin() + dim + 1, types_[ti].chain.begin())) {
            if (auto idx = checked_index(ti, base)) return CellId{static_cast<std::int8_t>(dim), *idx};
        }
    }
    return std::nullopt;
}

}  // namespace dmtz
