#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

namespace dmtz {

struct GridDims {
    std::int64_t nx = 0;
    std::int64_t ny = 0;
    std::int64_t nz = 1;

    std::int64_t vertex_count() const { return nx * ny * nz; }
    bool is_3d() const { return nz > 1; }
    int top_dim() const { return is_3d() ? 3 : 2; }
    bool operator==(const GridDims&) const = default;
};

// Throws Errc::invalid_argument for dims too small for a 2D/3D grid.
void validate_dims(const GridDims& dims);
/// validate_dims for dims read from a file: also caps the vertex count and
/// reports failures as Errc::format prefixed with `what`.
void check_header_dims(const GridDims& dims, const char* what);

struct CellId {
    std::int8_t dim = 0;
    std::int64_t index = 0;

    auto operator<=>(const CellId&) const = default;
};

// Fixed-capacity list; the largest star in a 3D Kuhn grid is the 14 edges
// around a vertex.
template <typename T, std::size_t N>
class StaticList {
public:
    void push_back(const T& value) { items_[size_++] = value; }
    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }
    const T& operator[](std::size_t i) const { return items_[i]; }
    T& operator[](std::size_t i) { return items_[i]; }
    const T* begin() const { return items_.data(); }
    const T* end() const { return items_.data() + size_; }
    T* begin() { return items_.data(); }
    T* end() { return items_.data() + size_; }

private:
    std::array<T, N> items_{};
    std::size_t size_ = 0;
};

inline constexpr std::size_t kMaxIncident = 14;
using CellList = StaticList<CellId, kMaxIncident>;
using VertexTuple = StaticList<std::int64_t, 4>;

struct Coord {
    std::int64_t x = 0, y = 0, z = 0;
};

/// Freudenthal (Kuhn) triangulation of a regular grid.
///
/// Every simplex is a chain of axis subsets 0 = s0 < s1 < ... < sd inside a
/// unit cube anchored at a base vertex p; its vertices are p + s_k.  A
/// "type" is one such chain.  Cells of one type are indexed densely over
/// the base positions that keep the simplex inside the grid, so a CellId is
/// an arithmetic function of (type, x, y, z) and back.
class CellComplex {
public:
    static CellComplex build(const GridDims& dims);

    const GridDims& dims() const { return dims_; }
    int top_dim() const { return dims_.top_dim(); }
    std::int64_t cell_count(int dim) const { return counts_[dim]; }
    std::int64_t total_cells() const;

    /// Facets in removed-vertex order: facet k omits the k-th vertex of
    /// cell_vertices(cell).
    CellList facets(CellId cell) const;
    CellList cofacets(CellId cell) const;
    /// Ascending vertex indices; also the SoS-agnostic identity of the cell.
    VertexTuple cell_vertices(CellId cell) const;

    /// Every cell of dimension `dim` containing vertex v.
    std::vector<CellId> star(std::int64_t v, int dim) const;
    /// Vertices sharing an edge with v.
    StaticList<std::int64_t, kMaxIncident> neighbors(std::int64_t v) const;

    Coord vertex_coord(std::int64_t v) const;
    std::int64_t vertex_index(const Coord& c) const { return c.x + dims_.nx * (c.y + dims_.ny * c.z); }

    /// The cell with exactly these vertices, if any (vertices in any order).
    std::optional<CellId> find_cell(const std::vector<std::int64_t>& vertices) const;

private:
    struct Template {
        Coord delta;
        int type = 0;
    };
    struct SimplexType {
        int dim = 0;
        std::array<std::uint8_t, 4> chain{};
        Coord extent;
        Coord base_dims;
        std::int64_t start = 0;
        std::array<std::int64_t, 4> vertex_offsets{};
        std::vector<Template> facets;
        std::vector<Template> cofacets;
        std::vector<Coord> vertex_shifts;  // coordinates of each vertex relative to base
    };

    std::int64_t index_of(int type, const Coord& base) const;
    std::optional<std::int64_t> checked_index(int type, const Coord& base) const;
    std::pair<int, Coord> decode(CellId cell) const;
    int find_type(int dim, const std::array<std::uint8_t, 4>& chain) const;

    GridDims dims_;
    std::vector<SimplexType> types_;
    std::array<std::vector<int>, 4> types_by_dim_;
    std::array<std::int64_t, 4> counts_{};
};

}  // namespace dmtz
