#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dmtz/grid_complex.hpp"

namespace dmtz {

struct ScalarField {
    GridDims dims;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
};

// Throws Errc::invalid_argument on size mismatch or non-finite values.
void validate_field(const ScalarField& field);

/// Simulation of simplicity: (value, index) compared lexicographically.
inline bool sos_less(std::span<const double> values, std::int64_t i, std::int64_t j) {
    const double a = values[static_cast<std::size_t>(i)];
    const double b = values[static_cast<std::size_t>(j)];
    return a < b || (a == b && i < j);
}

/// Vertices of a cell in strictly decreasing SoS order. Comparing two keys
/// lexicographically is the order of the recursive extension
/// F(a) = F(G0(a)) + eps^d F(G1(a)) with eps symbolic.
using ExtendedCellKey = StaticList<std::pair<double, std::int64_t>, 4>;

ExtendedCellKey extended_key(std::span<const double> values, const CellComplex& complex, CellId cell);
bool key_less(const ExtendedCellKey& a, const ExtendedCellKey& b);
bool extended_less(std::span<const double> values, const CellComplex& complex, CellId a, CellId b);

/// The SoS-lowest vertex of a cell.
std::int64_t lowest_vertex(std::span<const double> values, const VertexTuple& vertices);
/// The vertex of `cofacet` that is not a vertex of `cell`.
std::int64_t extra_vertex(const CellComplex& complex, CellId cell, CellId cofacet);

/// P_a: cofacets whose extended-maximal facet is `a`.
CellList steepest_candidates(std::span<const double> values, const CellComplex& complex, CellId a);

enum class PairState : std::uint8_t { critical, up, down };

struct Pairing {
    PairState state = PairState::critical;
    std::int64_t partner = -1;  // index in dim+1 (up) or dim-1 (down)

    bool operator==(const Pairing&) const = default;
};

class GradientField {
public:
    GradientField() = default;
    explicit GradientField(const CellComplex& complex);

    int top_dim() const { return top_; }
    const Pairing& at(CellId c) const { return cells_[c.dim][static_cast<std::size_t>(c.index)]; }
    Pairing& at(CellId c) { return cells_[c.dim][static_cast<std::size_t>(c.index)]; }
    std::int64_t count(int dim) const { return static_cast<std::int64_t>(cells_[dim].size()); }

    bool is_critical(CellId c) const { return at(c).state == PairState::critical; }
    std::optional<CellId> partner(CellId c) const;

    bool operator==(const GradientField&) const = default;

private:
    int top_ = 0;
    std::vector<std::vector<Pairing>> cells_;
};

/// Dimension-ascending pairing: a cell claimed by its top facet is paired
/// down; otherwise it pairs up with the minimal member of its P-set, or
/// stays critical.
GradientField compute_gradient(std::span<const double> values, const CellComplex& complex, int threads = 1);

/// Re-pairs only the cells whose pairing can depend on `changed` vertices
/// (cells touching the closed 1-ring of a changed vertex). Produces the same
/// field as a full recompute.
void update_gradient(GradientField& gradient, std::span<const double> values, const CellComplex& complex,
                     std::span<const std::int64_t> changed);

struct CriticalSet {
    int top_dim = 2;
    std::vector<CellId> minima;
    std::vector<CellId> one_saddles;
    std::vector<CellId> two_saddles;
    std::vector<CellId> maxima;

    std::vector<CellId> all() const;
    std::int64_t euler_sum() const;
    bool operator==(const CriticalSet&) const = default;
};

CriticalSet extract_critical(const GradientField& gradient);

enum class SeparatrixKind : std::uint8_t { descending, ascending, connector };

const char* to_string(SeparatrixKind kind);

struct Separatrix {
    SeparatrixKind kind = SeparatrixKind::descending;
    CellId origin;
    /// Descending/ascending: one cell sequence per branch, each starting at
    /// the origin. Connector: a single breadth-first visit sequence.
    std::vector<std::vector<CellId>> branches;
    /// Critical cells reached, sorted (a multiset for descending/ascending).
    std::vector<CellId> reached;
    /// Ascending branches that leave the domain through a boundary cell.
    int boundary_exits = 0;

    bool operator==(const Separatrix&) const = default;
};

Separatrix trace_descending(const GradientField& gradient, const CellComplex& complex, CellId saddle);
Separatrix trace_ascending(const GradientField& gradient, const CellComplex& complex, CellId saddle);
Separatrix trace_connectors(const GradientField& gradient, const CellComplex& complex, CellId two_saddle);

struct MorseSmaleComplex {
    CriticalSet critical;
    std::vector<Separatrix> separatrices;
};

/// All separatrices of a gradient: descending from every 1-saddle, ascending
/// from every (top-1)-saddle, connectors from every 2-saddle in 3D.
std::vector<Separatrix> trace_all(const GradientField& gradient, const CellComplex& complex);

MorseSmaleComplex compute_msc(std::span<const double> values, const CellComplex& complex, int threads = 1);

}  // namespace dmtz
