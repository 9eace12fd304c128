#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dmtz/discrete_morse.hpp"

namespace dmtz {

struct Prf {
    double recall = 1.0;
    double precision = 1.0;
    bool operator==(const Prf&) const = default;
};

/// Match = same cell and same type. Empty denominators count as 1.0.
Prf critical_prf(const CriticalSet& original, const CriticalSet& reconstructed);
/// One branch (origin saddle, kind, exact cell sequence) is the matching unit.
Prf separatrix_prf(const MorseSmaleComplex& original, const MorseSmaleComplex& reconstructed);

struct Ratios {
    double cr = 0;
    double ocr = 0;
    double edit_ratio = 0;
};

Ratios ratios(std::uint64_t original_bytes, std::uint64_t compressed_bytes, std::uint64_t edit_bytes,
              std::uint64_t n_edited, std::uint64_t n_total);

enum class Filtration : std::uint8_t { sublevel, superlevel };

struct PersistencePair {
    double birth = 0;
    double death = 0;
    std::int64_t birth_vertex = -1;
    std::int64_t death_vertex = -1;
};

/// 0-dimensional diagram of the vertex graph. Pairs with birth == death (value
/// ties) are kept. The essential class is the sweep's first vertex.
struct PersistenceDiagram {
    std::vector<PersistencePair> pairs;
    double essential = 0;
    std::int64_t essential_vertex = -1;

    /// (birth, death) values, sorted.
    std::vector<std::pair<double, double>> points() const;
};

PersistenceDiagram persistence_0d(std::span<const double> values, const CellComplex& complex, Filtration direction);

/// Exact L2-Wasserstein distance between finite diagrams (essential classes
/// excluded); diagonal cost of (b, d) is (d - b)^2 / 2.
double wasserstein2(std::span<const std::pair<double, double>> a, std::span<const std::pair<double, double>> b);

double max_abs_error(std::span<const double> f, std::span<const double> g);

struct MetricsReport {
    Prf critical;
    Prf separatrix;
    Ratios ratio;
    double max_abs_error = 0;
    double w2_sublevel = 0;
    double w2_superlevel = 0;
    std::uint64_t original_bytes = 0;
    std::uint64_t compressed_bytes = 0;
    std::uint64_t edit_bytes = 0;
    std::uint64_t n_edited = 0;
    std::uint64_t n_total = 0;
};

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// `key = value` lines. W2 is labelled as 0-dimensional.
std::string to_key_value(const MetricsReport& r);
std::string csv_header();
std::string to_csv_row(const MetricsReport& r);

}  // namespace dmtz
