#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dmtz/discrete_morse.hpp"
#include "dmtz/metrics.hpp"

namespace dmtz {

enum class Tier : std::uint8_t {
    T1_Extrema = 1,
    T2_Critical = 2,
    T3_Connectivity = 3,
    T4_Separatrix = 4,
    T5_Persistence = 5,
};

const char* to_string(Tier t);
/// Accepts "T3", "t3" or "3".
std::optional<Tier> parse_tier(std::string_view s);

/// Largest quantized step count an edit stream can hold.
inline constexpr std::uint32_t kMaxStepCount = 65535;

struct EditorConfig {
    Tier tier = Tier::T4_Separatrix;
    int q_max = 6;
    /// Cap on apply_edit_step calls; 0 selects 4 * N * 2^q_max.
    std::int64_t max_steps = 0;
    /// Re-pair only around edited vertices instead of a full recompute.
    bool incremental = false;
    int threads = 1;
};

struct QuantizedEdit {
    std::int64_t index = 0;
    std::uint32_t count = 0;
    bool operator==(const QuantizedEdit&) const = default;
};

struct LosslessEdit {
    std::int64_t index = 0;
    double residual = 0;  // g = fhat + residual, residual <= 0
    bool operator==(const LosslessEdit& o) const {
        return index == o.index && std::bit_cast<std::uint64_t>(residual) == std::bit_cast<std::uint64_t>(o.residual);
    }
};

struct EditSet {
    double xi = 0;
    int q_max = 6;
    std::vector<QuantizedEdit> quantized;  // ascending index
    std::vector<LosslessEdit> lossless;    // ascending index, disjoint from quantized

    std::size_t size() const { return quantized.size() + lossless.size(); }
    bool empty() const { return size() == 0; }
    bool operator==(const EditSet& o) const {
        return std::bit_cast<std::uint64_t>(xi) == std::bit_cast<std::uint64_t>(o.xi) && q_max == o.q_max &&
               quantized == o.quantized && lossless == o.lossless;
    }
};

inline double quantized_step(double xi, int q_max) { return std::ldexp(xi, -q_max); }
/// The one expression both sides use for a quantized vertex.
inline double quantized_value(double fhat, std::uint32_t count, double step) {
    return fhat - static_cast<double>(count) * step;
}

/// Smallest value the editor may reach at a vertex: the least double
/// x >= fl(f - xi) with |f - x| <= xi in floating point, capped at fhat.
double lower_bound_value(double f, double fhat, double xi);

/// Residual r with fhat + r == lower_bound_value(f, fhat, xi) when such an r
/// exists; otherwise the r giving the smallest in-bound value. (fhat + r has
/// fhat's ulp, so a lower bound far below fhat's binade is not always exact.)
double lossless_residual(double f, double fhat, double xi);
/// fhat + lossless_residual: the value a clamped vertex takes.
double clamp_value(double f, double fhat, double xi);

enum class CaseKind : std::uint8_t { FPmin, FNmin, FP1saddle, FN1saddle, FP2saddle, FN2saddle, FPmax, FNmax };
const char* to_string(CaseKind k);

struct FalseCase {
    CaseKind kind = CaseKind::FPmin;
    CellId cell;
    std::optional<CellId> original_partner;
    std::optional<CellId> current_partner;
};

struct Troublemaker {
    CellId cell;
    std::optional<CellId> original_partner;
    std::optional<CellId> current_partner;
    std::size_t separatrix = 0;  // index into the original separatrix list
};

enum class StepResult : std::uint8_t { stepped, clamped };

struct EditorStats {
    std::int64_t c_passes = 0;
    std::int64_t s_passes = 0;
    std::int64_t alternations = 0;
    std::int64_t persistence_rounds = 0;
    std::int64_t steps = 0;
    std::int64_t clamps = 0;
    std::int64_t false_cases = 0;
    std::int64_t troublemakers = 0;
};

/// Compression-side editor. Values only ever decrease, and every vertex
/// stays within [lower_bound_value, fhat].
class Editor {
public:
    /// Throws Errc::bound_violation if |fhat - f| > xi anywhere.
    Editor(const ScalarField& f, const ScalarField& fhat, double xi, const EditorConfig& config = {});

    const CellComplex& complex() const { return complex_; }
    const EditorConfig& config() const { return config_; }
    double xi() const { return xi_; }
    double step_size() const { return step_; }
    const std::vector<double>& f() const { return f_; }
    const std::vector<double>& fhat() const { return fhat_; }
    const std::vector<double>& g() const { return g_; }
    /// Clamp value of v; quantized steps never go below it.
    double lower(std::int64_t v) const { return lower_[v]; }
    std::uint32_t count(std::int64_t v) const { return q_[v]; }
    bool is_lossless(std::int64_t v) const { return lossless_[v]; }
    const EditorStats& stats() const { return stats_; }

    const GradientField& original_gradient() const { return grad_f_; }
    const MorseSmaleComplex& original_msc() const { return msc_f_; }
    /// Gradient of g as of the last refresh().
    const GradientField& current_gradient() const { return grad_g_; }
    void refresh();

    /// One quantum down at v, or a clamp to the lower bound.
    StepResult apply_edit_step(std::int64_t v);
    void clamp(std::int64_t v);

    std::vector<FalseCase> classify_false_criticals() const;
    /// Returns the number of edit steps taken.
    std::int64_t fix_false_critical(const FalseCase& c);
    std::int64_t run_c_loop();

    std::optional<Troublemaker> find_troublemaker(std::size_t separatrix) const;
    std::int64_t fix_troublemaker(const Troublemaker& tm);
    /// Returns false when it stopped because false critical cells appeared.
    bool run_s_loop();

    /// T5 pre-pass: clamp every vertex of every critical cell of f.
    void clamp_original_critical_vertices();
    /// True when both 0-dim diagrams of g equal those of f with every
    /// coordinate moved to its vertex's clamp value.
    bool persistence_matches() const;

    /// Full pipeline for the configured tier.
    void run();
    EditSet edits() const;

private:
    bool g_less(std::int64_t a, std::int64_t b) const { return sos_less(g_, a, b); }
    bool f_less(std::int64_t a, std::int64_t b) const { return sos_less(f_, a, b); }
    void note_change(std::int64_t v);
    std::int64_t fix_cell(CellId a, bool strong, int depth);
    std::int64_t require_pair(CellId a, CellId b, bool strong);
    std::int64_t require_unpaired_up(CellId a);
    std::int64_t drive_below(std::int64_t x, std::int64_t w);
    std::int64_t ring_fallback(const std::vector<CellId>& cells);
    bool separatrix_matches(std::size_t index, const Separatrix& current) const;
    Separatrix trace_like(const Separatrix& original) const;
    std::int64_t refine_persistence();

    CellComplex complex_;
    EditorConfig config_;
    double xi_ = 0;
    double step_ = 0;
    std::int64_t max_steps_ = 0;
    std::vector<double> f_, fhat_, g_, lower_;
    std::vector<std::uint32_t> q_;
    std::vector<char> lossless_;
    std::vector<double> residual_;
    std::vector<std::int64_t> changed_;
    GradientField grad_f_, grad_g_;
    MorseSmaleComplex msc_f_;
    EditorStats stats_;
};

struct EditResult {
    EditSet edits;
    std::vector<double> g;
    EditorStats stats;
};

EditResult derive_edits(const ScalarField& f, const ScalarField& fhat, double xi, const EditorConfig& config = {});

/// Decompression side; bit-exact with the editor's final g.
ScalarField apply_edits(const ScalarField& fhat, const EditSet& edits);

/// Both 0-dim diagrams of g equal those of f with every coordinate moved to
/// lower[vertex] (vertex pairing identical, values exact).
bool persistence_shift_matches(std::span<const double> f, std::span<const double> g,
                               std::span<const double> lower, const CellComplex& complex);

/// Tier post-conditions of g against f, by recomputation. Returns an empty
/// string when all hold, otherwise the first failing item. fhat is only read
/// for T5, whose diagram target uses the clamp values.
std::string check_tier(std::span<const double> f, std::span<const double> fhat, std::span<const double> g, double xi,
                       const CellComplex& complex, Tier tier);

}  // namespace dmtz
