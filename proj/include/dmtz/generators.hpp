#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "dmtz/discrete_morse.hpp"

namespace dmtz {

enum class Family : std::uint8_t { ramp, gaussian, noise };

const char* to_string(Family f);
std::optional<Family> parse_family(std::string_view s);

struct GenConfig {
    Family family = Family::gaussian;
    GridDims dims{32, 32, 1};
    std::uint64_t seed = 1;
    int peaks = 4;         // gaussian only
    double jitter = 0.0;   // amplitude of added white noise
};

/// ramp:     sum of positive per-axis slopes times the coordinate; its only
///           critical cell is the minimum at the origin.
/// gaussian: `peaks` unit-width bumps on distinct vertices at least 3 cells
///           apart (Chebyshev), amplitudes in [0.5, 1].
/// noise:    sum of 8 plane waves with wavelengths of 4 to 16 cells.
/// Uniform draws use mt19937_64 as (rng() >> 11) * 2^-53, so output is the
/// same on every platform.
ScalarField generate(const GenConfig& config);

}  // namespace dmtz
