#pragma once

#include <span>
#include <string>

#include "dmtz/discrete_morse.hpp"

namespace dmtz {

/// JSON dump of a Morse-Smale complex for external viewers; schema in
/// docs/msc_schema.md.
std::string msc_to_json(const MorseSmaleComplex& msc, const CellComplex& complex, std::span<const double> values);

}  // namespace dmtz
