#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "vtools/harness/metrics.hpp"

namespace vtools::harness {

// Static SVG of cumulative solution curves, one polyline per entry.
void write_curves_svg(std::ostream& out, const std::string& title, std::span<const LevelMetrics> metrics);

}  // namespace vtools::harness
