#pragma once

#include <ostream>
#include <vector>

#include "contactflow/legendre.hpp"

namespace contactflow {

// Minimal plot: one <polyline> per input, axes-free, auto-fitted viewBox.
// Intended for visual regression, not presentation.
void write_svg(std::ostream& os, const std::vector<Polyline2D>& polylines,
               double width = 800.0, double height = 600.0);

}  // namespace contactflow
