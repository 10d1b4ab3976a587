#pragma once

#include <string>

namespace contactflow {

// Doubles in output are printed with 17 significant digits so runs are
// byte-reproducible and values round-trip.
std::string fmt17(double v);

// Shorter form used for SVG coordinates.
std::string fmt9(double v);

}  // namespace contactflow
