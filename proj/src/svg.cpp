#include "contactflow/svg.hpp"

#include <algorithm>
#include <cmath>

#include "contactflow/csv.hpp"
#include "contactflow/errors.hpp"

namespace contactflow {

void write_svg(std::ostream& os, const std::vector<Polyline2D>& polylines, double width,
               double height) {
    if (!(width > 0.0) || !(height > 0.0)) throw DomainError("svg size must be positive");

    double lo_u = 0.0, hi_u = 1.0, lo_v = 0.0, hi_v = 1.0;
    bool seen = false;
    for (const auto& line : polylines) {
        for (const auto& pt : line.points) {
            if (!std::isfinite(pt[0]) || !std::isfinite(pt[1]))
                throw DomainError("svg input contains non-finite coordinates");
            if (!seen) {
                lo_u = hi_u = pt[0];
                lo_v = hi_v = pt[1];
                seen = true;
            } else {
                lo_u = std::min(lo_u, pt[0]);
                hi_u = std::max(hi_u, pt[0]);
                lo_v = std::min(lo_v, pt[1]);
                hi_v = std::max(hi_v, pt[1]);
            }
        }
    }
    if (hi_u - lo_u < 1e-12) hi_u = lo_u + 1.0;
    if (hi_v - lo_v < 1e-12) hi_v = lo_v + 1.0;

    const double margin = 0.05;
    const double su = width * (1.0 - 2.0 * margin) / (hi_u - lo_u);
    const double sv = height * (1.0 - 2.0 * margin) / (hi_v - lo_v);
    const double x0 = width * margin, y0 = height * margin;
    auto map_u = [&](double u) { return x0 + (u - lo_u) * su; };
    auto map_v = [&](double v) { return y0 + (hi_v - v) * sv; };  // flip: v grows upward

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    constexpr int n_colors = 6;

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt9(width) << "\" height=\""
       << fmt9(height) << "\" viewBox=\"0 0 " << fmt9(width) << " " << fmt9(height) << "\">\n";
    int idx = 0;
    for (const auto& line : polylines) {
        os << "  <polyline fill=\"none\" stroke=\"" << palette[idx % n_colors]
           << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& pt : line.points) {
            if (!first) os << " ";
            os << fmt9(map_u(pt[0])) << "," << fmt9(map_v(pt[1]));
            first = false;
        }
        os << "\"/>\n";
        ++idx;
    }
    os << "</svg>\n";
}

}  // namespace contactflow
