#include "contactflow/legendre.hpp"

#include <algorithm>
#include <cmath>

namespace contactflow {

namespace {

void validate_grid(const std::vector<double>& y_grid) {
    if (y_grid.empty()) throw DomainError("y grid is empty");
    double prev = -1.0;
    bool first = true;
    for (double y : y_grid) {
        if (!(std::fabs(y) < 1.0)) throw DomainError("y grid values need |y| < 1");
        if (!first && !(y > prev)) throw DomainError("y grid must be strictly increasing");
        prev = y;
        first = false;
    }
}

std::array<double, 2> drop_coordinate(const LegendrePoint& pt, ProjectionPlane plane) {
    switch (plane) {
        case ProjectionPlane::XZ: return {pt.x, pt.z};
        case ProjectionPlane::XY: return {pt.x, pt.y};
        case ProjectionPlane::YZ: return {pt.y, pt.z};
    }
    return {0.0, 0.0};
}

}  // namespace

std::vector<double> default_y_grid(int n, double span) {
    if (n < 2) throw DomainError("grid needs at least 2 points");
    if (!(span > 0.0 && span < 1.0)) throw DomainError("grid span must lie in (0, 1)");
    std::vector<double> ys(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        ys[static_cast<std::size_t>(i)] = -span + 2.0 * span * static_cast<double>(i) /
                                                      static_cast<double>(n - 1);
    return ys;
}

LegendreCurve sample_curve(const ModelParams& p, const std::vector<double>& y_grid,
                           SignConvention convention) {
    validate_grid(y_grid);
    LegendreCurve curve;
    curve.params = p;
    curve.convention = convention;
    curve.samples.reserve(y_grid.size());
    for (double y : y_grid) {
        const double x = x_of_y(p, y);
        curve.samples.push_back({x, y, pseudo_free_energy(p, x, y)});
    }
    return curve;
}

TangentVector tangent_vector(const ModelParams& p, double y) {
    const double dx = dx_dy(p, y);
    const double x = x_of_y(p, y);
    // dz/dy along the curve; dpsi_dy vanishes on it, kept for honesty.
    const double dz = dpsi_dx(p, x, y) * dx + dpsi_dy(p, x, y);
    return {dx, 1.0, dz};
}

double contact_residual(const ModelParams& p, double y) {
    const TangentVector t = tangent_vector(p, y);
    return t.dz + y * t.dx;
}

double max_discrete_residual(const LegendreCurve& curve) {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < curve.samples.size(); ++i) {
        const auto& a = curve.samples[i];
        const auto& b = curve.samples[i + 1];
        const double ybar = 0.5 * (a.y + b.y);
        const double r = std::fabs((b.z - a.z) + ybar * (b.x - a.x)) / std::fabs(b.y - a.y);
        worst = std::max(worst, r);
    }
    return worst;
}

BranchIntervals intervals(const ModelParams& p) {
    const auto sp = spinodal_points(p);
    if (!sp) throw PhaseError("branch intervals exist only in the low-temperature phase");
    const double x_sp = x_of_y(p, sp->y_minus);
    return {{-x_sp, 0.0}, {0.0, x_sp}, x_sp};
}

std::vector<Branch> split_branches(const LegendreCurve& curve) {
    const ModelParams& p = curve.params;
    const auto sp = spinodal_points(p);
    if (!sp) {
        Branch b;
        b.mu = 1;
        b.side = IntervalSide::FullLine;
        b.role = Stability::MostStable;
        b.points = curve.samples;
        std::sort(b.points.begin(), b.points.end(),
                  [](const LegendrePoint& l, const LegendrePoint& r) { return l.x < r.x; });
        return {b};
    }

    const BranchIntervals iv = intervals(p);

    // Three y-segments: 0 below y_minus, 1 between, 2 above y_plus.
    auto segment_of = [&](double y) {
        if (y < sp->y_minus) return 0;
        if (y > sp->y_plus) return 2;
        return 1;
    };

    // Rank of each segment by z at any interior x: on I+ the positive outer
    // root is lowest, on I- the negative outer root is.  Read the order off
    // the solver at the interval midpoint.
    auto ranks_for = [&](const Interval& where) {
        const double probe = 0.5 * (where.lo + where.hi);
        const auto roots = solve_branches(p, probe);
        std::array<int, 3> mu_of_segment{0, 0, 0};
        for (const auto& r : roots) mu_of_segment[static_cast<std::size_t>(segment_of(r.y))] = r.mu;
        return mu_of_segment;
    };

    std::vector<Branch> out;
    const std::array<IntervalSide, 2> sides{IntervalSide::IMinus, IntervalSide::IPlus};
    for (IntervalSide side : sides) {
        const Interval& where = (side == IntervalSide::IMinus) ? iv.i_minus : iv.i_plus;
        const auto mu_of_segment = ranks_for(where);
        for (int seg = 0; seg < 3; ++seg) {
            Branch b;
            b.side = side;
            b.mu = mu_of_segment[static_cast<std::size_t>(seg)];
            b.role = (b.mu == 1)   ? Stability::MostStable
                     : (b.mu == 2) ? Stability::Metastable
                                   : Stability::Unstable;
            for (const auto& pt : curve.samples)
                if (segment_of(pt.y) == seg && where.contains(pt.x)) b.points.push_back(pt);
            std::sort(b.points.begin(), b.points.end(),
                      [](const LegendrePoint& l, const LegendrePoint& r) { return l.x < r.x; });
            out.push_back(std::move(b));
        }
        std::sort(out.end() - 3, out.end(),
                  [](const Branch& l, const Branch& r) { return l.mu < r.mu; });
    }
    return out;
}

std::vector<Branch> prune(std::vector<Branch> branches, PruneMode mode) {
    if (mode == PruneMode::None) return branches;
    std::erase_if(branches, [&](const Branch& b) {
        if (b.role == Stability::Unstable) return true;
        return mode == PruneMode::DropUnstableAndMetastable && b.role == Stability::Metastable;
    });
    return branches;
}

std::vector<Polyline2D> project(const std::vector<Branch>& branches, ProjectionPlane plane) {
    std::vector<Polyline2D> out;
    out.reserve(branches.size());
    for (const auto& b : branches) {
        Polyline2D line;
        line.points.reserve(b.points.size());
        for (const auto& pt : b.points) line.points.push_back(drop_coordinate(pt, plane));
        out.push_back(std::move(line));
    }
    return out;
}

Polyline2D project(const LegendreCurve& curve, ProjectionPlane plane) {
    Polyline2D line;
    line.points.reserve(curve.samples.size());
    for (const auto& pt : curve.samples) line.points.push_back(drop_coordinate(pt, plane));
    return line;
}

std::vector<double> xz_fold_points(const LegendreCurve& curve) {
    std::vector<double> folds;
    const ModelParams& p = curve.params;
    for (std::size_t i = 0; i + 1 < curve.samples.size(); ++i) {
        const double a = dx_dy(p, curve.samples[i].y);
        const double b = dx_dy(p, curve.samples[i + 1].y);
        if (a == 0.0) {
            folds.push_back(curve.samples[i].y);
            continue;
        }
        if (b != 0.0 && (a < 0.0) != (b < 0.0)) {
            // bisect the sign change down to machine width
            double lo = curve.samples[i].y, hi = curve.samples[i + 1].y;
            double flo = a;
            for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = dx_dy(p, mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((flo < 0.0) == (fm < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            folds.push_back(0.5 * (lo + hi));
        }
    }
    if (!curve.samples.empty() && dx_dy(p, curve.samples.back().y) == 0.0)
        folds.push_back(curve.samples.back().y);
    return folds;
}

ToyCuspPoint toy_cusp_point(double x) {
    if (!std::isfinite(x)) throw DomainError("x must be finite");
    if (x < -0.125) throw DomainError("toy front is defined for x >= -1/8");
    const double disc = std::sqrt(1.0 + 8.0 * x);
    const double dp = (1.0 + disc) / 4.0;
    const double dm = (1.0 - disc) / 4.0;
    ToyCuspPoint pt;
    pt.x = x;
    pt.y_plus = dp * dp;
    pt.y_minus = dm * dm;
    pt.z_plus = pt.y_plus * pt.y_plus - dp * dp * dp / 3.0;
    pt.z_minus = pt.y_minus * pt.y_minus - dm * dm * dm / 3.0;
    return pt;
}

double toy_contact_residual(double x, bool plus_branch) {
    if (!std::isfinite(x)) throw DomainError("x must be finite");
    if (x <= -0.125) throw DomainError("residual is defined for x > -1/8");
    const double disc = std::sqrt(1.0 + 8.0 * x);
    const double s = plus_branch ? 1.0 : -1.0;
    // y and its derivative from the explicit branch formula, Delta and its
    // derivative from the quadratic; independent routes on purpose.
    const double y = (4.0 * x + 1.0 + s * disc) / 8.0;
    const double dy = (1.0 + s / disc) / 2.0;
    const double del = (1.0 + s * disc) / 4.0;
    const double ddel = s / disc;
    const double dz = 2.0 * y * dy - del * del * ddel;
    return dz - y;
}

}  // namespace contactflow
