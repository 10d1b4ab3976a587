#include "contactflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "contactflow/log.hpp"

namespace contactflow {

namespace {

constexpr double kCritBand = 1e-12;     // classification band on |2*j0bar - 1|
constexpr double kBisectWidth = 1e-8;   // bracket width before switching to Newton
constexpr double kResidualTol = 1e-12;  // |y - tanh(2*j0bar*y + x)| at an accepted root
constexpr int kMaxIter = 200;
constexpr double kMergeTol = 1e-6;      // roots closer than this collapse to one fold root
constexpr double kFoldSlopeTol = 1e-9;  // |dx_dy| below this marks a fold root

// ln(2 cosh u) without overflow: |u| + ln(1 + exp(-2|u|)).
double ln2cosh(double u) {
    const double a = std::fabs(u);
    return a + std::log1p(std::exp(-2.0 * a));
}

// 1/cosh^2(u), decaying to 0 instead of overflowing for large |u|.
double sech2(double u) {
    const double th = std::tanh(u);
    return 1.0 - th * th;
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

double self_consistency(const ModelParams& p, double x, double y) {
    return y - std::tanh(2.0 * p.j0bar * y + x);
}

// Root of x_of_y(y) = x on a segment where x_of_y is monotone.  The
// bracket [ylo, yhi] must straddle the target (endpoints may touch it).
// Bisection narrows the bracket, then bracket-guarded Newton polishes
// until the self-consistency residual passes.
double invert_on_segment(const ModelParams& p, double x, double ylo, double yhi) {
    double glo = x_of_y(p, ylo) - x;
    double ghi = x_of_y(p, yhi) - x;
    double sign = 1.0;
    if (glo > ghi) {  // decreasing segment: flip orientation
        sign = -1.0;
        glo = -glo;
        ghi = -ghi;
    }
    if (glo > 0.0 || ghi < 0.0) {
        // Target beyond the representable end of the segment; the end point
        // is the best double.  The residual gate below decides.
        double yend = (glo > 0.0) ? ylo : yhi;
        if (std::fabs(self_consistency(p, x, yend)) < kResidualTol) return yend;
        throw ConvergenceError("root bracket lost on monotone segment");
    }

    double y = 0.5 * (ylo + yhi);
    for (int it = 0; it < kMaxIter; ++it) {
        bool newton_ok = false;
        if (yhi - ylo < kBisectWidth) {
            const double slope = dx_dy(p, y);
            if (std::fabs(slope) > 1e-300) {
                const double g = x_of_y(p, y) - x;
                const double ynext = y - g / slope;
                if (ynext > ylo && ynext < yhi) {
                    y = ynext;
                    newton_ok = true;
                }
            }
        }
        if (!newton_ok) y = 0.5 * (ylo + yhi);
        if (std::fabs(self_consistency(p, x, y)) < kResidualTol) return y;
        const double g = sign * (x_of_y(p, y) - x);
        if (g < 0.0)
            ylo = y;
        else
            yhi = y;
        if (ylo >= yhi) break;
    }
    if (std::fabs(self_consistency(p, x, y)) < kResidualTol) return y;
    throw ConvergenceError("self-consistency residual did not reach tolerance");
}

// Largest |y| we can represent strictly inside (-1, 1).
double extreme_y() { return std::nextafter(1.0, 0.0); }

// Expand an endpoint toward -1 until x_of_y drops below x (segment rising
// from -infinity), or toward +1 until it rises above x.
double expand_down(const ModelParams& p, double x, double start) {
    double y = start;
    while (x_of_y(p, y) - x > 0.0) {
        const double next = -1.0 + 0.5 * (1.0 + y);
        if (next <= -extreme_y()) return -extreme_y();
        y = next;
    }
    return y;
}

double expand_up(const ModelParams& p, double x, double start) {
    double y = start;
    while (x_of_y(p, y) - x < 0.0) {
        const double next = 1.0 - 0.5 * (1.0 - y);
        if (next >= extreme_y()) return extreme_y();
        y = next;
    }
    return y;
}

}  // namespace

ModelParams ModelParams::dimensionless(double j0bar) {
    require_finite(j0bar, "j0bar");
    if (j0bar <= 0.0) throw DomainError("j0bar must be positive");
    return ModelParams{j0bar};
}

ModelParams ModelParams::from_raw(double beta, double j0) {
    require_finite(beta, "beta");
    require_finite(j0, "j0");
    if (beta <= 0.0) throw DomainError("beta must be positive");
    if (j0 <= 0.0) throw DomainError("j0 must be positive");
    return ModelParams{beta * j0};
}

DimensionlessInput to_dimensionless(const RawParams& raw) {
    require_finite(raw.field, "field");
    return {ModelParams::from_raw(raw.beta, raw.j0), raw.beta * raw.field};
}

double pseudo_free_energy(const ModelParams& p, double x, double y) {
    require_finite(x, "x");
    require_finite(y, "y");
    return p.j0bar * y * y - ln2cosh(2.0 * p.j0bar * y + x);
}

double dpsi_dx(const ModelParams& p, double x, double y) {
    return -std::tanh(2.0 * p.j0bar * y + x);
}

double dpsi_dy(const ModelParams& p, double x, double y) {
    return 2.0 * p.j0bar * (y - std::tanh(2.0 * p.j0bar * y + x));
}

double d2psi_dx2(const ModelParams& p, double x, double y) {
    return -sech2(2.0 * p.j0bar * y + x);
}

double d2psi_dy2(const ModelParams& p, double x, double y) {
    return 2.0 * p.j0bar * (1.0 - 2.0 * p.j0bar * sech2(2.0 * p.j0bar * y + x));
}

double x_of_y(const ModelParams& p, double y) {
    if (!(std::fabs(y) < 1.0)) throw DomainError("x_of_y needs |y| < 1");
    return -2.0 * p.j0bar * y + std::atanh(y);
}

double dx_dy(const ModelParams& p, double y) {
    if (!(std::fabs(y) < 1.0)) throw DomainError("dx_dy needs |y| < 1");
    return -(2.0 * p.j0bar - 1.0 / (1.0 - y * y));
}

PhaseRegime classify_phase(const ModelParams& p) {
    const double g = 2.0 * p.j0bar - 1.0;
    if (std::fabs(g) <= kCritBand) return PhaseRegime::Critical;
    return g > 0.0 ? PhaseRegime::LowTemperature : PhaseRegime::HighTemperature;
}

std::optional<SpinodalPair> spinodal_points(const ModelParams& p) {
    if (classify_phase(p) != PhaseRegime::LowTemperature) return std::nullopt;
    const double s = std::sqrt(1.0 - 1.0 / (2.0 * p.j0bar));
    return SpinodalPair{-s, s};
}

std::vector<BranchRoot> solve_branches(const ModelParams& p, double x) {
    require_finite(x, "x");

    std::vector<double> ys;
    const auto sp = spinodal_points(p);
    if (!sp) {
        // Single monotone segment covering all of (-1, 1).
        const double lo = expand_down(p, x, 0.0);
        const double hi = expand_up(p, x, 0.0);
        ys.push_back(invert_on_segment(p, x, lo, hi));
    } else {
        const double ym = sp->y_minus;
        const double yp = sp->y_plus;
        const double x_hi = x_of_y(p, ym);  // local max of x_of_y, positive
        const double x_lo = x_of_y(p, yp);  // local min, equals -x_hi
        if (x <= x_hi) {
            // rising outer segment (-1, y_minus]
            ys.push_back(invert_on_segment(p, x, expand_down(p, x, ym), ym));
        }
        if (x >= x_lo && x <= x_hi) {
            // falling middle segment [y_minus, y_plus]
            ys.push_back(invert_on_segment(p, x, ym, yp));
        }
        if (x >= x_lo) {
            // rising outer segment [y_plus, 1)
            ys.push_back(invert_on_segment(p, x, yp, expand_up(p, x, yp)));
        }
    }

    std::sort(ys.begin(), ys.end());

    // Adjacent segments return the same root at a fold point; collapse it.
    std::vector<BranchRoot> roots;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (!roots.empty() && std::fabs(ys[i] - roots.back().y) < kMergeTol) {
            roots.back().y = 0.5 * (roots.back().y + ys[i]);
            roots.back().degenerate = true;
            logging::debug("merged fold root at y=" + std::to_string(roots.back().y));
            continue;
        }
        BranchRoot r;
        r.y = ys[i];
        roots.push_back(r);
    }
    for (auto& r : roots) {
        r.z = pseudo_free_energy(p, x, r.y);
        if (std::fabs(dx_dy(p, r.y)) < kFoldSlopeTol) r.degenerate = true;
    }

    std::sort(roots.begin(), roots.end(), [](const BranchRoot& a, const BranchRoot& b) {
        if (a.z != b.z) return a.z < b.z;
        return a.y < b.y;
    });
    for (std::size_t i = 0; i < roots.size(); ++i) {
        roots[i].mu = static_cast<int>(i) + 1;
        roots[i].stability = (i == 0)   ? Stability::MostStable
                             : (i == 1) ? Stability::Metastable
                                        : Stability::Unstable;
    }
    return roots;
}

double small_y_approx(const ModelParams& p, double x) {
    require_finite(x, "x");
    if (classify_phase(p) == PhaseRegime::Critical)
        throw DomainError("small-y approximation is undefined at the critical coupling");
    return x / (1.0 - 2.0 * p.j0bar);
}

double exact_free_energy_per_spin(long n, double beta, double j0, double field) {
    if (n < 1) throw DomainError("n must be at least 1");
    if (n > 1000000) throw DomainError("n capped at 1e6");
    require_finite(beta, "beta");
    require_finite(j0, "j0");
    require_finite(field, "field");
    if (beta <= 0.0) throw DomainError("beta must be positive");

    // log of each configuration class weight: C(n,k) exp(beta*j0*m^2/n + beta*field*m)
    std::vector<double> lw(static_cast<std::size_t>(n) + 1);
    const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
    double mx = -HUGE_VAL;
    for (long k = 0; k <= n; ++k) {
        const double m = static_cast<double>(n - 2 * k);
        const double v = lgn - std::lgamma(static_cast<double>(k) + 1.0) -
                         std::lgamma(static_cast<double>(n - k) + 1.0) +
                         beta * j0 * m * m / static_cast<double>(n) + beta * field * m;
        lw[static_cast<std::size_t>(k)] = v;
        mx = std::max(mx, v);
    }
    double s = 0.0;
    for (double v : lw) s += std::exp(v - mx);
    const double f = -(mx + std::log(s)) / (static_cast<double>(n) * beta);
    if (!std::isfinite(f)) throw OverflowError("free energy sum is not finite");
    return f;
}

}  // namespace contactflow
