#pragma once

#include <array>
#include <vector>

#include "contactflow/model.hpp"

namespace contactflow {

// Which one-form the curve annihilates: dz + y dx or dz - y dx.
enum class SignConvention { PlusYdx, MinusYdx };

struct LegendrePoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// The equilibrium curve y -> (x(y), y, psi(x(y), y)), sampled on an
// increasing y grid inside (-1, 1).
struct LegendreCurve {
    ModelParams params;
    SignConvention convention = SignConvention::PlusYdx;
    std::vector<LegendrePoint> samples;
};

// Derivative of (x, y, z) with respect to the curve parameter y; dy == 1.
struct TangentVector {
    double dx = 0.0;
    double dy = 1.0;
    double dz = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return v > lo && v < hi; }
};

// Open field intervals on which three branches coexist.
struct BranchIntervals {
    Interval i_minus;  // (-x_sp, 0)
    Interval i_plus;   // (0, x_sp)
    double x_sp = 0.0;
};

enum class IntervalSide { IMinus, IPlus, FullLine };

enum class PruneMode { None, DropUnstable, DropUnstableAndMetastable };

struct Branch {
    int mu = 1;
    IntervalSide side = IntervalSide::FullLine;
    Stability role = Stability::MostStable;
    std::vector<LegendrePoint> points;  // sorted by x
};

enum class ProjectionPlane { XZ, XY, YZ };

struct Polyline2D {
    std::vector<std::array<double, 2>> points;
};

// n uniform samples of y on [-span, span].
std::vector<double> default_y_grid(int n = 2001, double span = 0.999);

// Samples the equilibrium curve; the grid must be strictly increasing and
// inside (-1, 1).
LegendreCurve sample_curve(const ModelParams& p, const std::vector<double>& y_grid,
                           SignConvention convention = SignConvention::PlusYdx);

TangentVector tangent_vector(const ModelParams& p, double y);

// dz/dy + y dx/dy with every factor evaluated independently; zero in exact
// arithmetic, so the value measures rounding only.
double contact_residual(const ModelParams& p, double y);

// max over adjacent sample pairs of |dz + ybar dx| / |dy| (midpoint ybar).
double max_discrete_residual(const LegendreCurve& curve);

// Throws PhaseError unless the phase is low-temperature.
BranchIntervals intervals(const ModelParams& p);

// Splits the sampled curve at the spinodal parameters and restricts each
// piece to the interval sides; in high temperature returns one FullLine
// branch instead of throwing.
std::vector<Branch> split_branches(const LegendreCurve& curve);

std::vector<Branch> prune(std::vector<Branch> branches, PruneMode mode);

// Coordinate drop, one polyline per branch, connectivity preserved.
std::vector<Polyline2D> project(const std::vector<Branch>& branches, ProjectionPlane plane);
Polyline2D project(const LegendreCurve& curve, ProjectionPlane plane);

// y values where the XZ-projected tangent dx/dy changes sign on the grid
// (bracketed to the grid resolution); empty in high temperature.
std::vector<double> xz_fold_points(const LegendreCurve& curve);

// ----- toy swallow-tail front (lambda = dz - y dx) -----

struct ToyCuspPoint {
    double x = 0.0;
    double y_plus = 0.0;
    double y_minus = 0.0;
    double z_plus = 0.0;
    double z_minus = 0.0;
};

// Two-branch solution of 2*Del^2 - Del - x = 0 with y = Del^2 and
// z = y^2 - Del^3/3; defined for x >= -1/8, branches merge at the cusp.
ToyCuspPoint toy_cusp_point(double x);

// dz/dx - y on the chosen branch, every factor evaluated independently.
double toy_contact_residual(double x, bool plus_branch);

}  // namespace contactflow
