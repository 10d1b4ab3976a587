#pragma once

#include <string>
#include <vector>

#include "contactflow/dynamics.hpp"

namespace contactflow {

// One relaxation outcome of the attractor map.  Offsets are measured from
// psi2(x): z0 = psi2(x) + offset, y0 = -dpsi2_dx(x) (the slope of the
// reference branch).  Failures are recorded per point, not thrown.
struct AttractorPoint {
    double x = 0.0;
    double offset = 0.0;
    double y0 = 0.0;
    double z0 = 0.0;
    double terminal_y = 0.0;
    double terminal_z = 0.0;
    int branch = 0;    // mu of the nearest fixed branch, 0 on failure
    double gap = 0.0;  // |terminal_z - psi_branch|
    std::string error;
    bool ok() const { return error.empty(); }
};

struct AttractorMap {
    ModelParams params;
    HamiltonianVariant variant;
    std::vector<double> x_grid;
    std::vector<double> offsets;
    std::vector<AttractorPoint> limits;  // x outer loop, offset inner
};

AttractorMap attractor_map(const HamiltonianVariant& variant, const ModelParams& p,
                           const std::vector<double>& x_grid, const std::vector<double>& offsets,
                           const IntegrateOptions& opts = {1e-3, 400.0, 0, 1e6, 1e-13, 10});

// One-sided limits of terminal y at x -> 0+/- by linear extrapolation from
// the two innermost successful grid points per side; returns y(0+) - y(0-).
double jump_across_zero(const AttractorMap& map);

struct SweepPoint {
    int direction = +1;  // +1 up-leg, -1 down-leg
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    bool jump = false;  // |y - previous y| exceeded the jump threshold here
};

struct SweepResult {
    ModelParams params;
    std::vector<SweepPoint> path;  // up leg then down leg
    std::vector<double> jump_xs;
    double loop_area = 0.0;  // |closed-path integral of y dx|
};

// Quasi-static field sweep x_min -> x_max -> x_min with n_steps points per
// leg.  Inside the fold window the state relaxes under the variant flow
// from the previous terminal y (z0 = psi(x, y_prev)); outside it (and at
// x = 0) the equilibrium is unique up to symmetry and is taken directly.
SweepResult hysteresis_sweep(const ModelParams& p, double x_min, double x_max, int n_steps,
                             const IntegrateOptions& opts = {1e-2, 50.0, 0, 1e6, 1e-13, 10},
                             const HamiltonianVariant& variant = {HamiltonianKind::Squared, {}});

struct CheckLine {
    std::string name;
    bool pass = false;
    double margin = 0.0;  // how far inside (positive) or outside the gate
    std::string details;
};

struct VerifyReport {
    std::vector<CheckLine> checks;
    bool all_pass() const;
};

// Numerical verification of the variant's stability claims: fixed-point
// residuals, basin dichotomy, certificate monotonicity, linear rates and
// instability growth.  budget caps the number of trajectories.
VerifyReport verify_theorems(const ModelParams& p, const HamiltonianVariant& variant,
                             int budget = 200);

struct AuditRow {
    long n = 0;
    double exact_f = 0.0;
    double saddle_f = 0.0;
    double gap = 0.0;
};

// Thermodynamic limit of the free energy per spin: the lowest branch value
// of psi divided by beta.
double saddle_free_energy(double beta, double j0, double field);

// Exact finite-n free energies against the saddle value.
std::vector<AuditRow> saddle_point_audit(double beta, double j0, double field,
                                         const std::vector<long>& n_list);

}  // namespace contactflow
