#pragma once

#include <optional>
#include <vector>

#include "contactflow/errors.hpp"

namespace contactflow {

// All mean-field quantities are dimensionless: the coupling enters as
// j0bar = beta * j0 and the external field as x = beta * field.  Raw
// (beta, j0, field) triples are converted once at the boundary.
struct ModelParams {
    double j0bar = 1.0;

    static ModelParams dimensionless(double j0bar);
    static ModelParams from_raw(double beta, double j0);
};

struct RawParams {
    double beta = 1.0;
    double j0 = 1.0;
    double field = 0.0;
};

// (params, x) pair produced from a raw triple.
struct DimensionlessInput {
    ModelParams params;
    double x = 0.0;
};
DimensionlessInput to_dimensionless(const RawParams& raw);

enum class PhaseRegime { HighTemperature, Critical, LowTemperature };

enum class Stability { MostStable, Metastable, Unstable };

// One solution of y = tanh(2*j0bar*y + x).  mu orders the roots by the
// value z of the pseudo free energy at the root (mu = 1 is the lowest).
struct BranchRoot {
    int mu = 1;
    double y = 0.0;
    double z = 0.0;
    Stability stability = Stability::MostStable;
    bool degenerate = false;  // merged pair at a fold point
};

struct SpinodalPair {
    double y_minus = 0.0;
    double y_plus = 0.0;
};

// psi(x, y) = j0bar*y^2 - ln(2 cosh(2*j0bar*y + x)), evaluated in a form
// stable for large |arguments|.
double pseudo_free_energy(const ModelParams& p, double x, double y);

double dpsi_dx(const ModelParams& p, double x, double y);
double dpsi_dy(const ModelParams& p, double x, double y);
double d2psi_dx2(const ModelParams& p, double x, double y);
double d2psi_dy2(const ModelParams& p, double x, double y);

// Inverse of the self-consistency relation: the x at which y* = y solves
// y = tanh(2*j0bar*y + x).  Defined for |y| < 1.
double x_of_y(const ModelParams& p, double y);
double dx_dy(const ModelParams& p, double y);

PhaseRegime classify_phase(const ModelParams& p);

// Parameters y_minus < 0 < y_plus where dx_dy vanishes; present only in
// the low-temperature phase (2*j0bar > 1).
std::optional<SpinodalPair> spinodal_points(const ModelParams& p);

// All solutions of y = tanh(2*j0bar*y + x), ordered by mu (ascending z).
std::vector<BranchRoot> solve_branches(const ModelParams& p, double x);

// Leading-order root x / (1 - 2*j0bar); undefined at the critical point.
double small_y_approx(const ModelParams& p, double x);

// Exact finite-size free energy per spin from the full configuration sum
// (binomial weights, log-sum-exp).  n is the number of spins.
double exact_free_energy_per_spin(long n, double beta, double j0, double field);

}  // namespace contactflow
