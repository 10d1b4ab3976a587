#pragma once

#include <functional>
#include <vector>

#include "contactflow/legendre.hpp"
#include "contactflow/model.hpp"

namespace contactflow {

// Positive prefactor psi0(x) = c * exp(a*x); constant 1 by default.
struct Psi0 {
    double c = 1.0;
    double a = 0.0;
    double value(double x) const;
    double deriv(double x) const;
};

enum class HamiltonianKind { Squared, Cubic, Quadratic };

struct HamiltonianVariant {
    HamiltonianKind kind = HamiltonianKind::Squared;
    Psi0 psi0;
};

// Validates psi0 positivity on a sample grid.
HamiltonianVariant make_variant(HamiltonianKind kind, Psi0 psi0 = {});

struct ContactState {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double t = 0.0;
};

// The three branch values and slopes at a fixed x in the interior of an
// interval side; psi1 <= psi2 <= psi3 and dpsi_mu/dx = -y*_mu.
struct BranchFunctions {
    double psi1 = 0.0, psi2 = 0.0, psi3 = 0.0;
    double dpsi1_dx = 0.0, dpsi2_dx = 0.0, dpsi3_dx = 0.0;
};
BranchFunctions branch_functions(const ModelParams& p, double x);

struct VectorField3 {
    double xdot = 0.0;
    double ydot = 0.0;
    double zdot = 0.0;
};

// A scalar function h(x, y, z) with its partials, for the generic field.
struct ScalarField {
    std::function<double(double, double, double)> value;
    std::function<double(double, double, double)> ddx;
    std::function<double(double, double, double)> ddy;
    std::function<double(double, double, double)> ddz;
};

// Contact Hamiltonian vector field of h for the chosen one-form.
VectorField3 generic_vector_field(const ScalarField& h, SignConvention convention,
                                  const ContactState& s);

// The variant's Hamiltonian as a ScalarField (resolves branches per call).
ScalarField hamiltonian_field(const HamiltonianVariant& variant, const ModelParams& p);

// Closed-form field of the variant; xdot == 0 exactly.
VectorField3 vector_field(const HamiltonianVariant& variant, const ModelParams& p,
                          const ContactState& s);
VectorField3 vector_field(const HamiltonianVariant& variant, const BranchFunctions& bf,
                          const ContactState& s);

enum class StopReason { MaxTime, Settled };

struct Trajectory {
    HamiltonianVariant variant;
    double step = 0.0;
    std::vector<ContactState> states;  // first and last always recorded
    StopReason stop = StopReason::MaxTime;
    long steps_taken = 0;
};

struct IntegrateOptions {
    double step = 1e-3;
    double t_max = 200.0;
    int record_every = 1;       // 0 records endpoints only
    double blowup_limit = 1e6;  // |y| or |z| beyond this throws BlowupError
    double settle_tol = 1e-13;  // distance of z to the nearest fixed branch
    int settle_count = 10;      // consecutive settled steps before stopping
};

using StepObserver = std::function<void(const ContactState&)>;

// Fixed-step RK4 in (y, z) with x frozen; branch data cached once at s0.x.
Trajectory integrate(const HamiltonianVariant& variant, const ModelParams& p,
                     const ContactState& s0, double step, double t_max);
Trajectory integrate(const HamiltonianVariant& variant, const ModelParams& p,
                     const ContactState& s0, const IntegrateOptions& opts,
                     const StepObserver& observer = {});

enum class RegionLabel { D1Plus, D2Plus, D1Minus, D2Minus, D3Plus, OffRegion };

// Geometric classification: D1 below psi2, D2 at or above, per side sign.
RegionLabel classify_region(const ModelParams& p, const ContactState& s);

struct LyapunovData {
    double value = 0.0;
    double rate = 0.0;  // analytic derivative of value along the flow
};

// Certificate for (variant, region); throws RegionError when the pair has
// none or the state is not in the region.  Valid pairs: D1 for every
// variant, D2 for Squared, D3Plus for Cubic.
LyapunovData lyapunov(const HamiltonianVariant& variant, const ModelParams& p,
                      RegionLabel region, const ContactState& s);

// Near the mu-th fixed branch the flow linearizes to
//   Ydot = -c Y + d Z,  Zdot = -c Z.
// d comes from the analytic Jacobian of the implemented field;
// d_displayed is the commonly quoted closed form (differs for Squared
// mu=1 by a factor 2 on the second term).
struct LinearCoeffs {
    double c = 0.0;
    double d = 0.0;
    double d_displayed = 0.0;
};
LinearCoeffs linearized_coefficients(const HamiltonianVariant& variant, const ModelParams& p,
                                     double x, int mu);

struct YZ {
    double y = 0.0;
    double z = 0.0;
};

// Exact solution of the linearized system:
//   Z(t) = Z0 exp(-c t),  Y(t) = (Y0 + d Z0 t) exp(-c t).
YZ linearized_solution(double c, double d, double y0, double z0, double t);

}  // namespace contactflow
