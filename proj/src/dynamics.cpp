#include "contactflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "contactflow/log.hpp"

namespace contactflow {

namespace {

void require_finite_state(const ContactState& s) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z) || !std::isfinite(s.t))
        throw DomainError("state must be finite");
}

struct FieldContext {
    HamiltonianKind kind;
    double w = 1.0;   // psi0 at the frozen x
    double wp = 0.0;  // psi0' at the frozen x
    BranchFunctions bf;
};

// ydot and zdot at frozen x; xdot is identically zero for these variants
// because h does not depend on y.
inline void field_yz(const FieldContext& c, double y, double z, double& ydot, double& zdot) {
    const double u1 = z - c.bf.psi1;
    const double u2 = z - c.bf.psi2;
    switch (c.kind) {
        case HamiltonianKind::Squared: {
            const double h = -c.w * u1 * u2 * u2;
            ydot = c.wp * u1 * u2 * u2 - c.w * (y + c.bf.dpsi1_dx) * u2 * u2 -
                   2.0 * c.w * (y + c.bf.dpsi2_dx) * u1 * u2;
            zdot = h;
            return;
        }
        case HamiltonianKind::Cubic: {
            const double u3 = z - c.bf.psi3;
            const double h = -c.w * u1 * u2 * u3;
            ydot = c.wp * u1 * u2 * u3 - c.w * (y + c.bf.dpsi1_dx) * u2 * u3 -
                   c.w * (y + c.bf.dpsi2_dx) * u1 * u3 - c.w * (y + c.bf.dpsi3_dx) * u1 * u2;
            zdot = h;
            return;
        }
        case HamiltonianKind::Quadratic: {
            const double h = c.w * u1 * u2;
            ydot = -c.wp * u1 * u2 + c.w * (y + c.bf.dpsi1_dx) * u2 +
                   c.w * (y + c.bf.dpsi2_dx) * u1;
            zdot = h;
            return;
        }
    }
    ydot = zdot = 0.0;
}

FieldContext make_context(const HamiltonianVariant& variant, const ModelParams& p, double x) {
    FieldContext c;
    c.kind = variant.kind;
    c.w = variant.psi0.value(x);
    c.wp = variant.psi0.deriv(x);
    c.bf = branch_functions(p, x);
    return c;
}

double settle_distance(const FieldContext& c, double z) {
    double d = std::min(std::fabs(z - c.bf.psi1), std::fabs(z - c.bf.psi2));
    if (c.kind == HamiltonianKind::Cubic) d = std::min(d, std::fabs(z - c.bf.psi3));
    return d;
}

void validate_options(const IntegrateOptions& o) {
    if (!(o.step > 0.0) || !std::isfinite(o.step)) throw DomainError("step must be positive");
    if (!(o.t_max > 0.0) || !std::isfinite(o.t_max)) throw DomainError("t_max must be positive");
    if (o.record_every < 0) throw DomainError("record_every must be >= 0");
    if (o.settle_count < 1) throw DomainError("settle_count must be >= 1");
    if (!(o.blowup_limit > 0.0)) throw DomainError("blowup_limit must be positive");
}

}  // namespace

double Psi0::value(double x) const { return c * std::exp(a * x); }
double Psi0::deriv(double x) const { return a * c * std::exp(a * x); }

HamiltonianVariant make_variant(HamiltonianKind kind, Psi0 psi0) {
    if (!std::isfinite(psi0.c) || !std::isfinite(psi0.a))
        throw DomainError("psi0 parameters must be finite");
    if (!(psi0.c > 0.0)) throw DomainError("psi0 must be positive");
    for (int i = 0; i <= 40; ++i) {  // sample check over a working window
        const double x = -2.0 + 0.1 * i;
        const double v = psi0.value(x);
        if (!(v > 0.0) || !std::isfinite(v))
            throw DomainError("psi0 is not positive and finite on the sample grid");
    }
    return {kind, psi0};
}

BranchFunctions branch_functions(const ModelParams& p, double x) {
    const BranchIntervals iv = intervals(p);  // PhaseError in high temperature
    if (!iv.i_minus.contains(x) && !iv.i_plus.contains(x))
        throw RegionError("x is outside the open branch intervals");
    const auto roots = solve_branches(p, x);
    if (roots.size() != 3)
        throw RegionError("expected three branches at x=" + std::to_string(x));
    BranchFunctions bf;
    bf.psi1 = roots[0].z;
    bf.psi2 = roots[1].z;
    bf.psi3 = roots[2].z;
    // On the equilibrium curve dz/dx = dpsi/dx = -y*.
    bf.dpsi1_dx = -roots[0].y;
    bf.dpsi2_dx = -roots[1].y;
    bf.dpsi3_dx = -roots[2].y;
    return bf;
}

VectorField3 generic_vector_field(const ScalarField& h, SignConvention convention,
                                  const ContactState& s) {
    if (!h.value || !h.ddx || !h.ddy || !h.ddz)
        throw DomainError("scalar field needs value and all three partials");
    require_finite_state(s);
    const double hv = h.value(s.x, s.y, s.z);
    const double hx = h.ddx(s.x, s.y, s.z);
    const double hy = h.ddy(s.x, s.y, s.z);
    const double hz = h.ddz(s.x, s.y, s.z);
    if (convention == SignConvention::PlusYdx)
        return {hy, -hx + s.y * hz, hv - s.y * hy};
    return {-hy, hx + s.y * hz, hv - s.y * hy};
}

ScalarField hamiltonian_field(const HamiltonianVariant& variant, const ModelParams& p) {
    const HamiltonianKind kind = variant.kind;
    const Psi0 psi0 = variant.psi0;
    auto value = [kind, psi0, p](double x, double, double z) {
        const BranchFunctions bf = branch_functions(p, x);
        const double u1 = z - bf.psi1, u2 = z - bf.psi2;
        switch (kind) {
            case HamiltonianKind::Squared: return -psi0.value(x) * u1 * u2 * u2;
            case HamiltonianKind::Cubic: return -psi0.value(x) * u1 * u2 * (z - bf.psi3);
            case HamiltonianKind::Quadratic: return psi0.value(x) * u1 * u2;
        }
        return 0.0;
    };
    auto ddx = [kind, psi0, p](double x, double, double z) {
        const BranchFunctions bf = branch_functions(p, x);
        const double w = psi0.value(x), wp = psi0.deriv(x);
        const double u1 = z - bf.psi1, u2 = z - bf.psi2;
        const double d1 = bf.dpsi1_dx, d2 = bf.dpsi2_dx;
        switch (kind) {
            case HamiltonianKind::Squared:
                return -wp * u1 * u2 * u2 + w * d1 * u2 * u2 + 2.0 * w * d2 * u1 * u2;
            case HamiltonianKind::Cubic: {
                const double u3 = z - bf.psi3, d3 = bf.dpsi3_dx;
                return -wp * u1 * u2 * u3 + w * d1 * u2 * u3 + w * d2 * u1 * u3 +
                       w * d3 * u1 * u2;
            }
            case HamiltonianKind::Quadratic:
                return wp * u1 * u2 - w * d1 * u2 - w * d2 * u1;
        }
        return 0.0;
    };
    auto ddy = [](double, double, double) { return 0.0; };
    auto ddz = [kind, psi0, p](double x, double, double z) {
        const BranchFunctions bf = branch_functions(p, x);
        const double w = psi0.value(x);
        const double u1 = z - bf.psi1, u2 = z - bf.psi2;
        switch (kind) {
            case HamiltonianKind::Squared: return -w * (u2 * u2 + 2.0 * u1 * u2);
            case HamiltonianKind::Cubic: {
                const double u3 = z - bf.psi3;
                return -w * (u2 * u3 + u1 * u3 + u1 * u2);
            }
            case HamiltonianKind::Quadratic: return w * (u1 + u2);
        }
        return 0.0;
    };
    return {value, ddx, ddy, ddz};
}

VectorField3 vector_field(const HamiltonianVariant& variant, const ModelParams& p,
                          const ContactState& s) {
    require_finite_state(s);
    const FieldContext c = make_context(variant, p, s.x);
    VectorField3 v;
    field_yz(c, s.y, s.z, v.ydot, v.zdot);
    v.xdot = 0.0;
    return v;
}

VectorField3 vector_field(const HamiltonianVariant& variant, const BranchFunctions& bf,
                          const ContactState& s) {
    require_finite_state(s);
    FieldContext c;
    c.kind = variant.kind;
    c.w = variant.psi0.value(s.x);
    c.wp = variant.psi0.deriv(s.x);
    c.bf = bf;
    VectorField3 v;
    field_yz(c, s.y, s.z, v.ydot, v.zdot);
    v.xdot = 0.0;
    return v;
}

Trajectory integrate(const HamiltonianVariant& variant, const ModelParams& p,
                     const ContactState& s0, double step, double t_max) {
    IntegrateOptions opts;
    opts.step = step;
    opts.t_max = t_max;
    return integrate(variant, p, s0, opts);
}

Trajectory integrate(const HamiltonianVariant& variant, const ModelParams& p,
                     const ContactState& s0, const IntegrateOptions& opts,
                     const StepObserver& observer) {
    validate_options(opts);
    require_finite_state(s0);
    const FieldContext c = make_context(variant, p, s0.x);  // branch data frozen at s0.x

    Trajectory traj;
    traj.variant = variant;
    traj.step = opts.step;
    traj.states.push_back(s0);

    const long n = std::max<long>(1, std::llround(opts.t_max / opts.step));
    const double h = opts.step;
    double y = s0.y, z = s0.z;
    int settled = 0;

    for (long i = 1; i <= n; ++i) {
        double k1y, k1z, k2y, k2z, k3y, k3z, k4y, k4z;
        field_yz(c, y, z, k1y, k1z);
        field_yz(c, y + 0.5 * h * k1y, z + 0.5 * h * k1z, k2y, k2z);
        field_yz(c, y + 0.5 * h * k2y, z + 0.5 * h * k2z, k3y, k3z);
        field_yz(c, y + h * k3y, z + h * k3z, k4y, k4z);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        traj.steps_taken = i;

        if (!std::isfinite(y) || !std::isfinite(z) || std::fabs(y) > opts.blowup_limit ||
            std::fabs(z) > opts.blowup_limit)
            throw BlowupError("trajectory left the trust region at t=" +
                              std::to_string(s0.t + static_cast<double>(i) * h));

        const ContactState now{s0.x, y, z, s0.t + static_cast<double>(i) * h};
        if (observer) observer(now);

        const bool last = (i == n);
        if (settle_distance(c, z) < opts.settle_tol) {
            if (++settled >= opts.settle_count) {
                traj.states.push_back(now);
                traj.stop = StopReason::Settled;
                return traj;
            }
        } else {
            settled = 0;
        }

        if (last || (opts.record_every > 0 && i % opts.record_every == 0))
            traj.states.push_back(now);
    }
    traj.stop = StopReason::MaxTime;
    return traj;
}

RegionLabel classify_region(const ModelParams& p, const ContactState& s) {
    require_finite_state(s);
    if (classify_phase(p) != PhaseRegime::LowTemperature) return RegionLabel::OffRegion;
    const BranchIntervals iv = intervals(p);
    const bool plus = iv.i_plus.contains(s.x);
    const bool minus = iv.i_minus.contains(s.x);
    if (!plus && !minus) return RegionLabel::OffRegion;
    const BranchFunctions bf = branch_functions(p, s.x);
    if (plus) return s.z < bf.psi2 ? RegionLabel::D1Plus : RegionLabel::D2Plus;
    return s.z < bf.psi2 ? RegionLabel::D1Minus : RegionLabel::D2Minus;
}

LyapunovData lyapunov(const HamiltonianVariant& variant, const ModelParams& p, RegionLabel region,
                      const ContactState& s) {
    require_finite_state(s);
    if (region == RegionLabel::OffRegion) throw RegionError("no certificate off-region");

    const RegionLabel geo = classify_region(p, s);
    if (region == RegionLabel::D3Plus) {
        const BranchFunctions probe = branch_functions(p, s.x);
        if (geo != RegionLabel::D2Plus || !(s.z > probe.psi2))
            throw RegionError("state is not in D3+");
    } else if (geo != region) {
        throw RegionError("state is not in the requested region");
    }

    const FieldContext c = make_context(variant, p, s.x);
    const double u1 = s.z - c.bf.psi1;
    const double u2 = s.z - c.bf.psi2;
    const double u3 = s.z - c.bf.psi3;

    const bool d1_region = region == RegionLabel::D1Plus || region == RegionLabel::D1Minus;
    const bool d2_region = region == RegionLabel::D2Plus || region == RegionLabel::D2Minus;

    if (d1_region) {
        LyapunovData out;
        out.value = 0.5 * u1 * u1;
        switch (variant.kind) {
            case HamiltonianKind::Squared: out.rate = -c.w * u1 * u1 * u2 * u2; break;
            case HamiltonianKind::Cubic: out.rate = -c.w * u1 * u1 * u2 * u3; break;
            case HamiltonianKind::Quadratic: out.rate = c.w * u1 * u1 * u2; break;
        }
        return out;
    }
    if (d2_region) {
        if (variant.kind != HamiltonianKind::Squared)
            throw RegionError("only the squared variant certifies D2");
        return {u2, -c.w * u1 * u2 * u2};
    }
    // D3Plus
    if (variant.kind != HamiltonianKind::Cubic)
        throw RegionError("only the cubic variant certifies D3+");
    return {0.5 * u3 * u3, -c.w * u1 * u2 * u3 * u3};
}

LinearCoeffs linearized_coefficients(const HamiltonianVariant& variant, const ModelParams& p,
                                     double x, int mu) {
    const BranchFunctions bf = branch_functions(p, x);
    const double w = variant.psi0.value(x);
    const double wp = variant.psi0.deriv(x);
    const double p21 = bf.psi2 - bf.psi1;
    const double p31 = bf.psi3 - bf.psi1;
    const double p32 = bf.psi3 - bf.psi2;
    const double q21 = bf.dpsi2_dx - bf.dpsi1_dx;
    const double q31 = bf.dpsi3_dx - bf.dpsi1_dx;
    const double q32 = bf.dpsi3_dx - bf.dpsi2_dx;

    LinearCoeffs lc;
    switch (variant.kind) {
        case HamiltonianKind::Squared:
            if (mu == 1) {
                lc.c = w * p21 * p21;
                lc.d = wp * p21 * p21 + 2.0 * w * p21 * q21;
                lc.d_displayed = wp * p21 * p21 + w * p21 * q21;
            } else if (mu == 2) {
                // double zero of h: the linearization is identically zero
                lc.c = 0.0;
                lc.d = 0.0;
                lc.d_displayed = 0.0;
            } else {
                throw DomainError("squared variant has branches mu=1,2");
            }
            return lc;
        case HamiltonianKind::Cubic:
            if (mu == 1) {
                lc.c = w * p21 * p31;
                lc.d = wp * p21 * p31 + w * q21 * p31 + w * p21 * q31;
            } else if (mu == 2) {
                lc.c = -w * p21 * p32;
                lc.d = -(wp * p21 * p32 + w * q21 * p32 + w * p21 * q32);
            } else if (mu == 3) {
                lc.c = w * p31 * p32;
                lc.d = wp * p31 * p32 + w * q31 * p32 + w * p31 * q32;
            } else {
                throw DomainError("cubic variant has branches mu=1,2,3");
            }
            lc.d_displayed = lc.d;
            return lc;
        case HamiltonianKind::Quadratic:
            if (mu == 1) {
                lc.c = w * p21;
                lc.d = wp * p21 + w * q21;
            } else if (mu == 2) {
                lc.c = -w * p21;
                lc.d = -(wp * p21 + w * q21);
            } else {
                throw DomainError("quadratic variant has branches mu=1,2");
            }
            lc.d_displayed = lc.d;
            return lc;
    }
    throw DomainError("unknown variant");
}

YZ linearized_solution(double c, double d, double y0, double z0, double t) {
    const double decay = std::exp(-c * t);
    return {(y0 + d * z0 * t) * decay, z0 * decay};
}

}  // namespace contactflow
