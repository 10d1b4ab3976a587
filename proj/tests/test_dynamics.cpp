#include <cmath>
#include <random>

#include "contactflow/dynamics.hpp"
#include "doctest.h"

using namespace contactflow;

namespace {

const ModelParams kP = ModelParams::dimensionless(1.0);

// reference branch data at x = 0.1, 60-digit solver
constexpr double kPsi1 = -1.1158783065098005;
constexpr double kPsi2 = -0.92446997661441975;
constexpr double kPsi3 = -0.68813875690944877;
constexpr double kSlope1 = -0.96625370939326957;
constexpr double kSlope2 = 0.94596358242450811;
constexpr double kSlope3 = 0.10033878149041745;

HamiltonianVariant variant_of(HamiltonianKind kind, double c = 1.0, double a = 0.0) {
    return make_variant(kind, {c, a});
}

}  // namespace

TEST_CASE("prefactor validation and evaluation") {
    const HamiltonianVariant v = variant_of(HamiltonianKind::Squared, 2.0, -0.5);
    CHECK(v.psi0.value(0.0) == 2.0);
    CHECK(v.psi0.value(1.0) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-15));
    CHECK(v.psi0.deriv(1.0) == doctest::Approx(-0.5 * v.psi0.value(1.0)).epsilon(1e-15));
    CHECK_THROWS_AS(variant_of(HamiltonianKind::Squared, 0.0), DomainError);
    CHECK_THROWS_AS(variant_of(HamiltonianKind::Cubic, -1.0), DomainError);
}

TEST_CASE("branch functions at a reference field") {
    const BranchFunctions bf = branch_functions(kP, 0.1);
    CHECK(bf.psi1 == doctest::Approx(kPsi1).epsilon(1e-12));
    CHECK(bf.psi2 == doctest::Approx(kPsi2).epsilon(1e-12));
    CHECK(bf.psi3 == doctest::Approx(kPsi3).epsilon(1e-12));
    CHECK(bf.dpsi1_dx == doctest::Approx(kSlope1).epsilon(1e-12));
    CHECK(bf.dpsi2_dx == doctest::Approx(kSlope2).epsilon(1e-12));
    CHECK(bf.dpsi3_dx == doctest::Approx(kSlope3).epsilon(1e-12));
    CHECK(bf.psi1 < bf.psi2);
    CHECK(bf.psi2 < bf.psi3);

    CHECK_THROWS_AS(branch_functions(kP, 0.0), RegionError);
    CHECK_THROWS_AS(branch_functions(kP, 0.6), RegionError);
    CHECK_THROWS_AS(branch_functions(ModelParams::dimensionless(0.4), 0.1), PhaseError);
}

TEST_CASE("branches are exact fixed points of every variant") {
    const BranchFunctions bf = branch_functions(kP, 0.1);
    const double psis[] = {bf.psi1, bf.psi2, bf.psi3};
    const double slopes[] = {bf.dpsi1_dx, bf.dpsi2_dx, bf.dpsi3_dx};
    for (HamiltonianKind kind :
         {HamiltonianKind::Squared, HamiltonianKind::Cubic, HamiltonianKind::Quadratic}) {
        const HamiltonianVariant v = variant_of(kind, 1.7, 0.3);
        const int mus = kind == HamiltonianKind::Cubic ? 3 : 2;
        for (int i = 0; i < mus; ++i) {
            const VectorField3 f = vector_field(v, bf, {0.1, -slopes[i], psis[i], 0.0});
            CHECK(f.xdot == 0.0);
            CHECK(f.ydot == 0.0);
            CHECK(f.zdot == 0.0);
        }
    }
}

TEST_CASE("closed-form field equals the generic contact construction") {
    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> ux(0.05, 0.45);
    std::uniform_real_distribution<double> uy(-1.5, 1.5);
    std::uniform_real_distribution<double> uz(-1.3, -0.5);
    for (HamiltonianKind kind :
         {HamiltonianKind::Squared, HamiltonianKind::Cubic, HamiltonianKind::Quadratic}) {
        const HamiltonianVariant v = variant_of(kind, 1.2, -0.4);
        const ScalarField h = hamiltonian_field(v, kP);
        for (int i = 0; i < 40; ++i) {
            const ContactState s{ux(rng), uy(rng), uz(rng), 0.0};
            const VectorField3 a = vector_field(v, kP, s);
            const VectorField3 b = generic_vector_field(h, SignConvention::PlusYdx, s);
            CHECK(a.xdot == 0.0);
            CHECK(b.xdot == doctest::Approx(0.0).epsilon(1e-15));
            CHECK(a.ydot == doctest::Approx(b.ydot).epsilon(1e-12));
            CHECK(a.zdot == doctest::Approx(b.zdot).epsilon(1e-12));
        }
    }
}

TEST_CASE("the two sign conventions differ as expected") {
    // h = x*y distinguishes them: xdot flips sign, zdot vanishes
    const ScalarField h{[](double x, double y, double) { return x * y; },
                        [](double, double y, double) { return y; },
                        [](double x, double, double) { return x; },
                        [](double, double, double) { return 0.0; }};
    const ContactState s{2.0, 3.0, 5.0, 0.0};
    const VectorField3 plus = generic_vector_field(h, SignConvention::PlusYdx, s);
    CHECK(plus.xdot == 2.0);
    CHECK(plus.ydot == -3.0);
    CHECK(plus.zdot == 0.0);
    const VectorField3 minus = generic_vector_field(h, SignConvention::MinusYdx, s);
    CHECK(minus.xdot == -2.0);
    CHECK(minus.ydot == 3.0);
    CHECK(minus.zdot == 0.0);
}

TEST_CASE("linearized coefficients match a finite-difference Jacobian") {
    const double x = 0.3;
    const BranchFunctions bf = branch_functions(kP, x);
    const double psis[] = {bf.psi1, bf.psi2, bf.psi3};
    const double slopes[] = {bf.dpsi1_dx, bf.dpsi2_dx, bf.dpsi3_dx};
    const double h = 1e-6;

    for (HamiltonianKind kind :
         {HamiltonianKind::Squared, HamiltonianKind::Cubic, HamiltonianKind::Quadratic}) {
        const HamiltonianVariant v = variant_of(kind, 1.5, 0.7);
        const int mus = kind == HamiltonianKind::Cubic ? 3 : 2;
        for (int mu = 1; mu <= mus; ++mu) {
            const LinearCoeffs lc = linearized_coefficients(v, kP, x, mu);
            const double ys = -slopes[mu - 1], zs = psis[mu - 1];
            auto fy = [&](double dy, double dz) {
                return vector_field(v, bf, {x, ys + dy, zs + dz, 0.0}).ydot;
            };
            auto fz = [&](double dy, double dz) {
                return vector_field(v, bf, {x, ys + dy, zs + dz, 0.0}).zdot;
            };
            const double dydy = (fy(h, 0) - fy(-h, 0)) / (2 * h);
            const double dydz = (fy(0, h) - fy(0, -h)) / (2 * h);
            const double dzdy = (fz(h, 0) - fz(-h, 0)) / (2 * h);
            const double dzdz = (fz(0, h) - fz(0, -h)) / (2 * h);
            CHECK(dydy == doctest::Approx(-lc.c).epsilon(1e-5).scale(1.0));
            CHECK(dydz == doctest::Approx(lc.d).epsilon(1e-5).scale(1.0));
            CHECK(dzdy == doctest::Approx(0.0).epsilon(1e-5).scale(1.0));
            CHECK(dzdz == doctest::Approx(-lc.c).epsilon(1e-5).scale(1.0));
        }
    }
}

TEST_CASE("linearized coefficient table") {
    const double x = 0.3;
    const double psi21 = 0.57180413774779990;
    const double psi32 = 0.091232422892306397;

    const LinearCoeffs sq1 =
        linearized_coefficients(variant_of(HamiltonianKind::Squared), kP, x, 1);
    CHECK(sq1.c == doctest::Approx(psi21 * psi21).epsilon(1e-11));
    CHECK(sq1.d != sq1.d_displayed);  // quoted form misses half the cross term
    CHECK(sq1.d - sq1.d_displayed ==
          doctest::Approx(sq1.d_displayed).epsilon(1e-11));  // wp = 0 here

    const LinearCoeffs sq2 =
        linearized_coefficients(variant_of(HamiltonianKind::Squared), kP, x, 2);
    CHECK(sq2.c == 0.0);
    CHECK(sq2.d == 0.0);

    const LinearCoeffs cu2 =
        linearized_coefficients(variant_of(HamiltonianKind::Cubic), kP, x, 2);
    CHECK(cu2.c == doctest::Approx(-psi21 * psi32).epsilon(1e-11));
    const LinearCoeffs cu3 =
        linearized_coefficients(variant_of(HamiltonianKind::Cubic), kP, x, 3);
    CHECK(cu3.c == doctest::Approx((psi21 + psi32) * psi32).epsilon(1e-11));

    const LinearCoeffs qu2 =
        linearized_coefficients(variant_of(HamiltonianKind::Quadratic), kP, x, 2);
    CHECK(qu2.c == doctest::Approx(-psi21).epsilon(1e-11));

    CHECK_THROWS_AS(linearized_coefficients(variant_of(HamiltonianKind::Squared), kP, x, 3),
                    DomainError);
    CHECK_THROWS_AS(linearized_coefficients(variant_of(HamiltonianKind::Quadratic), kP, x, 0),
                    DomainError);
}

TEST_CASE("linearized solution closed form") {
    const YZ at0 = linearized_solution(0.3, 0.2, 1.5, -2.0, 0.0);
    CHECK(at0.y == 1.5);
    CHECK(at0.z == -2.0);
    const YZ at2 = linearized_solution(0.3, 0.2, 1.5, -2.0, 2.0);
    CHECK(at2.z == doctest::Approx(-2.0 * std::exp(-0.6)).epsilon(1e-15));
    CHECK(at2.y == doctest::Approx((1.5 + 0.2 * -2.0 * 2.0) * std::exp(-0.6)).epsilon(1e-15));
}

TEST_CASE("integration conserves x and records endpoints") {
    const HamiltonianVariant v = variant_of(HamiltonianKind::Squared);
    const BranchFunctions bf = branch_functions(kP, 0.2);
    const ContactState s0{0.2, -bf.dpsi2_dx, bf.psi2 - 0.1, 0.0};
    const Trajectory traj = integrate(v, kP, s0, {1e-3, 1.0, 100, 1e6, 0.0, 10});
    REQUIRE(traj.states.size() == 11);  // s0 plus every 100th of 1000 steps
    CHECK(traj.states.front().y == s0.y);
    CHECK(traj.states.front().z == s0.z);
    CHECK(traj.states.front().t == 0.0);
    for (const auto& st : traj.states) CHECK(st.x == 0.2);
    CHECK(traj.states.back().t == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(traj.stop == StopReason::MaxTime);
    CHECK(traj.steps_taken == 1000);

    CHECK_THROWS_AS(integrate(v, kP, s0, {-1e-3, 1.0, 1, 1e6, 0.0, 10}), DomainError);
    CHECK_THROWS_AS(integrate(v, kP, s0, {1e-3, 0.0, 1, 1e6, 0.0, 10}), DomainError);
    CHECK_THROWS_AS(integrate(v, kP, s0, {1e-3, 1.0, -1, 1e6, 0.0, 10}), DomainError);
    CHECK_THROWS_AS(integrate(v, kP, s0, {1e-3, 1.0, 1, 1e6, 0.0, 0}), DomainError);
}

TEST_CASE("relaxation settles onto the lowest branch") {
    const HamiltonianVariant v = variant_of(HamiltonianKind::Squared);
    const BranchFunctions bf = branch_functions(kP, 0.3);
    // with step 1e-3 the discrete update freezes near |z - psi1| ~ 3e-13
    // (increment below half an ulp of z), so the settle gate sits above that
    const Trajectory traj =
        integrate(v, kP, {0.3, -bf.dpsi1_dx + 1e-5, bf.psi1 + 1e-10, 0.0},
                  {1e-3, 50.0, 0, 1e6, 1e-12, 10});
    CHECK(traj.stop == StopReason::Settled);
    CHECK(std::fabs(traj.states.back().z - bf.psi1) < 1e-11);
    CHECK(traj.states.back().t < 50.0);
}

TEST_CASE("runaway growth raises a blowup error") {
    const HamiltonianVariant v = variant_of(HamiltonianKind::Quadratic);
    const BranchFunctions bf = branch_functions(kP, 0.3);
    CHECK_THROWS_AS(integrate(v, kP, {0.3, -bf.dpsi2_dx, bf.psi2 + 0.5, 0.0},
                              {1e-3, 50.0, 0, 1e6, 0.0, 10}),
                    BlowupError);
}

TEST_CASE("region classification") {
    const BranchFunctions bf = branch_functions(kP, 0.3);
    CHECK(classify_region(kP, {0.3, 0.0, bf.psi2 - 0.1, 0.0}) == RegionLabel::D1Plus);
    CHECK(classify_region(kP, {0.3, 0.0, bf.psi2, 0.0}) == RegionLabel::D2Plus);
    CHECK(classify_region(kP, {0.3, 0.0, bf.psi2 + 0.2, 0.0}) == RegionLabel::D2Plus);
    const BranchFunctions bm = branch_functions(kP, -0.3);
    CHECK(classify_region(kP, {-0.3, 0.0, bm.psi2 - 0.1, 0.0}) == RegionLabel::D1Minus);
    CHECK(classify_region(kP, {-0.3, 0.0, bm.psi2 + 0.1, 0.0}) == RegionLabel::D2Minus);
    CHECK(classify_region(kP, {0.6, 0.0, -1.0, 0.0}) == RegionLabel::OffRegion);
    CHECK(classify_region(kP, {0.0, 0.0, -1.0, 0.0}) == RegionLabel::OffRegion);
    CHECK(classify_region(ModelParams::dimensionless(0.4), {0.1, 0.0, -1.0, 0.0}) ==
          RegionLabel::OffRegion);
}

TEST_CASE("certificates: values, rates, and admissible pairs") {
    const double x = 0.3;
    const BranchFunctions bf = branch_functions(kP, x);
    const ContactState d1{x, -bf.dpsi2_dx + 0.05, bf.psi2 - 0.2, 0.0};
    const ContactState d2{x, -bf.dpsi2_dx, bf.psi2 + 0.15, 0.0};

    SUBCASE("squared variant") {
        const HamiltonianVariant v = variant_of(HamiltonianKind::Squared, 1.3);
        const LyapunovData v1 = lyapunov(v, kP, RegionLabel::D1Plus, d1);
        const double u1 = d1.z - bf.psi1, u2 = d1.z - bf.psi2;
        CHECK(v1.value == doctest::Approx(0.5 * u1 * u1).epsilon(1e-14));
        CHECK(v1.rate == doctest::Approx(-1.3 * u1 * u1 * u2 * u2).epsilon(1e-14));
        CHECK(v1.rate <= 0.0);

        const LyapunovData v2 = lyapunov(v, kP, RegionLabel::D2Plus, d2);
        CHECK(v2.value == doctest::Approx(d2.z - bf.psi2).epsilon(1e-14));
        CHECK(v2.rate <= 0.0);

        CHECK_THROWS_AS(lyapunov(v, kP, RegionLabel::D1Plus, d2), RegionError);
        CHECK_THROWS_AS(lyapunov(v, kP, RegionLabel::D3Plus, d2), RegionError);
    }

    SUBCASE("cubic variant") {
        const HamiltonianVariant v = variant_of(HamiltonianKind::Cubic);
        CHECK(lyapunov(v, kP, RegionLabel::D1Plus, d1).rate <= 0.0);
        const ContactState d3{x, -bf.dpsi2_dx, bf.psi2 + 0.5 * (bf.psi3 - bf.psi2), 0.0};
        const LyapunovData v3 = lyapunov(v, kP, RegionLabel::D3Plus, d3);
        const double u3 = d3.z - bf.psi3;
        CHECK(v3.value == doctest::Approx(0.5 * u3 * u3).epsilon(1e-14));
        CHECK(v3.rate <= 0.0);
        CHECK_THROWS_AS(lyapunov(v, kP, RegionLabel::D2Plus, d2), RegionError);
    }

    SUBCASE("quadratic variant") {
        const HamiltonianVariant v = variant_of(HamiltonianKind::Quadratic);
        CHECK(lyapunov(v, kP, RegionLabel::D1Plus, d1).rate <= 0.0);
        CHECK_THROWS_AS(lyapunov(v, kP, RegionLabel::D2Plus, d2), RegionError);
        CHECK_THROWS_AS(lyapunov(v, kP, RegionLabel::D3Plus, d2), RegionError);
    }

    SUBCASE("off-region states are rejected") {
        const HamiltonianVariant v = variant_of(HamiltonianKind::Squared);
        CHECK_THROWS_AS(lyapunov(v, kP, RegionLabel::OffRegion, d1), RegionError);
        CHECK_THROWS_AS(lyapunov(v, kP, RegionLabel::D1Minus, d1), RegionError);
    }
}

TEST_CASE("certificate value decreases along the flow and matches its rate") {
    const HamiltonianVariant v = variant_of(HamiltonianKind::Squared);
    const double x = 0.3;
    const BranchFunctions bf = branch_functions(kP, x);
    const ContactState s0{x, -bf.dpsi2_dx, bf.psi2 - 0.15, 0.0};

    std::vector<double> values;
    std::vector<ContactState> states;
    integrate(v, kP, s0, {1e-3, 5.0, 0, 1e6, 0.0, 10}, [&](const ContactState& st) {
        const double u1 = st.z - bf.psi1;
        values.push_back(0.5 * u1 * u1);
        states.push_back(st);
    });
    REQUIRE(values.size() == 5000);
    for (std::size_t i = 1; i < values.size(); ++i)
        CHECK(values[i] <= values[i - 1] + 1e-12 * (1.0 + std::fabs(values[i - 1])));

    // analytic rate against a centered difference of the sampled values
    const std::size_t k = 2000;
    const double fd = (values[k + 1] - values[k - 1]) / (2e-3);
    const double rate = lyapunov(v, kP, RegionLabel::D1Plus, states[k]).rate;
    CHECK(rate == doctest::Approx(fd).epsilon(1e-6));
}
