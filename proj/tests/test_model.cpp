#include <cmath>
#include <vector>

#include "contactflow/model.hpp"
#include "doctest.h"

using namespace contactflow;

namespace {

// reference values computed independently at 60-digit precision
constexpr double kYSp = 0.70710678118654752;
constexpr double kXSp = 0.53283997535355202;
constexpr double kY1atX01 = 0.96625370939326957;
constexpr double kY2atX01 = -0.94596358242450811;
constexpr double kY3atX01 = -0.10033878149041745;
constexpr double kZ1atX01 = -1.1158783065098005;
constexpr double kZ2atX01 = -0.92446997661441975;
constexpr double kZ3atX01 = -0.68813875690944877;
constexpr double kYPairAtX0 = 0.95750402407726874;

double central_diff(double (*f)(const ModelParams&, double, double), const ModelParams& p,
                    double x, double y, bool wrt_x) {
    const double h = 1e-6;
    if (wrt_x) return (f(p, x + h, y) - f(p, x - h, y)) / (2.0 * h);
    return (f(p, x, y + h) - f(p, x, y - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("parameter factories validate input") {
    CHECK(ModelParams::dimensionless(1.0).j0bar == 1.0);
    CHECK(ModelParams::from_raw(0.5, 2.0).j0bar == 1.0);
    CHECK_THROWS_AS(ModelParams::dimensionless(0.0), DomainError);
    CHECK_THROWS_AS(ModelParams::dimensionless(-1.0), DomainError);
    CHECK_THROWS_AS(ModelParams::dimensionless(std::nan("")), DomainError);
    CHECK_THROWS_AS(ModelParams::from_raw(0.0, 1.0), DomainError);

    const DimensionlessInput in = to_dimensionless({0.4, 1.0, 0.1});
    CHECK(in.params.j0bar == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(in.x == doctest::Approx(0.04).epsilon(1e-15));
}

TEST_CASE("pseudo free energy matches reference values") {
    const ModelParams p = ModelParams::dimensionless(1.0);
    CHECK(pseudo_free_energy(p, 0.0, 0.0) ==
          doctest::Approx(-0.69314718055994531).epsilon(1e-15));
    CHECK(pseudo_free_energy(p, 0.1, kY1atX01) == doctest::Approx(kZ1atX01).epsilon(1e-15));

    // stable for large arguments where cosh overflows naively
    const double big = pseudo_free_energy(p, 600.0, 0.9);
    CHECK(std::isfinite(big));
    CHECK(big == doctest::Approx(0.81 - 601.8).epsilon(1e-12));
}

TEST_CASE("analytic derivatives agree with finite differences") {
    const ModelParams p = ModelParams::dimensionless(1.3);
    const double x = 0.2, y = 0.4;
    CHECK(dpsi_dx(p, x, y) ==
          doctest::Approx(central_diff(pseudo_free_energy, p, x, y, true)).epsilon(1e-9));
    CHECK(dpsi_dy(p, x, y) ==
          doctest::Approx(central_diff(pseudo_free_energy, p, x, y, false)).epsilon(1e-9));
    CHECK(d2psi_dx2(p, x, y) ==
          doctest::Approx(central_diff(dpsi_dx, p, x, y, true)).epsilon(1e-8));
    CHECK(d2psi_dy2(p, x, y) ==
          doctest::Approx(central_diff(dpsi_dy, p, x, y, false)).epsilon(1e-8));
}

TEST_CASE("x_of_y inverts the self-consistency relation") {
    const ModelParams p = ModelParams::dimensionless(1.0);
    CHECK(x_of_y(p, 0.5) == doctest::Approx(-0.45069385566594515).epsilon(1e-15));
    for (double y : {-0.95, -0.4, 0.0, 0.3, 0.99}) {
        const double x = x_of_y(p, y);
        CHECK(std::fabs(y - std::tanh(2.0 * p.j0bar * y + x)) < 1e-15);
    }
    const double h = 1e-7;
    CHECK(dx_dy(p, 0.4) ==
          doctest::Approx((x_of_y(p, 0.4 + h) - x_of_y(p, 0.4 - h)) / (2.0 * h)).epsilon(1e-7));
    CHECK_THROWS_AS(x_of_y(p, 1.0), DomainError);
    CHECK_THROWS_AS(x_of_y(p, -1.5), DomainError);
}

TEST_CASE("phase classification with a critical band") {
    CHECK(classify_phase(ModelParams::dimensionless(0.3)) == PhaseRegime::HighTemperature);
    CHECK(classify_phase(ModelParams::dimensionless(1.0)) == PhaseRegime::LowTemperature);
    CHECK(classify_phase(ModelParams::dimensionless(0.5)) == PhaseRegime::Critical);
    CHECK(classify_phase(ModelParams::dimensionless(0.5 + 4e-13)) == PhaseRegime::Critical);
    CHECK(classify_phase(ModelParams::dimensionless(0.5 + 1e-6)) ==
          PhaseRegime::LowTemperature);
    CHECK(classify_phase(ModelParams::dimensionless(0.5 - 1e-6)) ==
          PhaseRegime::HighTemperature);
}

TEST_CASE("spinodal points exist only below the critical temperature") {
    const auto sp = spinodal_points(ModelParams::dimensionless(1.0));
    REQUIRE(sp.has_value());
    CHECK(sp->y_plus == doctest::Approx(kYSp).epsilon(1e-15));
    CHECK(sp->y_minus == doctest::Approx(-kYSp).epsilon(1e-15));
    CHECK(std::fabs(dx_dy(ModelParams::dimensionless(1.0), sp->y_plus)) < 1e-12);
    CHECK(!spinodal_points(ModelParams::dimensionless(0.4)).has_value());
}

TEST_CASE("branch roots match the reference solver") {
    const ModelParams p = ModelParams::dimensionless(1.0);

    SUBCASE("three roots inside the fold window, ordered by z") {
        const auto roots = solve_branches(p, 0.1);
        REQUIRE(roots.size() == 3);
        CHECK(roots[0].mu == 1);
        CHECK(roots[0].y == doctest::Approx(kY1atX01).epsilon(1e-12));
        CHECK(roots[0].z == doctest::Approx(kZ1atX01).epsilon(1e-12));
        CHECK(roots[0].stability == Stability::MostStable);
        CHECK(roots[1].y == doctest::Approx(kY2atX01).epsilon(1e-12));
        CHECK(roots[1].z == doctest::Approx(kZ2atX01).epsilon(1e-12));
        CHECK(roots[1].stability == Stability::Metastable);
        CHECK(roots[2].y == doctest::Approx(kY3atX01).epsilon(1e-12));
        CHECK(roots[2].z == doctest::Approx(kZ3atX01).epsilon(1e-12));
        CHECK(roots[2].stability == Stability::Unstable);
        for (const auto& r : roots) CHECK(!r.degenerate);
    }

    SUBCASE("symmetric pair at zero field") {
        const auto roots = solve_branches(p, 0.0);
        REQUIRE(roots.size() == 3);
        CHECK(std::fabs(roots[2].y) < 1e-12);
        CHECK(std::fabs(std::fabs(roots[0].y) - kYPairAtX0) < 1e-12);
        CHECK(std::fabs(std::fabs(roots[1].y) - kYPairAtX0) < 1e-12);
        CHECK(roots[0].y == doctest::Approx(-roots[1].y).epsilon(1e-12));
    }

    SUBCASE("one root outside the window and at high temperature") {
        CHECK(solve_branches(p, 0.6).size() == 1);
        CHECK(solve_branches(p, -2.0).size() == 1);
        CHECK(solve_branches(ModelParams::dimensionless(0.4), 0.1).size() == 1);
    }

    SUBCASE("fold point is degenerate") {
        const auto sp = spinodal_points(p);
        const auto roots = solve_branches(p, x_of_y(p, sp->y_minus));
        bool any = false;
        for (const auto& r : roots) any = any || r.degenerate;
        CHECK(any);
        CHECK(roots.size() >= 2);
    }
}

TEST_CASE("small-y approximation near zero field") {
    const ModelParams p = ModelParams::dimensionless(0.3);
    const double x = 1e-4;
    const double approx = small_y_approx(p, x);
    CHECK(approx == doctest::Approx(x / 0.4).epsilon(1e-15));
    const auto roots = solve_branches(p, x);
    REQUIRE(roots.size() == 1);
    CHECK(std::fabs(roots[0].y - approx) < 1e-9);
    CHECK_THROWS_AS(small_y_approx(ModelParams::dimensionless(0.5), x), DomainError);
}

TEST_CASE("exact finite-size free energy per spin") {
    CHECK(exact_free_energy_per_spin(1, 1.0, 1.0, 0.0) ==
          doctest::Approx(-1.6931471805599453).epsilon(1e-14));
    CHECK(exact_free_energy_per_spin(2, 1.0, 1.0, 0.0) ==
          doctest::Approx(-1.4100375958014589).epsilon(1e-14));
    CHECK(exact_free_energy_per_spin(64, 0.4, 1.0, 0.1) ==
          doctest::Approx(-1.7704567680997545).epsilon(1e-13));
    CHECK(exact_free_energy_per_spin(1024, 0.4, 1.0, 0.1) ==
          doctest::Approx(-1.7443668136504213).epsilon(1e-13));
    CHECK(exact_free_energy_per_spin(256, 1.0, 1.0, 0.1) ==
          doctest::Approx(-1.1161594947597633).epsilon(1e-13));
    CHECK_THROWS_AS(exact_free_energy_per_spin(0, 1.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(exact_free_energy_per_spin(2000000, 1.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(exact_free_energy_per_spin(10, -1.0, 1.0, 0.0), DomainError);
}
