#include <algorithm>
#include <cmath>

#include "contactflow/analysis.hpp"
#include "doctest.h"

using namespace contactflow;

namespace {
const ModelParams kP = ModelParams::dimensionless(1.0);
const HamiltonianVariant kSquared = make_variant(HamiltonianKind::Squared, {});
}  // namespace

TEST_CASE("attractor map relaxes D1 starts onto the lowest branch") {
    const AttractorMap map =
        attractor_map(kSquared, kP, {-0.3, -0.25, 0.25, 0.3}, {-0.2, -0.1});
    REQUIRE(map.limits.size() == 8);
    for (const auto& pt : map.limits) {
        REQUIRE(pt.ok());
        CHECK(pt.branch == 1);
        CHECK(pt.gap < 1e-6);
        // terminal y has the sign of x on the selected branch
        CHECK(pt.terminal_y * pt.x > 0.0);
    }
    // both offsets at one x start from the same reference: z0 - offset = psi2(x)
    CHECK(map.limits[0].z0 - map.limits[0].offset ==
          doctest::Approx(map.limits[1].z0 - map.limits[1].offset).epsilon(1e-14));
    CHECK(map.limits[0].y0 == map.limits[1].y0);
}

TEST_CASE("attractor map records failures per point") {
    const AttractorMap map = attractor_map(kSquared, kP, {0.3, 0.7}, {-0.1});
    REQUIRE(map.limits.size() == 2);
    CHECK(map.limits[0].ok());
    CHECK(!map.limits[1].ok());
    CHECK(map.limits[1].branch == 0);
    CHECK(!map.limits[1].error.empty());
}

TEST_CASE("attractor map rejects bad inputs") {
    CHECK_THROWS_AS(attractor_map(kSquared, kP, {}, {-0.1}), DomainError);
    CHECK_THROWS_AS(attractor_map(kSquared, kP, {0.3}, {}), DomainError);
    CHECK_THROWS_AS(
        attractor_map(kSquared, kP, {0.3}, {-0.1}, {1e-3, 600.0, 0, 1e6, 1e-13, 10}),
        DomainError);
}

TEST_CASE("terminal magnetization jumps across zero field") {
    const AttractorMap map =
        attractor_map(kSquared, kP, {-0.3, -0.25, 0.25, 0.3}, {-0.1});
    const double jump = jump_across_zero(map);
    CHECK(jump == doctest::Approx(1.9150080481545375).epsilon(1.5e-2));

    const AttractorMap one_sided = attractor_map(kSquared, kP, {0.25, 0.3}, {-0.1});
    CHECK_THROWS_AS(jump_across_zero(one_sided), DomainError);
}

TEST_CASE("hysteresis sweep jumps at the fold fields") {
    const SweepResult res = hysteresis_sweep(kP, -0.6, 0.6, 61);
    REQUIRE(res.path.size() == 122);
    REQUIRE(res.jump_xs.size() == 2);
    CHECK(std::fabs(res.jump_xs[0] - 0.54) < 1e-9);
    CHECK(std::fabs(res.jump_xs[1] + 0.54) < 1e-9);
    CHECK(res.loop_area > 0.5);
    CHECK(res.loop_area < 4.0);

    // the up and down legs coincide outside the fold window
    for (const auto& up : res.path) {
        if (up.direction != +1 || std::fabs(up.x) < 0.56) continue;
        for (const auto& down : res.path) {
            if (down.direction != -1) continue;
            if (down.x == up.x) CHECK(std::fabs(down.y - up.y) < 1e-8);
        }
    }

    // jump rows are flagged in the path as well
    int flagged = 0;
    for (const auto& pt : res.path) flagged += pt.jump ? 1 : 0;
    CHECK(flagged == 2);

    CHECK_THROWS_AS(hysteresis_sweep(ModelParams::dimensionless(0.4), -0.6, 0.6, 61),
                    PhaseError);
    CHECK_THROWS_AS(hysteresis_sweep(kP, 0.6, -0.6, 61), DomainError);
    CHECK_THROWS_AS(hysteresis_sweep(kP, -0.6, 0.6, 1), DomainError);
}

TEST_CASE("verification report passes for every variant") {
    for (HamiltonianKind kind :
         {HamiltonianKind::Squared, HamiltonianKind::Cubic, HamiltonianKind::Quadratic}) {
        const VerifyReport report = verify_theorems(kP, make_variant(kind, {}), 120);
        for (const auto& line : report.checks) {
            INFO(line.name, ": ", line.details);
            CHECK(line.pass);
        }
        CHECK(report.all_pass());

        auto has = [&](const char* name) {
            return std::any_of(report.checks.begin(), report.checks.end(),
                               [&](const CheckLine& c) { return c.name == name; });
        };
        CHECK(has("fixed-point-residual"));
        CHECK(has("basin-d1"));
        CHECK(has("lyapunov-monotone"));
        CHECK(has("linear-rate"));
        CHECK(has("linear-signs"));
        CHECK(has("basin-d2-small") == (kind == HamiltonianKind::Squared));
        CHECK(has("basin-d3") == (kind == HamiltonianKind::Cubic));
        CHECK(has("instability-exit") == (kind != HamiltonianKind::Squared));
    }
    CHECK_THROWS_AS(verify_theorems(ModelParams::dimensionless(0.4), kSquared, 120),
                    PhaseError);
    CHECK_THROWS_AS(verify_theorems(kP, kSquared, 5), DomainError);
}

TEST_CASE("saddle value and finite-size audit") {
    CHECK(saddle_free_energy(0.4, 1.0, 0.1) ==
          doctest::Approx(-1.7425680502015043).epsilon(1e-12));
    CHECK(saddle_free_energy(1.0, 1.0, 0.1) ==
          doctest::Approx(-1.1158783065098005).epsilon(1e-12));

    const auto rows = saddle_point_audit(0.4, 1.0, 0.1, {64, 256, 1024});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].gap == doctest::Approx(0.027888717898250249).epsilon(1e-10));
    CHECK(rows[1].gap == doctest::Approx(0.0071508530656209037).epsilon(1e-10));
    CHECK(rows[2].gap == doctest::Approx(0.0017987634489170126).epsilon(1e-10));
    CHECK(rows[0].gap > rows[1].gap);
    CHECK(rows[1].gap > rows[2].gap);

    const auto cold = saddle_point_audit(1.0, 1.0, 0.1, {64, 256, 1024});
    CHECK(cold[0].gap == doctest::Approx(0.0011641256704492605).epsilon(1e-10));
    CHECK(cold[2].gap == doctest::Approx(6.9713182743148044e-5).epsilon(1e-10));

    CHECK_THROWS_AS(saddle_point_audit(0.4, 1.0, 0.1, {}), DomainError);
}
