#include "contactflow/checks.hpp"

#include <cmath>
#include <vector>

#include "contactflow/analysis.hpp"
#include "contactflow/csv.hpp"
#include "contactflow/dynamics.hpp"
#include "contactflow/errors.hpp"
#include "contactflow/legendre.hpp"
#include "contactflow/model.hpp"

namespace contactflow {

namespace {

struct Suite {
    std::vector<CheckResult> results;

    void add(const std::string& name, bool pass, const std::string& details) {
        results.push_back({name, pass, details});
    }

    // Run one named check, converting any library error into a failure.
    template <typename Fn>
    void run(const std::string& name, Fn&& fn) {
        try {
            fn(*this, name);
        } catch (const Error& e) {
            add(name, false, std::string("raised: ") + e.what());
        }
    }
};

void check_model(Suite& s, CheckLevel level) {
    const int n_y = level == CheckLevel::Full ? 2001 : 201;

    s.run("model/self-consistency", [&](Suite& su, const std::string& name) {
        const ModelParams p = ModelParams::dimensionless(1.0);
        double worst = 0.0;
        for (double x : {-0.4, -0.1, 0.0, 0.1, 0.4}) {
            for (const auto& r : solve_branches(p, x))
                worst = std::max(worst, std::fabs(r.y - std::tanh(2.0 * p.j0bar * r.y + x)));
        }
        su.add(name, worst < 1e-12, "max residual = " + fmt17(worst));
    });

    s.run("model/root-count", [&](Suite& su, const std::string& name) {
        const ModelParams low = ModelParams::dimensionless(1.0);
        const ModelParams high = ModelParams::dimensionless(0.3);
        const double xsp = intervals(low).x_sp;
        bool ok = solve_branches(low, 0.3 * xsp).size() == 3 &&
                  solve_branches(low, 2.0 * xsp).size() == 1 &&
                  solve_branches(high, 0.2).size() == 1;
        su.add(name, ok, "three inside the fold window, one outside and at high temperature");
    });

    s.run("model/branch-order", [&](Suite& su, const std::string& name) {
        const ModelParams p = ModelParams::dimensionless(1.0);
        const auto roots = solve_branches(p, 0.1);
        bool ok = roots.size() == 3 && roots[0].z <= roots[1].z && roots[1].z <= roots[2].z &&
                  roots[0].stability == Stability::MostStable &&
                  roots[2].stability == Stability::Unstable;
        su.add(name, ok, "labels follow ascending z");
    });

    s.run("model/curve-inverts", [&](Suite& su, const std::string& name) {
        const ModelParams p = ModelParams::dimensionless(0.8);
        double worst = 0.0;
        for (double y : default_y_grid(n_y, 0.99)) {
            const double x = x_of_y(p, y);
            worst = std::max(worst, std::fabs(y - std::tanh(2.0 * p.j0bar * y + x)));
        }
        su.add(name, worst < 1e-12, "max residual = " + fmt17(worst));
    });

    s.run("model/spinodal-degeneracy", [&](Suite& su, const std::string& name) {
        const ModelParams p = ModelParams::dimensionless(1.0);
        const auto sp = spinodal_points(p);
        const double x_fold = x_of_y(p, sp->y_minus);
        const auto roots = solve_branches(p, x_fold);
        bool any_flag = false;
        for (const auto& r : roots) any_flag = any_flag || r.degenerate;
        su.add(name, any_flag, "fold point is reported as degenerate");
    });
}

void check_legendre(Suite& s, CheckLevel level) {
    const int n_y = level == CheckLevel::Full ? 4001 : 401;

    s.run("legendre/pointwise-residual", [&](Suite& su, const std::string& name) {
        double worst = 0.0;
        for (double j0bar : {0.6, 1.0, 1.7}) {
            const ModelParams p = ModelParams::dimensionless(j0bar);
            for (double y : default_y_grid(n_y, 0.995))
                worst = std::max(worst, std::fabs(contact_residual(p, y)));
        }
        su.add(name, worst < 1e-10, "max |dz/dy + y dx/dy| = " + fmt17(worst));
    });

    s.run("legendre/discrete-residual", [&](Suite& su, const std::string& name) {
        const ModelParams p = ModelParams::dimensionless(1.0);
        const double r1 = max_discrete_residual(sample_curve(p, default_y_grid(501, 0.9)));
        const double r2 = max_discrete_residual(sample_curve(p, default_y_grid(1001, 0.9)));
        const double order = std::log2(r1 / r2);
        su.add(name, order > 1.9, "halving h scales the residual by 2^" + fmt17(order));
    });

    s.run("legendre/split-prune", [&](Suite& su, const std::string& name) {
        const ModelParams p = ModelParams::dimensionless(1.0);
        const auto branches = split_branches(sample_curve(p, default_y_grid(n_y, 0.995)));
        std::size_t total = 0;
        bool roles_ok = true;
        for (const auto& b : branches) {
            total += b.points.size();
            for (std::size_t i = 1; i < b.points.size(); ++i)
                roles_ok = roles_ok && b.points[i - 1].x <= b.points[i].x;
        }
        const auto pruned = prune(branches, PruneMode::DropUnstable);
        bool no_unstable = true;
        for (const auto& b : pruned)
            no_unstable = no_unstable && b.role != Stability::Unstable;
        su.add(name, total > 0 && roles_ok && no_unstable,
               "branches sorted in x; pruning removes the unstable sheet");
    });

    s.run("legendre/fold-points", [&](Suite& su, const std::string& name) {
        const ModelParams p = ModelParams::dimensionless(1.0);
        const auto folds = xz_fold_points(sample_curve(p, default_y_grid(n_y, 0.995)));
        const auto sp = spinodal_points(p);
        bool ok = folds.size() == 2 && sp.has_value();
        double err = 1e300;
        if (ok)
            err = std::max(std::fabs(folds[0] - sp->y_minus), std::fabs(folds[1] - sp->y_plus));
        su.add(name, ok && err < 1e-9, "fold parameter error = " + fmt17(err));
    });

    s.run("legendre/toy-cusp", [&](Suite& su, const std::string& name) {
        double worst = 0.0;
        for (int i = 0; i <= 40; ++i) {
            const double x = -0.125 + 1e-6 + (2.0 + 0.125) * i / 40.0;
            worst = std::max(worst, std::fabs(toy_contact_residual(x, true)));
            worst = std::max(worst, std::fabs(toy_contact_residual(x, false)));
        }
        su.add(name, worst < 1e-9, "max residual on both sheets = " + fmt17(worst));
    });
}

void check_dynamics(Suite& s, CheckLevel level) {
    (void)level;  // relaxation horizons are cheap enough to keep fixed

    s.run("dynamics/contact-consistency", [&](Suite& su, const std::string& name) {
        // closed-form fields against the generic contact construction
        const ModelParams p = ModelParams::dimensionless(1.0);
        double worst = 0.0;
        for (HamiltonianKind kind :
             {HamiltonianKind::Squared, HamiltonianKind::Cubic, HamiltonianKind::Quadratic}) {
            const HamiltonianVariant variant = make_variant(kind, {1.0, 0.0});
            const ScalarField h = hamiltonian_field(variant, p);
            for (double x : {0.12, 0.31}) {
                for (double dz : {-0.1, 0.05}) {
                    const BranchFunctions bf = branch_functions(p, x);
                    const ContactState st{x, 0.2, bf.psi2 + dz, 0.0};
                    const VectorField3 a = vector_field(variant, p, st);
                    const VectorField3 b =
                        generic_vector_field(h, SignConvention::PlusYdx, st);
                    worst = std::max({worst, std::fabs(a.ydot - b.ydot),
                                      std::fabs(a.zdot - b.zdot), std::fabs(a.xdot - b.xdot)});
                }
            }
        }
        su.add(name, worst < 1e-9, "max field mismatch = " + fmt17(worst));
    });

    s.run("dynamics/x-frozen", [&](Suite& su, const std::string& name) {
        const ModelParams p = ModelParams::dimensionless(1.0);
        const HamiltonianVariant variant = make_variant(HamiltonianKind::Squared, {1.0, 0.0});
        const BranchFunctions bf = branch_functions(p, 0.2);
        const Trajectory traj =
            integrate(variant, p, {0.2, -bf.dpsi2_dx, bf.psi2 - 0.1, 0.0},
                      {1e-2, 10.0, 1, 1e6, 0.0, 10});
        bool ok = true;
        for (const auto& st : traj.states) ok = ok && st.x == 0.2;
        su.add(name, ok, "x is conserved exactly along the flow");
    });

    s.run("dynamics/relaxation", [&](Suite& su, const std::string& name) {
        const ModelParams p = ModelParams::dimensionless(1.0);
        const HamiltonianVariant variant = make_variant(HamiltonianKind::Cubic, {1.0, 0.0});
        const BranchFunctions bf = branch_functions(p, 0.2);
        // the upward rate p31*p32 is ~0.085 at x = 0.2, so t = 250 leaves
        // a wide margin under the 1e-8 gate
        const Trajectory down = integrate(variant, p, {0.2, -bf.dpsi2_dx, bf.psi2 - 0.1, 0.0},
                                          {1e-3, 250.0, 0, 1e6, 1e-13, 10});
        const Trajectory up = integrate(variant, p, {0.2, -bf.dpsi2_dx, bf.psi2 + 0.05, 0.0},
                                        {1e-3, 250.0, 0, 1e6, 1e-13, 10});
        const double g1 = std::fabs(down.states.back().z - bf.psi1);
        const double g3 = std::fabs(up.states.back().z - bf.psi3);
        su.add(name, g1 < 1e-8 && g3 < 1e-8,
               "terminal gaps " + fmt17(g1) + " and " + fmt17(g3));
    });

    s.run("dynamics/lyapunov-rate", [&](Suite& su, const std::string& name) {
        const ModelParams p = ModelParams::dimensionless(1.0);
        const HamiltonianVariant variant = make_variant(HamiltonianKind::Squared, {1.0, 0.0});
        const BranchFunctions bf = branch_functions(p, 0.3);
        const ContactState st{0.3, -bf.dpsi2_dx + 0.05, bf.psi2 - 0.2, 0.0};
        const LyapunovData ly = lyapunov(variant, p, RegionLabel::D1Plus, st);
        su.add(name, ly.value > 0.0 && ly.rate <= 0.0,
               "V = " + fmt17(ly.value) + ", dV/dt = " + fmt17(ly.rate));
    });
}

void check_analysis(Suite& s, CheckLevel level) {
    s.run("analysis/audit-shrinks", [&](Suite& su, const std::string& name) {
        const std::vector<long> sizes =
            level == CheckLevel::Full ? std::vector<long>{64, 256, 1024}
                                      : std::vector<long>{32, 128};
        const auto rows = saddle_point_audit(0.4, 1.0, 0.1, sizes);
        bool shrinking = true;
        for (std::size_t i = 1; i < rows.size(); ++i)
            shrinking = shrinking && rows[i].gap < rows[i - 1].gap;
        su.add(name, shrinking, "finite-size gap decreases with n");
    });

    s.run("analysis/sweep-loop", [&](Suite& su, const std::string& name) {
        const ModelParams p = ModelParams::dimensionless(1.0);
        const int n = level == CheckLevel::Full ? 61 : 31;
        const auto sweep = hysteresis_sweep(p, -0.6, 0.6, n);
        su.add(name, sweep.jump_xs.size() == 2 && sweep.loop_area > 0.0,
               "two jumps, loop area = " + fmt17(sweep.loop_area));
    });

    if (level == CheckLevel::Full) {
        s.run("analysis/verify-squared", [&](Suite& su, const std::string& name) {
            const ModelParams p = ModelParams::dimensionless(1.0);
            const auto report =
                verify_theorems(p, make_variant(HamiltonianKind::Squared, {1.0, 0.0}), 200);
            std::string failing;
            for (const auto& c : report.checks)
                if (!c.pass) failing += " " + c.name;
            su.add(name, report.all_pass(),
                   failing.empty() ? "all lines pass" : "failing:" + failing);
        });
    }
}

}  // namespace

std::vector<CheckResult> run_checks(CheckLevel level) {
    Suite suite;
    check_model(suite, level);
    check_legendre(suite, level);
    check_dynamics(suite, level);
    check_analysis(suite, level);
    return suite.results;
}

}  // namespace contactflow
