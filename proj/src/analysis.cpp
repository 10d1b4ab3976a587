#include "contactflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "contactflow/csv.hpp"
#include "contactflow/log.hpp"

namespace contactflow {

namespace {

constexpr double kAnalysisTmaxCap = 500.0;  // relaxations are capped here
constexpr double kJumpThreshold = 0.5;      // |dy| between sweep steps counted as a jump

void check_tmax_cap(const IntegrateOptions& opts) {
    if (opts.t_max > kAnalysisTmaxCap)
        throw DomainError("analysis relaxations cap t_max at 500");
}

int nearest_fixed_branch(const HamiltonianVariant& variant, const BranchFunctions& bf, double z,
                         double& gap) {
    int best = 1;
    gap = std::fabs(z - bf.psi1);
    const double g2 = std::fabs(z - bf.psi2);
    if (g2 < gap) {
        gap = g2;
        best = 2;
    }
    if (variant.kind == HamiltonianKind::Cubic) {
        const double g3 = std::fabs(z - bf.psi3);
        if (g3 < gap) {
            gap = g3;
            best = 3;
        }
    }
    return best;
}

// terminal y averaged over offsets, per successful grid point, one side
std::vector<std::pair<double, double>> side_means(const AttractorMap& map, bool positive) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t ix = 0; ix < map.x_grid.size(); ++ix) {
        const double x = map.x_grid[ix];
        if (positive ? (x <= 0.0) : (x >= 0.0)) continue;
        double sum = 0.0;
        int cnt = 0;
        for (std::size_t io = 0; io < map.offsets.size(); ++io) {
            const auto& pt = map.limits[ix * map.offsets.size() + io];
            if (pt.ok()) {
                sum += pt.terminal_y;
                ++cnt;
            }
        }
        if (cnt > 0) pts.emplace_back(x, sum / cnt);
    }
    return pts;
}

double extrapolate_to_zero(std::vector<std::pair<double, double>> pts, bool positive) {
    if (pts.size() < 2)
        throw DomainError("need two successful grid points per side of x=0 for the jump");
    std::sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
        return std::fabs(a.first) < std::fabs(b.first);
    });
    const auto [x1, y1] = pts[0];
    const auto [x2, y2] = pts[1];
    (void)positive;
    return y1 - x1 * (y2 - y1) / (x2 - x1);
}

CheckLine make_line(std::string name, bool pass, double margin, std::string details) {
    return {std::move(name), pass, margin, std::move(details)};
}

}  // namespace

AttractorMap attractor_map(const HamiltonianVariant& variant, const ModelParams& p,
                           const std::vector<double>& x_grid, const std::vector<double>& offsets,
                           const IntegrateOptions& opts) {
    if (x_grid.empty() || offsets.empty()) throw DomainError("attractor map needs nonempty grids");
    check_tmax_cap(opts);

    AttractorMap map;
    map.params = p;
    map.variant = variant;
    map.x_grid = x_grid;
    map.offsets = offsets;
    map.limits.reserve(x_grid.size() * offsets.size());

    for (double x : x_grid) {
        BranchFunctions bf;
        std::string setup_error;
        try {
            bf = branch_functions(p, x);
        } catch (const Error& e) {
            setup_error = e.what();
        }
        for (double off : offsets) {
            AttractorPoint pt;
            pt.x = x;
            pt.offset = off;
            if (!setup_error.empty()) {
                pt.error = setup_error;
                map.limits.push_back(std::move(pt));
                continue;
            }
            pt.z0 = bf.psi2 + off;
            pt.y0 = -bf.dpsi2_dx;
            try {
                IntegrateOptions run = opts;
                run.record_every = 0;
                const Trajectory traj =
                    integrate(variant, p, {x, pt.y0, pt.z0, 0.0}, run);
                const ContactState& fin = traj.states.back();
                pt.terminal_y = fin.y;
                pt.terminal_z = fin.z;
                pt.branch = nearest_fixed_branch(variant, bf, fin.z, pt.gap);
            } catch (const Error& e) {
                pt.error = e.what();
            }
            map.limits.push_back(std::move(pt));
        }
        logging::debug("attractor map column done at x=" + fmt17(x));
    }
    return map;
}

double jump_across_zero(const AttractorMap& map) {
    const double y_plus = extrapolate_to_zero(side_means(map, true), true);
    const double y_minus = extrapolate_to_zero(side_means(map, false), false);
    return y_plus - y_minus;
}

SweepResult hysteresis_sweep(const ModelParams& p, double x_min, double x_max, int n_steps,
                             const IntegrateOptions& opts, const HamiltonianVariant& variant) {
    if (classify_phase(p) != PhaseRegime::LowTemperature)
        throw PhaseError("hysteresis needs the low-temperature phase");
    if (!(x_min < x_max)) throw DomainError("x_min must be below x_max");
    if (n_steps < 2) throw DomainError("sweep needs at least 2 steps per leg");
    check_tmax_cap(opts);

    const BranchIntervals iv = intervals(p);
    IntegrateOptions run = opts;
    run.record_every = 0;

    SweepResult res;
    res.params = p;

    // One relaxation step: inside the fold window the flow decides; outside
    // it (or at the symmetric point x = 0) the equilibrium set does.
    auto relax = [&](double x, double y_prev, bool have_prev) -> std::pair<double, double> {
        if (have_prev && (iv.i_minus.contains(x) || iv.i_plus.contains(x))) {
            const double z0 = pseudo_free_energy(p, x, y_prev);
            const Trajectory traj = integrate(variant, p, {x, y_prev, z0, 0.0}, run);
            const ContactState& fin = traj.states.back();
            return {fin.y, fin.z};
        }
        const auto roots = solve_branches(p, x);
        if (!have_prev) return {roots[0].y, roots[0].z};  // start on the stable branch
        const auto nearest =
            std::min_element(roots.begin(), roots.end(), [&](const auto& a, const auto& b) {
                return std::fabs(a.y - y_prev) < std::fabs(b.y - y_prev);
            });
        return {nearest->y, nearest->z};
    };

    double y_prev = 0.0;
    bool have_prev = false;
    auto leg = [&](int direction) {
        for (int i = 0; i < n_steps; ++i) {
            const double frac = static_cast<double>(i) / static_cast<double>(n_steps - 1);
            const double x = (direction > 0) ? x_min + frac * (x_max - x_min)
                                             : x_max - frac * (x_max - x_min);
            const auto [y, z] = relax(x, y_prev, have_prev);
            SweepPoint pt{direction, x, y, z, false};
            if (have_prev && std::fabs(y - y_prev) > kJumpThreshold) {
                pt.jump = true;
                res.jump_xs.push_back(x);
                logging::info("sweep jump at x=" + fmt17(x));
            }
            res.path.push_back(pt);
            y_prev = y;
            have_prev = true;
        }
    };
    leg(+1);
    leg(-1);

    double signed_area = 0.0;
    for (std::size_t i = 0; i + 1 < res.path.size(); ++i)
        signed_area += 0.5 * (res.path[i].y + res.path[i + 1].y) *
                       (res.path[i + 1].x - res.path[i].x);
    // closing segment back to the start has dx == 0 by construction
    res.loop_area = std::fabs(signed_area);
    return res;
}

bool VerifyReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

VerifyReport verify_theorems(const ModelParams& p, const HamiltonianVariant& variant, int budget) {
    if (budget < 20) throw DomainError("verification budget too small to be meaningful");
    const BranchIntervals iv = intervals(p);  // PhaseError outside the low-temperature phase
    const double xsp = iv.x_sp;

    VerifyReport report;
    const bool squared = variant.kind == HamiltonianKind::Squared;
    const bool cubic = variant.kind == HamiltonianKind::Cubic;

    // --- fixed points of the flow sit on the branches ---
    {
        double worst = 0.0;
        for (double frac : {0.3, 0.5, 0.7}) {
            for (double side : {1.0, -1.0}) {
                const double x = side * frac * xsp;
                const auto roots = solve_branches(p, x);
                const BranchFunctions bf = branch_functions(p, x);
                const int mus = cubic ? 3 : 2;
                for (int mu = 1; mu <= mus; ++mu) {
                    const auto& r = roots[static_cast<std::size_t>(mu - 1)];
                    const VectorField3 v = vector_field(variant, bf, {x, r.y, r.z, 0.0});
                    worst = std::max(worst, std::fabs(v.ydot));
                    worst = std::max(worst, std::fabs(v.zdot));
                }
            }
        }
        report.checks.push_back(make_line("fixed-point-residual", worst < 1e-10, 1e-10 - worst,
                                          "max |field| on branches = " + fmt17(worst)));
    }

    // --- basin dichotomy with exponential-rate initializations ---
    const double t_relax = 400.0;
    IntegrateOptions run{1e-3, t_relax, 0, 1e6, 1e-13, 10};
    const int n_x = std::clamp(budget / 40, 3, 10);

    auto relax_gap = [&](double x, double z0, double target_z) {
        const BranchFunctions bf = branch_functions(p, x);
        const Trajectory traj = integrate(variant, p, {x, -bf.dpsi2_dx, z0, 0.0}, run);
        return std::fabs(traj.states.back().z - target_z);
    };

    {
        // D1: every variant sends z below psi2 to psi1, both interval sides.
        double worst = 0.0;
        int count = 0;
        const double lo_frac = 0.3;
        const double hi_frac = cubic ? 0.6 : 0.85;
        for (int i = 0; i < n_x; ++i) {
            const double frac =
                lo_frac + (hi_frac - lo_frac) * static_cast<double>(i) /
                              static_cast<double>(std::max(1, n_x - 1));
            for (double side : {1.0, -1.0}) {
                const double x = side * frac * xsp;
                const BranchFunctions bf = branch_functions(p, x);
                for (double off : {-0.02, -0.08, -0.2}) {
                    worst = std::max(worst, relax_gap(x, bf.psi2 + off, bf.psi1));
                    ++count;
                }
            }
        }
        report.checks.push_back(make_line(
            "basin-d1", worst < 1e-6, 1e-6 - worst,
            std::to_string(count) + " relaxations, max terminal gap = " + fmt17(worst)));
    }

    if (squared) {
        // D2 attracts to psi2.  The approach is algebraic (double zero of
        // h), so amplitude-scale runs are checked against the 1/(w p21 t)
        // envelope and tolerance-scale runs against the absolute gate.
        double worst_small = 0.0, worst_envelope = -1e300;
        for (int i = 0; i < n_x; ++i) {
            const double frac = 0.3 + 0.55 * static_cast<double>(i) /
                                          static_cast<double>(std::max(1, n_x - 1));
            for (double side : {1.0, -1.0}) {
                const double x = side * frac * xsp;
                const BranchFunctions bf = branch_functions(p, x);
                for (double off : {1e-7, 5e-7, 9e-7})
                    worst_small = std::max(worst_small, relax_gap(x, bf.psi2 + off, bf.psi2));
                const double gap = relax_gap(x, bf.psi2 + 0.1, bf.psi2);
                const double envelope =
                    1.2 / (variant.psi0.value(x) * (bf.psi2 - bf.psi1) * t_relax);
                worst_envelope = std::max(worst_envelope, gap - envelope);
            }
        }
        report.checks.push_back(make_line("basin-d2-small", worst_small < 1e-6,
                                          1e-6 - worst_small,
                                          "max terminal gap = " + fmt17(worst_small)));
        report.checks.push_back(
            make_line("basin-d2-envelope", worst_envelope < 0.0, -worst_envelope,
                      "worst gap-minus-envelope = " + fmt17(worst_envelope)));
    }

    if (cubic) {
        // D3+ attracts to psi3; offsets scale with the psi3-psi2 gap.
        double worst = 0.0;
        for (int i = 0; i < n_x; ++i) {
            const double frac = 0.3 + 0.3 * static_cast<double>(i) /
                                          static_cast<double>(std::max(1, n_x - 1));
            const double x = frac * xsp;
            const BranchFunctions bf = branch_functions(p, x);
            const double p32 = bf.psi3 - bf.psi2;
            for (double delta : {0.3, 0.8, 1.5})
                worst = std::max(worst, relax_gap(x, bf.psi3 + (delta - 1.0) * p32, bf.psi3));
        }
        report.checks.push_back(make_line("basin-d3", worst < 1e-6, 1e-6 - worst,
                                          "max terminal gap = " + fmt17(worst)));
    }

    // --- certificates decrease along the flow ---
    {
        const double x = 0.45 * xsp;
        const BranchFunctions bf = branch_functions(p, x);
        struct Probe {
            RegionLabel region;
            double z0;
            bool enabled;
        };
        const std::vector<Probe> probes = {
            {RegionLabel::D1Plus, bf.psi2 - 0.15, true},
            {RegionLabel::D2Plus, bf.psi2 + 0.15, squared},
            {RegionLabel::D3Plus, bf.psi2 + 0.5 * (bf.psi3 - bf.psi2), cubic},
        };
        double worst_increase = -1e300;
        double worst_rate = -1e300;
        bool wired = true;
        for (const auto& probe : probes) {
            if (!probe.enabled) continue;
            const ContactState s0{x, -bf.dpsi2_dx, probe.z0, 0.0};
            const LyapunovData first = lyapunov(variant, p, probe.region, s0);
            double prev_v = first.value;
            if (!std::isfinite(first.value)) wired = false;
            IntegrateOptions scan = run;
            scan.t_max = 50.0;
            long tick = 0;
            integrate(variant, p, s0, scan, [&](const ContactState& st) {
                if (++tick % 50 != 0) return;
                const LyapunovData ly = lyapunov(variant, p, probe.region, st);
                const double tol = 1e-12 * (1.0 + std::fabs(ly.value));
                worst_increase = std::max(worst_increase, ly.value - prev_v - tol);
                worst_rate = std::max(worst_rate, ly.rate);
                prev_v = ly.value;
            });
        }
        report.checks.push_back(
            make_line("lyapunov-monotone", wired && worst_increase <= 0.0, -worst_increase,
                      "worst tolerance-adjusted increase = " + fmt17(worst_increase) +
                          ", max analytic rate = " + fmt17(worst_rate)));
    }

    // --- linear rates: exponential decay matches c for stable branches ---
    {
        const double x = 0.5 * xsp;
        const BranchFunctions bf = branch_functions(p, x);
        double worst_rel = 0.0;
        auto fit_decay = [&](int mu, double z_target, double sign) {
            const LinearCoeffs lc = linearized_coefficients(variant, p, x, mu);
            if (!(lc.c > 0.0)) return;  // skip the parabolic squared mu=2
            const double eps = 1e-5;
            const double t1 = 0.5 / lc.c, t2 = 1.5 / lc.c;
            const ContactState s0{x, -bf.dpsi2_dx, z_target + sign * eps, 0.0};
            IntegrateOptions fit{1e-3, t2, 0, 1e6, 0.0, 10};  // settle off: need exact horizon
            double g1 = 0.0;
            long tick = 0;
            const long n1 = std::llround(t1 / fit.step);
            const Trajectory traj = integrate(variant, p, s0, fit, [&](const ContactState& st) {
                if (++tick == n1) g1 = std::fabs(st.z - z_target);
            });
            const double g2 = std::fabs(traj.states.back().z - z_target);
            if (g1 <= 0.0 || g2 <= 0.0) {
                worst_rel = std::max(worst_rel, 1.0);
                return;
            }
            const double measured = std::log(g1 / g2) / (t2 - t1);
            worst_rel = std::max(worst_rel, std::fabs(measured - lc.c) / lc.c);
        };
        fit_decay(1, bf.psi1, -1.0);
        if (cubic) fit_decay(3, bf.psi3, +1.0);
        if (variant.kind == HamiltonianKind::Quadratic) fit_decay(1, bf.psi1, +1.0);
        report.checks.push_back(make_line("linear-rate", worst_rel < 0.05, 0.05 - worst_rel,
                                          "worst relative rate error = " + fmt17(worst_rel)));
    }

    // --- sign table of the linearization ---
    {
        const double x = 0.5 * xsp;
        bool ok = true;
        std::string detail;
        const LinearCoeffs c1 = linearized_coefficients(variant, p, x, 1);
        ok = ok && c1.c > 0.0;
        detail += "c1=" + fmt17(c1.c);
        const LinearCoeffs c2 = linearized_coefficients(variant, p, x, 2);
        detail += " c2=" + fmt17(c2.c);
        if (squared) ok = ok && c2.c == 0.0;
        else ok = ok && c2.c < 0.0;
        if (cubic) {
            const LinearCoeffs c3 = linearized_coefficients(variant, p, x, 3);
            detail += " c3=" + fmt17(c3.c);
            ok = ok && c3.c > 0.0;
        }
        report.checks.push_back(make_line("linear-signs", ok, 0.0, detail));
    }

    // --- the middle branch repels when the variant says so ---
    if (!squared) {
        const double x = 0.5 * xsp;
        const BranchFunctions bf = branch_functions(p, x);
        const LinearCoeffs lc = linearized_coefficients(variant, p, x, 2);
        const double grow = -lc.c;  // positive
        const double eps = 1e-6;
        const double t_exit = 1.2 * std::log(2e4) / grow;
        IntegrateOptions grow_run{1e-3, std::min(t_exit, kAnalysisTmaxCap), 0, 1e6, 0.0, 10};
        double prev_gap = eps;
        bool monotone = true;
        bool exited = false;
        double g_fit_start = -1.0, t_fit_start = 0.0, g_fit_end = -1.0, t_fit_end = 0.0;
        integrate(variant, p, {x, -bf.dpsi2_dx, bf.psi2 + eps, 0.0}, grow_run,
                  [&](const ContactState& st) {
                      if (exited) return;
                      const double gap = std::fabs(st.z - bf.psi2);
                      if (gap + 1e-12 * (1.0 + gap) < prev_gap) monotone = false;
                      prev_gap = gap;
                      if (g_fit_start < 0.0 && gap >= 2e-6) {
                          g_fit_start = gap;
                          t_fit_start = st.t;
                      }
                      if (g_fit_end < 0.0 && gap >= 1e-4) {
                          g_fit_end = gap;
                          t_fit_end = st.t;
                      }
                      if (gap > 1e-2) exited = true;
                  });
        double rate_err = 1.0;
        if (g_fit_start > 0.0 && g_fit_end > 0.0 && t_fit_end > t_fit_start) {
            const double measured = std::log(g_fit_end / g_fit_start) / (t_fit_end - t_fit_start);
            rate_err = std::fabs(measured - grow) / grow;
        }
        report.checks.push_back(make_line(
            "instability-exit", monotone && exited && rate_err < 0.05,
            exited ? 0.05 - rate_err : -1.0,
            "monotone=" + std::to_string(monotone) + " exited=" + std::to_string(exited) +
                " growth-rate rel err=" + fmt17(rate_err)));
    }

    return report;
}

double saddle_free_energy(double beta, double j0, double field) {
    const DimensionlessInput in = to_dimensionless({beta, j0, field});
    const auto roots = solve_branches(in.params, in.x);
    return roots.front().z / beta;
}

std::vector<AuditRow> saddle_point_audit(double beta, double j0, double field,
                                         const std::vector<long>& n_list) {
    if (n_list.empty()) throw DomainError("audit needs at least one system size");
    const double saddle = saddle_free_energy(beta, j0, field);
    std::vector<AuditRow> rows;
    rows.reserve(n_list.size());
    for (long n : n_list) {
        AuditRow row;
        row.n = n;
        row.exact_f = exact_free_energy_per_spin(n, beta, j0, field);
        row.saddle_f = saddle;
        row.gap = std::fabs(row.exact_f - row.saddle_f);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace contactflow
