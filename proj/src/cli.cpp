#include "contactflow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "contactflow/analysis.hpp"
#include "contactflow/checks.hpp"
#include "contactflow/csv.hpp"
#include "contactflow/dynamics.hpp"
#include "contactflow/errors.hpp"
#include "contactflow/legendre.hpp"
#include "contactflow/log.hpp"
#include "contactflow/model.hpp"
#include "contactflow/svg.hpp"

namespace contactflow::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(const std::string& tok) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw UsageError("not a number: '" + tok + "'");
    }
    if (pos != tok.size()) throw UsageError("not a number: '" + tok + "'");
    return v;
}

// Grid spec: comma-separated tokens, each a number or lo:hi:n (inclusive).
std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> grid;
    for (const auto& tok : split(spec, ',')) {
        const auto parts = split(tok, ':');
        if (parts.size() == 1) {
            grid.push_back(parse_double(parts[0]));
        } else if (parts.size() == 3) {
            const double lo = parse_double(parts[0]);
            const double hi = parse_double(parts[1]);
            const double nf = parse_double(parts[2]);
            const long n = std::lround(nf);
            if (n < 1 || nf != static_cast<double>(n))
                throw UsageError("grid count must be a positive integer: '" + tok + "'");
            if (n == 1) {
                grid.push_back(lo);
            } else {
                for (long i = 0; i < n; ++i)
                    grid.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                            static_cast<double>(n - 1));
            }
        } else {
            throw UsageError("grid token must be a number or lo:hi:n: '" + tok + "'");
        }
    }
    if (grid.empty()) throw UsageError("empty grid spec");
    return grid;
}

std::vector<long> parse_sizes(const std::string& spec) {
    std::vector<long> sizes;
    for (const auto& tok : split(spec, ',')) {
        const double v = parse_double(tok);
        const long n = std::lround(v);
        if (n < 1 || v != static_cast<double>(n))
            throw UsageError("size must be a positive integer: '" + tok + "'");
        sizes.push_back(n);
    }
    if (sizes.empty()) throw UsageError("empty size list");
    return sizes;
}

class Output {
  public:
    Output(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            os_ = &fallback;
            return;
        }
        file_.open(path, std::ios::binary);
        if (!file_) throw UsageError("cannot open output file: " + path);
        os_ = &file_;
    }
    std::ostream& stream() { return *os_; }

  private:
    std::ofstream file_;
    std::ostream* os_ = nullptr;
};

const char* stability_name(Stability s) {
    switch (s) {
        case Stability::MostStable: return "most_stable";
        case Stability::Metastable: return "metastable";
        case Stability::Unstable: return "unstable";
    }
    return "?";
}

const char* region_name(RegionLabel r) {
    switch (r) {
        case RegionLabel::D1Plus: return "D1+";
        case RegionLabel::D2Plus: return "D2+";
        case RegionLabel::D1Minus: return "D1-";
        case RegionLabel::D2Minus: return "D2-";
        case RegionLabel::D3Plus: return "D3+";
        case RegionLabel::OffRegion: return "off";
    }
    return "?";
}

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

// Region whose certificate applies for this variant, if any.
std::optional<RegionLabel> certificate_region(HamiltonianKind kind, RegionLabel geo) {
    switch (geo) {
        case RegionLabel::D1Plus:
        case RegionLabel::D1Minus:
            return geo;
        case RegionLabel::D2Plus:
            if (kind == HamiltonianKind::Squared) return geo;
            if (kind == HamiltonianKind::Cubic) return RegionLabel::D3Plus;
            return std::nullopt;
        case RegionLabel::D2Minus:
            if (kind == HamiltonianKind::Squared) return geo;
            return std::nullopt;
        default:
            return std::nullopt;
    }
}

struct ModelOpts {
    double j0bar = 1.0, x = 0.0, beta = 1.0, j0 = 1.0, field = 0.0;
    CLI::Option* o_j0bar = nullptr;
    CLI::Option* o_x = nullptr;
    CLI::Option* o_beta = nullptr;
    CLI::Option* o_j0 = nullptr;
    CLI::Option* o_field = nullptr;

    void attach(CLI::App* cmd, bool with_x) {
        o_j0bar = cmd->add_option("--j0bar", j0bar, "dimensionless coupling beta*J0");
        if (with_x) o_x = cmd->add_option("--x", x, "dimensionless field beta*H");
        o_beta = cmd->add_option("--beta", beta, "inverse temperature (raw triple)");
        o_j0 = cmd->add_option("--j0", j0, "coupling constant (raw triple)");
        o_field = cmd->add_option("--field", field, "external field (raw triple)");
    }

    DimensionlessInput resolve() const {
        const bool raw = o_beta->count() || o_j0->count() || o_field->count();
        const bool bar = o_j0bar->count() || (o_x && o_x->count());
        if (raw && bar) throw UsageError("--beta/--j0/--field conflict with --j0bar/--x");
        if (raw) {
            if (!o_beta->count() || !o_j0->count())
                throw UsageError("raw input needs both --beta and --j0");
            return to_dimensionless({beta, j0, field});
        }
        return {ModelParams::dimensionless(j0bar), x};
    }
};

struct VariantOpts {
    std::string kind = "squared";
    double c = 1.0, a = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--variant", kind, "flow family")
            ->check(CLI::IsMember({"squared", "cubic", "quadratic"}));
        cmd->add_option("--psi0-c", c, "prefactor scale (> 0)");
        cmd->add_option("--psi0-a", a, "prefactor exponent in c*exp(a*x)");
    }

    HamiltonianVariant resolve() const {
        HamiltonianKind k = HamiltonianKind::Squared;
        if (kind == "cubic") k = HamiltonianKind::Cubic;
        if (kind == "quadratic") k = HamiltonianKind::Quadratic;
        return make_variant(k, {c, a});
    }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    logging::reset_from_env();

    CLI::App app{"mean-field equilibrium branches, their contact-geometric lift, and"
                 " relaxation flows between them",
                 "contactflow"};
    app.require_subcommand(1);

    std::string out_path;

    // --- branches ---
    auto* cmd_branches = app.add_subcommand("branches", "equilibrium roots at one field value");
    ModelOpts m_branches;
    m_branches.attach(cmd_branches, true);
    cmd_branches->add_option("--out", out_path, "output file (default stdout)");

    // --- curve ---
    auto* cmd_curve = app.add_subcommand("curve", "sampled equilibrium curve, optionally split");
    ModelOpts m_curve;
    m_curve.attach(cmd_curve, false);
    int curve_n = 2001;
    double curve_span = 0.999;
    std::string curve_grid, curve_conv = "plus", curve_prune = "none";
    bool curve_split = false;
    cmd_curve->add_option("--n", curve_n, "number of samples")->check(CLI::PositiveNumber);
    cmd_curve->add_option("--span", curve_span, "grid is uniform on [-span, span]");
    cmd_curve->add_option("--y-grid", curve_grid, "explicit grid spec (overrides --n/--span)");
    cmd_curve->add_option("--convention", curve_conv, "one-form sign")
        ->check(CLI::IsMember({"plus", "minus"}));
    cmd_curve->add_flag("--split", curve_split, "split at the fold parameters");
    cmd_curve->add_option("--prune", curve_prune, "drop branches by role")
        ->check(CLI::IsMember({"none", "unstable", "unstable+metastable"}));
    cmd_curve->add_option("--out", out_path, "output file (default stdout)");

    // --- project ---
    auto* cmd_project = app.add_subcommand("project", "project a curve file onto a plane");
    std::string proj_in, proj_plane = "xz";
    bool proj_svg = false;
    double proj_w = 800.0, proj_h = 600.0;
    cmd_project->add_option("--in", proj_in, "curve CSV produced by the curve subcommand")
        ->required();
    cmd_project->add_option("--plane", proj_plane, "projection plane")
        ->check(CLI::IsMember({"xz", "xy", "yz"}));
    cmd_project->add_flag("--svg", proj_svg, "emit SVG instead of CSV");
    cmd_project->add_option("--width", proj_w, "SVG width");
    cmd_project->add_option("--height", proj_h, "SVG height");
    cmd_project->add_option("--out", out_path, "output file (default stdout)");

    // --- flow ---
    auto* cmd_flow = app.add_subcommand("flow", "integrate one relaxation trajectory");
    ModelOpts m_flow;
    m_flow.attach(cmd_flow, true);
    VariantOpts v_flow;
    v_flow.attach(cmd_flow);
    double flow_y0 = 0.0, flow_z0 = 0.0, flow_offset = 0.0;
    double flow_step = 1e-3, flow_tmax = 50.0;
    int flow_record = 10;
    auto* o_flow_y0 = cmd_flow->add_option("--y0", flow_y0, "initial y (default: branch slope)");
    auto* o_flow_z0 = cmd_flow->add_option("--z0", flow_z0, "initial z (default: psi2 + offset)");
    cmd_flow->add_option("--offset", flow_offset, "initial z offset from psi2");
    cmd_flow->add_option("--step", flow_step, "RK4 step")->check(CLI::PositiveNumber);
    cmd_flow->add_option("--t-max", flow_tmax, "time horizon")->check(CLI::PositiveNumber);
    cmd_flow->add_option("--record-every", flow_record, "record every k-th step (0: endpoints)")
        ->check(CLI::NonNegativeNumber);
    cmd_flow->add_option("--out", out_path, "output file (default stdout)");

    // --- sweep ---
    auto* cmd_sweep = app.add_subcommand("sweep", "quasi-static field sweep up and back");
    ModelOpts m_sweep;
    m_sweep.attach(cmd_sweep, false);
    VariantOpts v_sweep;
    v_sweep.attach(cmd_sweep);
    double sweep_xmin = -0.6, sweep_xmax = 0.6, sweep_step = 1e-2, sweep_tmax = 50.0;
    int sweep_steps = 121;
    cmd_sweep->add_option("--x-min", sweep_xmin, "lower end of the sweep");
    cmd_sweep->add_option("--x-max", sweep_xmax, "upper end of the sweep");
    cmd_sweep->add_option("--steps", sweep_steps, "points per leg")->check(CLI::PositiveNumber);
    cmd_sweep->add_option("--step", sweep_step, "RK4 step")->check(CLI::PositiveNumber);
    cmd_sweep->add_option("--t-max", sweep_tmax, "relaxation horizon per point")
        ->check(CLI::PositiveNumber);
    cmd_sweep->add_option("--out", out_path, "output file (default stdout)");

    // --- basin ---
    auto* cmd_basin = app.add_subcommand("basin", "terminal branch over a grid of starts");
    ModelOpts m_basin;
    m_basin.attach(cmd_basin, false);
    VariantOpts v_basin;
    v_basin.attach(cmd_basin);
    std::string basin_xgrid, basin_offsets;
    double basin_step = 1e-3, basin_tmax = 400.0;
    cmd_basin->add_option("--x-grid", basin_xgrid, "field grid spec")->required();
    cmd_basin->add_option("--offsets", basin_offsets, "z offsets from psi2")->required();
    cmd_basin->add_option("--step", basin_step, "RK4 step")->check(CLI::PositiveNumber);
    cmd_basin->add_option("--t-max", basin_tmax, "relaxation horizon")
        ->check(CLI::PositiveNumber);
    cmd_basin->add_option("--out", out_path, "output file (default stdout)");

    // --- audit ---
    auto* cmd_audit = app.add_subcommand("audit", "exact finite-size free energy vs saddle");
    double audit_beta = 0.0, audit_j0 = 0.0, audit_field = 0.0;
    std::string audit_sizes = "64,256,1024";
    cmd_audit->add_option("--beta", audit_beta, "inverse temperature")->required();
    cmd_audit->add_option("--j0", audit_j0, "coupling constant")->required();
    cmd_audit->add_option("--field", audit_field, "external field");
    cmd_audit->add_option("--sizes", audit_sizes, "comma-separated spin counts");
    cmd_audit->add_option("--out", out_path, "output file (default stdout)");

    // --- toy ---
    auto* cmd_toy = app.add_subcommand("toy", "two-branch swallow-tail front sample");
    std::string toy_grid = "-0.125:2:200";
    cmd_toy->add_option("--x-grid", toy_grid, "grid spec, x >= -0.125");
    cmd_toy->add_option("--out", out_path, "output file (default stdout)");

    // --- check ---
    auto* cmd_check = app.add_subcommand("check", "run the internal invariant suite");
    bool check_quick = false;
    cmd_check->add_flag("--quick", check_quick, "reduced grids and budgets");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*cmd_branches) {
            const auto [p, x] = m_branches.resolve();
            const auto roots = solve_branches(p, x);
            Output o(out_path, out);
            o.stream() << "mu,y,z,stability,degenerate\n";
            for (const auto& r : roots)
                o.stream() << r.mu << ',' << fmt17(r.y) << ',' << fmt17(r.z) << ','
                           << stability_name(r.stability) << ',' << (r.degenerate ? 1 : 0)
                           << '\n';
            return 0;
        }

        if (*cmd_curve) {
            const ModelParams p = m_curve.resolve().params;
            const std::vector<double> grid =
                curve_grid.empty() ? default_y_grid(curve_n, curve_span) : parse_grid(curve_grid);
            const SignConvention conv = curve_conv == "minus" ? SignConvention::MinusYdx
                                                              : SignConvention::PlusYdx;
            const LegendreCurve curve = sample_curve(p, grid, conv);
            Output o(out_path, out);
            o.stream() << "segment,y,x,z\n";
            auto write_pt = [&](int seg, const LegendrePoint& pt) {
                o.stream() << seg << ',' << fmt17(pt.y) << ',' << fmt17(pt.x) << ','
                           << fmt17(pt.z) << '\n';
            };
            if (!curve_split) {
                for (const auto& pt : curve.samples) write_pt(0, pt);
            } else {
                PruneMode mode = PruneMode::None;
                if (curve_prune == "unstable") mode = PruneMode::DropUnstable;
                if (curve_prune == "unstable+metastable")
                    mode = PruneMode::DropUnstableAndMetastable;
                const auto branches = prune(split_branches(curve), mode);
                for (std::size_t i = 0; i < branches.size(); ++i)
                    for (const auto& pt : branches[i].points)
                        write_pt(static_cast<int>(i), pt);
            }
            return 0;
        }

        if (*cmd_project) {
            std::ifstream in(proj_in);
            if (!in) throw UsageError("cannot open input file: " + proj_in);
            std::string line;
            if (!std::getline(in, line) || line != "segment,y,x,z")
                throw UsageError("expected header 'segment,y,x,z' in " + proj_in);
            std::vector<Polyline2D> polylines;
            std::string prev_seg;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const auto f = split(line, ',');
                if (f.size() != 4) throw UsageError("malformed row: '" + line + "'");
                const double y = parse_double(f[1]);
                const double x = parse_double(f[2]);
                const double z = parse_double(f[3]);
                if (polylines.empty() || f[0] != prev_seg) {
                    polylines.emplace_back();
                    prev_seg = f[0];
                }
                std::array<double, 2> uv{};
                if (proj_plane == "xz") uv = {x, z};
                else if (proj_plane == "xy") uv = {x, y};
                else uv = {y, z};
                polylines.back().points.push_back(uv);
            }
            Output o(out_path, out);
            if (proj_svg) {
                write_svg(o.stream(), polylines, proj_w, proj_h);
            } else {
                const char* names = proj_plane == "xz" ? "x,z"
                                    : proj_plane == "xy" ? "x,y"
                                                         : "y,z";
                o.stream() << "polyline," << names << '\n';
                for (std::size_t i = 0; i < polylines.size(); ++i)
                    for (const auto& pt : polylines[i].points)
                        o.stream() << i << ',' << fmt17(pt[0]) << ',' << fmt17(pt[1]) << '\n';
            }
            return 0;
        }

        if (*cmd_flow) {
            const auto [p, x] = m_flow.resolve();
            const HamiltonianVariant variant = v_flow.resolve();
            double y0 = flow_y0, z0 = flow_z0;
            if (!o_flow_y0->count() || !o_flow_z0->count()) {
                const BranchFunctions bf = branch_functions(p, x);
                if (!o_flow_z0->count()) z0 = bf.psi2 + flow_offset;
                if (!o_flow_y0->count()) y0 = -bf.dpsi2_dx;
            }
            const Trajectory traj =
                integrate(variant, p, {x, y0, z0, 0.0},
                          {flow_step, flow_tmax, flow_record, 1e6, 1e-13, 10});
            Output o(out_path, out);
            o.stream() << "t,x,y,z,region,V,dVdt\n";
            const double nan = std::numeric_limits<double>::quiet_NaN();
            for (const auto& st : traj.states) {
                const RegionLabel geo = classify_region(p, st);
                double v = nan, rate = nan;
                if (const auto cert = certificate_region(variant.kind, geo)) {
                    try {
                        const LyapunovData ly = lyapunov(variant, p, *cert, st);
                        v = ly.value;
                        rate = ly.rate;
                    } catch (const RegionError&) {
                    }
                }
                o.stream() << fmt17(st.t) << ',' << fmt17(st.x) << ',' << fmt17(st.y) << ','
                           << fmt17(st.z) << ',' << region_name(geo) << ',' << fmt17(v) << ','
                           << fmt17(rate) << '\n';
            }
            return 0;
        }

        if (*cmd_sweep) {
            const ModelParams p = m_sweep.resolve().params;
            const SweepResult res =
                hysteresis_sweep(p, sweep_xmin, sweep_xmax, sweep_steps,
                                 {sweep_step, sweep_tmax, 0, 1e6, 1e-13, 10},
                                 v_sweep.resolve());
            Output o(out_path, out);
            o.stream() << "direction,x,y,z,jump\n";
            for (const auto& pt : res.path)
                o.stream() << pt.direction << ',' << fmt17(pt.x) << ',' << fmt17(pt.y) << ','
                           << fmt17(pt.z) << ',' << (pt.jump ? 1 : 0) << '\n';
            logging::info("loop area = " + fmt17(res.loop_area) + ", jumps = " +
                          std::to_string(res.jump_xs.size()));
            return 0;
        }

        if (*cmd_basin) {
            const ModelParams p = m_basin.resolve().params;
            const AttractorMap map =
                attractor_map(v_basin.resolve(), p, parse_grid(basin_xgrid),
                              parse_grid(basin_offsets),
                              {basin_step, basin_tmax, 0, 1e6, 1e-13, 10});
            Output o(out_path, out);
            o.stream() << "x,offset,y0,z0,terminal_y,terminal_z,branch,gap,status\n";
            for (const auto& pt : map.limits)
                o.stream() << fmt17(pt.x) << ',' << fmt17(pt.offset) << ',' << fmt17(pt.y0)
                           << ',' << fmt17(pt.z0) << ',' << fmt17(pt.terminal_y) << ','
                           << fmt17(pt.terminal_z) << ',' << pt.branch << ',' << fmt17(pt.gap)
                           << ',' << (pt.ok() ? "ok" : sanitize(pt.error)) << '\n';
            try {
                logging::info("terminal jump across x=0: " + fmt17(jump_across_zero(map)));
            } catch (const Error&) {
            }
            return 0;
        }

        if (*cmd_audit) {
            const auto rows =
                saddle_point_audit(audit_beta, audit_j0, audit_field, parse_sizes(audit_sizes));
            Output o(out_path, out);
            o.stream() << "n,exact_f,saddle_f,gap\n";
            for (const auto& r : rows)
                o.stream() << r.n << ',' << fmt17(r.exact_f) << ',' << fmt17(r.saddle_f) << ','
                           << fmt17(r.gap) << '\n';
            return 0;
        }

        if (*cmd_toy) {
            const std::vector<double> xs = parse_grid(toy_grid);  // before any output
            Output o(out_path, out);
            o.stream() << "x,y_plus,y_minus,z_plus,z_minus\n";
            for (double x : xs) {
                const ToyCuspPoint pt = toy_cusp_point(x);
                o.stream() << fmt17(pt.x) << ',' << fmt17(pt.y_plus) << ',' << fmt17(pt.y_minus)
                           << ',' << fmt17(pt.z_plus) << ',' << fmt17(pt.z_minus) << '\n';
            }
            return 0;
        }

        if (*cmd_check) {
            const auto results = run_checks(check_quick ? CheckLevel::Quick : CheckLevel::Full);
            int failures = 0;
            for (const auto& r : results) {
                out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.details << '\n';
                if (!r.pass) ++failures;
            }
            out << results.size() - failures << "/" << results.size() << " checks passed\n";
            return failures == 0 ? 0 : 3;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace contactflow::cli
