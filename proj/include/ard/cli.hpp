#pragma once

/// @file cli.hpp
/// Command-line front end. Four single-run commands plus a concurrent sweep:
///
///   simulate      integrate the equation, write snapshots + diagnostics + events
///   verify-exact  check a bump configuration, tabulate exact profiles,
///                 discretization residuals and solver-vs-exact errors
///   regimes       evaluate existence / blow-up / nonexistence certificates
///   particles     run the interacting-particle approximation, optionally
///                 comparing its density against the nonlocal solver
///   sweep         run several configuration files concurrently
///
/// Exit codes: 0 success, 1 configuration or validation error, 2 runtime
/// failure (including solver breakdown under time.strict = true). Outputs
/// are deterministic: rerunning the same spec rewrites byte-identical files.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ard/barenblatt.hpp"
#include "ard/config.hpp"
#include "ard/diagnostics.hpp"
#include "ard/eigen.hpp"
#include "ard/io.hpp"
#include "ard/particles.hpp"
#include "ard/regimes.hpp"
#include "ard/solver.hpp"

namespace ard {

namespace detail {

inline nlohmann::json entries_to_json(const AuditEntries& entries) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, value] : entries) j[key] = value;
    return j;
}

inline nlohmann::json events_to_json(const std::vector<Event>& events) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& ev : events)
        arr.push_back({{"t", ev.t}, {"kind", to_string(ev.kind)}, {"info", ev.info}});
    return arr;
}

inline std::filesystem::path output_path(const RunSpec& s, const std::string& suffix) {
    return std::filesystem::path(s.out_dir) / (s.prefix + suffix);
}

inline std::string load_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Column block shared by the per-snapshot CSV writers: "x" or "x,y" plus
/// one value column named after the evolved variable.
inline void append_snapshot_rows(std::string& csv, double t, const Field& f) {
    const Grid& g = f.grid();
    const std::string ts = format_g17(t);
    if (g.kind() == GeometryKind::rectangle) {
        for (std::size_t j = 0; j < g.axis_samples_y(); ++j)
            for (std::size_t i = 0; i < g.axis_samples_x(); ++i)
                csv += csv_row({ts, format_g17(g.x(i)), format_g17(g.y(j)),
                                format_g17(f[g.idx(i, j)])});
        return;
    }
    for (std::size_t i = 0; i < f.size(); ++i)
        csv += csv_row({ts, format_g17(g.x(i)), format_g17(f[i])});
}

inline double sample_mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = sample_mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

}  // namespace detail

/// Integrate the configured model and write three artifacts:
/// {prefix}_snapshots.csv, {prefix}_diagnostics.csv, {prefix}_events.json.
/// A run that halts early or is flagged untrusted exits 2 under
/// time.strict = true (0 otherwise, with the events still on record).
inline int cmd_simulate(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    const GridPtr g = make_grid(spec);
    const Field f0 = make_initial(spec, g);
    const RunResult r = spec.variable == VarTag::u ? run(f0, spec.params, spec.solver)
                                                   : run_v_form(f0, spec.params, spec.solver);

    // Diagnostics: u-runs get the full functional set (plus the weighted
    // eigenmoment on Dirichlet intervals); v-runs get mass always and the
    // concavity functionals whenever the data stays admissible (v >= 0).
    DiagnosticsSeries ser;
    if (spec.variable == VarTag::u) {
        std::optional<EigenPair> ep;
        if (spec.boundary == BoundaryKind::dirichlet && g->kind() == GeometryKind::interval)
            ep = dirichlet_first_numeric(g);
        ser = compute_series(r, spec.params, ep ? &*ep : nullptr);
    } else {
        bool admissible = true;
        for (const auto& f : r.snapshots) admissible = admissible && f.min() >= -1e-6;
        if (admissible) {
            ser = concavity_series(r, default_concavity(spec.params), spec.params).series;
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            for (std::size_t k = 0; k < r.times.size(); ++k) {
                ser.times.push_back(r.times[k]);
                ser.mass.push_back(mass(r.snapshots[k]));
                ser.entropy.push_back(nan);
                ser.dissipation.push_back(nan);
                ser.margin.push_back(nan);
                ser.kaplan_a.push_back(nan);
                ser.psi.push_back(nan);
                ser.energy.push_back(nan);
            }
            ser.events = r.events;
        }
    }

    std::filesystem::create_directories(spec.out_dir);
    const AuditEntries audit = resolved_entries(spec);
    const std::string head = audit_header("simulate", audit);
    const std::string var = spec.variable == VarTag::u ? "u" : "v";

    std::string snap = head;
    snap += g->kind() == GeometryKind::rectangle ? "t,x,y," + var + "\n" : "t,x," + var + "\n";
    for (std::size_t k = 0; k < r.times.size(); ++k)
        detail::append_snapshot_rows(snap, r.times[k], r.snapshots[k]);
    write_text_file(detail::output_path(spec, "_snapshots.csv"), snap);

    std::string diag = head + "t,mass,entropy,dissipation,margin,eigen_moment,psi,energy\n";
    for (std::size_t k = 0; k < ser.times.size(); ++k)
        diag += csv_row({format_g17(ser.times[k]), format_g17(ser.mass[k]),
                         format_g17(ser.entropy[k]), format_g17(ser.dissipation[k]),
                         format_g17(ser.margin[k]), format_g17(ser.kaplan_a[k]),
                         format_g17(ser.psi[k]), format_g17(ser.energy[k])});
    write_text_file(detail::output_path(spec, "_diagnostics.csv"), diag);

    nlohmann::json j;
    j["command"] = "simulate";
    j["config"] = detail::entries_to_json(audit);
    j["events"] = detail::events_to_json(r.events);
    j["completed"] = r.completed();
    j["untrusted"] = r.untrusted;
    write_text_file(detail::output_path(spec, "_events.json"), j.dump(2) + "\n");

    out << "simulate: " << r.times.size() << " snapshots, final t = "
        << format_g17(r.times.back()) << "\n";
    for (const auto& ev : r.events)
        out << "  event t = " << format_g17(ev.t) << ": " << to_string(ev.kind)
            << (ev.info.empty() ? "" : " (" + ev.info + ")") << "\n";
    out << "  wrote " << detail::output_path(spec, "_snapshots.csv").string() << "\n";
    out << "  wrote " << detail::output_path(spec, "_diagnostics.csv").string() << "\n";
    out << "  wrote " << detail::output_path(spec, "_events.json").string() << "\n";

    if (!r.completed() || r.untrusted) {
        err << "simulate: " << (r.completed() ? "trajectory flagged untrusted" : "run halted early")
            << "\n";
        return spec.strict ? 2 : 0;
    }
    return 0;
}

/// Validate the bump list, then write four tables: the separation conditions
/// with both sides ({prefix}_conditions.csv), the exact profile sampled at
/// the requested times ({prefix}_exact.csv), the discretization residual per
/// time ({prefix}_residual.csv), and the solver-vs-exact L1 error for each
/// positive time ({prefix}_error.csv). An inadmissible configuration lists
/// its failing conditions and exits 1.
inline int cmd_verify_exact(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    const Params& p = spec.params;
    const MultiBumpConfig& cfg = spec.exact.cfg;
    const ValidityReport rep = validate_multibump(cfg, p);

    std::filesystem::create_directories(spec.out_dir);
    const AuditEntries audit = resolved_entries(spec);
    const std::string head = audit_header("verify-exact", audit);

    std::string cond = head + "name,lhs,rhs,ok\n";
    for (const auto& c : rep.checks)
        cond += csv_row({csv_quote(c.name), format_g17(c.lhs), format_g17(c.rhs),
                         c.ok ? "true" : "false"});
    write_text_file(detail::output_path(spec, "_conditions.csv"), cond);
    out << "verify-exact: " << rep.checks.size() << " conditions, existence window tau = "
        << format_g17(rep.tau) << "\n";
    out << "  wrote " << detail::output_path(spec, "_conditions.csv").string() << "\n";

    if (!rep.valid) {
        err << "verify-exact: bump configuration is inadmissible\n";
        for (const auto& c : rep.checks)
            if (!c.ok)
                err << "  " << c.name << ": lhs = " << format_g17(c.lhs)
                    << " must stay below rhs = " << format_g17(c.rhs) << "\n";
        return 1;
    }

    std::vector<double> times = spec.exact.times;
    if (times.empty()) {
        times = std::isfinite(rep.tau) ? std::vector<double>{0.0, 0.45 * rep.tau, 0.9 * rep.tau}
                                       : std::vector<double>{0.0, 0.5, 1.0};
    }
    for (const double t : times)
        if (!(t < rep.tau)) {
            err << "verify-exact: time " << format_g17(t)
                << " is not below the existence window tau = " << format_g17(rep.tau) << "\n";
            return 1;
        }

    const GridPtr g = make_grid(spec);

    std::string exact = head + "t,x,v\n";
    for (const double t : times) {
        const std::string ts = format_g17(t);
        for (std::size_t i = 0; i < g->size(); ++i)
            exact += csv_row(
                {ts, format_g17(g->x(i)), format_g17(multibump_eval(cfg, g->x(i), t, p))});
    }
    write_text_file(detail::output_path(spec, "_exact.csv"), exact);
    out << "  wrote " << detail::output_path(spec, "_exact.csv").string() << " ("
        << times.size() << " time slices)\n";

    // Discretization residual of the closed form on this grid. Times too
    // close to tau for the centered time difference report nan.
    std::string resid = head + "t,residual\n";
    for (const double t : times) {
        double value = std::numeric_limits<double>::quiet_NaN();
        if (t + spec.exact.residual_dt < rep.tau)
            value = residual_check(cfg, *g, t, p, spec.exact.residual_dt);
        resid += csv_row({format_g17(t), format_g17(value)});
    }
    write_text_file(detail::output_path(spec, "_residual.csv"), resid);
    out << "  wrote " << detail::output_path(spec, "_residual.csv").string() << "\n";

    // Solver-vs-exact error: evolve the t = 0 profile to each positive time
    // and compare in L1, absolute and relative to the exact profile's mass.
    // Only all-negative configurations stay on the well-posed branch v <= 0
    // (a positive bump puts u = v + a/(2b) beyond the parabolicity
    // threshold), so the comparison is skipped otherwise.
    bool solvable = true;
    for (const auto& b : cfg.bumps) solvable = solvable && b.sign == BumpSign::negative;
    std::string error = head + "t,l1_error,rel_l1_error\n";
    bool all_completed = true;
    if (solvable) {
        const Field v0 = Field::from_fn(g, spec.boundary, VarTag::v, [&](double x) {
            return multibump_eval(cfg, x, 0.0, p);
        });
        for (const double t : times) {
            if (!(t > 0.0)) continue;
            SolverConfig sc = spec.solver;
            sc.t_end = t;
            const RunResult rr = run_v_form(v0, p, sc);
            double l1 = std::numeric_limits<double>::quiet_NaN();
            double rel = std::numeric_limits<double>::quiet_NaN();
            if (rr.completed() && !rr.untrusted) {
                const Field& num = rr.snapshots.back();
                double abs_err = 0.0, ref = 0.0;
                for (std::size_t i = 0; i < num.size(); ++i) {
                    const double ex = multibump_eval(cfg, g->x(i), t, p);
                    abs_err += std::abs(num[i] - ex) * g->quad_weight(i);
                    ref += std::abs(ex) * g->quad_weight(i);
                }
                l1 = abs_err;
                rel = ref > 0.0 ? abs_err / ref : std::numeric_limits<double>::quiet_NaN();
            } else {
                all_completed = false;
                err << "verify-exact: solver run to t = " << format_g17(t)
                    << " did not complete cleanly\n";
            }
            error += csv_row({format_g17(t), format_g17(l1), format_g17(rel)});
        }
    } else {
        out << "  solver comparison skipped: positive bumps leave the well-posed branch\n";
    }
    write_text_file(detail::output_path(spec, "_error.csv"), error);
    out << "  wrote " << detail::output_path(spec, "_error.csv").string() << "\n";

    if (!all_completed) return spec.strict ? 2 : 0;
    return 0;
}

/// Evaluate the enabled analytical checks and write one JSON certificate,
/// {prefix}_regimes.json, echoing a readable table to stdout. Verdicts are
/// data, not errors: the command exits 0 whether a claim holds or fails.
inline int cmd_regimes(const RunSpec& spec, std::ostream& out, std::ostream&) {
    const Params& p = spec.params;
    std::vector<std::pair<std::string, RegimeReport>> reports;

    if (spec.regimes.u0_max)
        reports.emplace_back("global_existence", classify_global(p, *spec.regimes.u0_max));
    if (spec.regimes.A0) {
        double mu = spec.regimes.mu;
        if (spec.regimes.mu_auto) mu = dirichlet_first_numeric(make_grid(spec)).mu;
        reports.emplace_back("moment_blowup", classify_kaplan(p, mu, *spec.regimes.A0));
    }
    if (spec.regimes.concavity) {
        const GridPtr g = make_grid(spec);
        reports.emplace_back("concavity_blowup", classify_concavity(p, make_initial(spec, g)));
    }
    if (spec.regimes.pohozaev)
        reports.emplace_back("steady_state_nonexistence", pohozaev_nonexistence(p));
    if (spec.regimes.stability) {
        const GridPtr g = make_grid(spec);
        const NeumannSpectrum sp = neumann_spectrum_analytic(*g, spec.regimes.modes);
        reports.emplace_back("linear_stability", linear_stability(p, sp));
    }

    nlohmann::json certs = nlohmann::json::object();
    for (const auto& [name, rep] : reports) {
        out << name << ": " << to_string(rep.verdict) << "\n";
        out << "  claim: " << rep.claim << "\n";
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : rep.entries) {
            out << "  - " << e.name << ": " << to_string(e.verdict)
                << (e.boundary_tie ? " [boundary tie]" : "");
            if (std::isfinite(e.lhs) || std::isfinite(e.rhs))
                out << "  lhs = " << format_g17(e.lhs) << ", rhs = " << format_g17(e.rhs);
            if (!e.note.empty()) out << "  (" << e.note << ")";
            out << "\n";
            entries.push_back({{"name", e.name},
                               {"lhs", e.lhs},
                               {"rhs", e.rhs},
                               {"verdict", to_string(e.verdict)},
                               {"boundary_tie", e.boundary_tie},
                               {"note", e.note}});
        }
        if (rep.tstar) out << "  blow-up time bound t* <= " << format_g17(*rep.tstar) << "\n";
        if (!rep.note.empty()) out << "  note: " << rep.note << "\n";
        nlohmann::json jr = {{"claim", rep.claim},
                             {"verdict", to_string(rep.verdict)},
                             {"entries", entries},
                             {"note", rep.note}};
        if (rep.tstar) jr["tstar"] = *rep.tstar;
        if (!rep.rates.empty()) jr["rates"] = rep.rates;
        certs[name] = jr;
    }

    std::filesystem::create_directories(spec.out_dir);
    nlohmann::json j;
    j["command"] = "regimes";
    j["config"] = detail::entries_to_json(resolved_entries(spec));
    j["reports"] = certs;
    write_text_file(detail::output_path(spec, "_regimes.json"), j.dump(2) + "\n");
    out << "wrote " << detail::output_path(spec, "_regimes.json").string() << "\n";
    return 0;
}

/// Sample the initial density, run the interacting-particle system, and
/// write trajectories ({prefix}_particles.csv) plus per-time position
/// statistics ({prefix}_pstats.csv). With particles.compare = true the same
/// initial data drives the nonlocal solver and {prefix}_compare.csv records
/// the L1 gap between the smoothed empirical density and the PDE field.
inline int cmd_particles(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    const GridPtr g = make_grid(spec);
    const Field u0 = make_initial(spec, g);
    const ParticleRun pr =
        run_particles(u0, spec.particles.cfg, spec.params, spec.particles.stride);

    std::filesystem::create_directories(spec.out_dir);
    const AuditEntries audit = resolved_entries(spec);
    const std::string head = audit_header("particles", audit);
    const int dim = pr.states.front().dim;

    std::string traj = head + (dim == 2 ? "t,id,x,y\n" : "t,id,x\n");
    for (std::size_t k = 0; k < pr.states.size(); ++k) {
        const ParticleState& s = pr.states[k];
        const std::string ts = format_g17(pr.times[k]);
        for (std::size_t i = 0; i < s.count(); ++i) {
            if (dim == 2)
                traj += csv_row({ts, std::to_string(i), format_g17(s.x[2 * i]),
                                 format_g17(s.x[2 * i + 1])});
            else
                traj += csv_row({ts, std::to_string(i), format_g17(s.x[i])});
        }
    }
    write_text_file(detail::output_path(spec, "_particles.csv"), traj);

    std::string stats =
        head + (dim == 2 ? "t,mean_x,var_x,mean_y,var_y\n" : "t,mean_x,var_x\n");
    for (std::size_t k = 0; k < pr.states.size(); ++k) {
        const ParticleState& s = pr.states[k];
        std::vector<std::string> cells = {format_g17(pr.times[k])};
        for (int ax = 0; ax < dim; ++ax) {
            std::vector<double> coords(s.count());
            for (std::size_t i = 0; i < s.count(); ++i) coords[i] = s.x[i * dim + ax];
            cells.push_back(format_g17(detail::sample_mean(coords)));
            cells.push_back(format_g17(detail::sample_variance(coords)));
        }
        stats += csv_row(cells);
    }
    write_text_file(detail::output_path(spec, "_pstats.csv"), stats);

    out << "particles: " << pr.states.size() << " recorded states, "
        << pr.drift_warnings << " drift warnings\n";
    out << "  wrote " << detail::output_path(spec, "_particles.csv").string() << "\n";
    out << "  wrote " << detail::output_path(spec, "_pstats.csv").string() << "\n";

    if (spec.particles.compare) {
        const RunResult pde = run(u0, spec.params, spec.solver);
        if (!pde.completed() || pde.untrusted) {
            err << "particles: comparison solver run did not complete cleanly\n";
            return spec.strict ? 2 : 0;
        }
        std::vector<double> times = spec.particles.compare_times;
        if (times.empty()) times = {0.0, spec.particles.cfg.t_end};
        const double bw = spec.particles.bandwidth > 0.0
                              ? spec.particles.bandwidth
                              : silverman_bandwidth(pr.states.back());
        const ComparisonSeries cs = compare_to_pde(pr, pde, times, bw);
        std::string cmp = head + "t,l1_error\n";
        for (std::size_t k = 0; k < cs.times.size(); ++k)
            cmp += csv_row({format_g17(cs.times[k]), format_g17(cs.l1[k])});
        write_text_file(detail::output_path(spec, "_compare.csv"), cmp);
        out << "  kernel bandwidth " << format_g17(bw) << "\n";
        out << "  wrote " << detail::output_path(spec, "_compare.csv").string() << "\n";
    }
    return 0;
}

/// Run one resolved spec, mapping exceptions onto the exit-code contract:
/// domain and validation failures exit 1, runtime failures exit 2.
inline int dispatch_command(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    try {
        switch (spec.command) {
            case Command::simulate: return cmd_simulate(spec, out, err);
            case Command::verify_exact: return cmd_verify_exact(spec, out, err);
            case Command::regimes: return cmd_regimes(spec, out, err);
            case Command::particles: return cmd_particles(spec, out, err);
            case Command::none: break;
        }
        err << "error: no command\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

/// Resolve each config file (every one needs run.command), reject duplicate
/// output targets, then run all specs concurrently. Per-run output is
/// buffered and echoed in argument order; the exit code is the worst child's.
inline int cmd_sweep(const std::vector<std::string>& paths, std::ostream& out,
                     std::ostream& err) {
    std::vector<RunSpec> specs;
    for (const auto& path : paths) {
        ConfigFile cf = parse_config_text(detail::load_config_file(path));
        if (!detail::lookup(cf, "run", "command"))
            throw std::invalid_argument(path + ": sweep configs must set run.command");
        specs.push_back(resolve_spec(cf));
    }
    std::set<std::pair<std::string, std::string>> targets;
    for (std::size_t i = 0; i < specs.size(); ++i)
        if (!targets.insert({specs[i].out_dir, specs[i].prefix}).second)
            throw std::invalid_argument(paths[i] + ": duplicate output target " +
                                        specs[i].out_dir + "/" + specs[i].prefix);
    for (const auto& s : specs) std::filesystem::create_directories(s.out_dir);

    std::vector<std::future<std::pair<int, std::string>>> futures;
    futures.reserve(specs.size());
    for (const auto& spec : specs)
        futures.push_back(std::async(std::launch::async, [spec]() {
            std::ostringstream buf;
            const int code = dispatch_command(spec, buf, buf);
            return std::make_pair(code, buf.str());
        }));

    int worst = 0;
    for (std::size_t i = 0; i < futures.size(); ++i) {
        const auto [code, text] = futures[i].get();
        out << "== " << paths[i] << " (exit " << code << ")\n" << text;
        worst = std::max(worst, code);
    }
    err << (worst == 0 ? "" : "sweep: at least one run failed\n");
    return worst;
}

/// Parse arguments (without argv[0]) and run. All output goes to the two
/// streams, so tests can drive the front end in-process.
inline int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"numerical laboratory for du/dt = Lap[(a - bu) u] + (c - du) u", "ard"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir, prefix;
    std::vector<std::string> sweep_paths;

    const auto add_common = [&](CLI::App* sc) {
        sc->add_option("config", config_path, "configuration file")->required();
        sc->add_option("--set", overrides, "override a value, e.g. --set params.a=2");
        sc->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sc->add_option("--prefix", prefix, "output file prefix (overrides output.prefix)");
    };
    CLI::App* sim = app.add_subcommand(
        "simulate", "integrate the equation; write snapshots, diagnostics and events");
    add_common(sim);
    CLI::App* vex = app.add_subcommand(
        "verify-exact", "validate a bump configuration and compare solver against exact");
    add_common(vex);
    CLI::App* reg =
        app.add_subcommand("regimes", "evaluate existence / blow-up / nonexistence certificates");
    add_common(reg);
    CLI::App* par =
        app.add_subcommand("particles", "run the interacting-particle approximation");
    add_common(par);
    CLI::App* swp = app.add_subcommand("sweep", "run several configuration files concurrently");
    swp->add_option("configs", sweep_paths, "configuration files, each with run.command")
        ->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (swp->parsed()) return cmd_sweep(sweep_paths, out, err);

        const Command command = sim->parsed()   ? Command::simulate
                                : vex->parsed() ? Command::verify_exact
                                : reg->parsed() ? Command::regimes
                                                : Command::particles;
        ConfigFile cf = parse_config_text(detail::load_config_file(config_path));
        for (const auto& o : overrides) apply_override(cf, o);
        if (!out_dir.empty()) cf.sections["output"]["dir"] = out_dir;
        if (!prefix.empty()) cf.sections["output"]["prefix"] = prefix;
        const RunSpec spec = resolve_spec(cf, command);
        return dispatch_command(spec, out, err);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace ard
