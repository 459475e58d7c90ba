#pragma once

/// @file config.hpp
/// Plain-text run configuration: an INI-style format with [section] headers
/// and key = value lines, parsed into a ConfigFile, then resolved into a
/// fully validated RunSpec. Unknown sections and keys are rejected at parse
/// time; every cross-field constraint is checked at resolve time, so a
/// RunSpec that exists is runnable. resolved_entries() lists the complete
/// resolved state for the audit header of every output file.
///
/// Sections and keys (defaults in parentheses):
///
///   [run]       command = simulate | verify-exact | regimes | particles
///   [params]    a (1), b (1), c (0), d (0), n (1)
///   [grid]      kind = interval (default) | rectangle | radial;
///               interval: length (1), cells (200)
///               rectangle: length_x (1), length_y (1), cells_x (64), cells_y (64)
///               radial: radius (1), cells (200)   dimension comes from params.n
///   [model]     kind = local (default) | nonlocal, epsilon (0.05),
///               boundary = neumann (default) | dirichlet, variable = u (default) | v
///   [time]      dt_policy = adaptive (default) | fixed, dt (0), safety (0.4),
///               t_end (1), output_stride (1), breakdown = halt (default) | continue,
///               value_cap (1e12), strict = true
///   [initial]   family = constant (default) | gaussian | eigenfunction | barenblatt,
///               value (0.25), amplitude (1), center (domain midpoint),
///               center_y (midpoint), sigma (0.1)
///   [bump]      repeatable, ordered: sign = positive | negative (default),
///               T (1), x0 (0)
///   [exact]     times = comma list (default 0, 0.45 tau, 0.9 tau),
///               horizon (unset), residual_dt (1e-5)
///   [output]    dir (out), prefix (run)
///   [particles] count (1000), epsilon (0.05), dt (1e-4), t_end (1),
///               domain = free (default) | reflecting, box_lo (0), box_hi (grid
///               extent), box_lo_y, box_hi_y, seed (0), bandwidth (0 = rule of
///               thumb), stride (1), compare = false, compare_times (0, t_end)
///   [regimes]   u0_max (unset), A0 (unset), mu (auto), concavity = false,
///               pohozaev = false, stability = false, modes (16)
///
/// Comments start at '#' or ';' and run to end of line. Values therefore
/// cannot contain those characters; none of the accepted values need them.

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ard/barenblatt.hpp"
#include "ard/eigen.hpp"
#include "ard/grid.hpp"
#include "ard/io.hpp"
#include "ard/params.hpp"
#include "ard/particles.hpp"
#include "ard/solver.hpp"

namespace ard {

/// Raw parse result: one key-value map per section, plus the ordered list of
/// [bump] sections (the only section that may repeat).
struct ConfigFile {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::vector<std::map<std::string, std::string>> bumps;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline const std::map<std::string, std::vector<std::string>>& config_schema() {
    static const std::map<std::string, std::vector<std::string>> schema = {
        {"run", {"command"}},
        {"params", {"a", "b", "c", "d", "n"}},
        {"grid",
         {"kind", "length", "cells", "length_x", "length_y", "cells_x", "cells_y", "radius"}},
        {"model", {"kind", "epsilon", "boundary", "variable"}},
        {"time",
         {"dt_policy", "dt", "safety", "t_end", "output_stride", "breakdown", "value_cap",
          "strict"}},
        {"initial", {"family", "value", "amplitude", "center", "center_y", "sigma"}},
        {"bump", {"sign", "T", "x0"}},
        {"exact", {"times", "horizon", "residual_dt"}},
        {"output", {"dir", "prefix"}},
        {"particles",
         {"count", "epsilon", "dt", "t_end", "domain", "box_lo", "box_hi", "box_lo_y",
          "box_hi_y", "seed", "bandwidth", "stride", "compare", "compare_times"}},
        {"regimes", {"u0_max", "A0", "mu", "concavity", "pohozaev", "stability", "modes"}},
    };
    return schema;
}

inline void require_known(const std::string& section, const std::string& key,
                          const std::string& where) {
    const auto& schema = config_schema();
    const auto it = schema.find(section);
    if (it == schema.end())
        throw std::invalid_argument(where + ": unknown section [" + section + "]");
    for (const auto& k : it->second)
        if (k == key) return;
    throw std::invalid_argument(where + ": unknown key '" + key + "' in section [" + section +
                                "]");
}

}  // namespace detail

/// Parse configuration text. Rejects unknown sections and keys, duplicate
/// keys within one section, and repeated sections other than [bump].
inline ConfigFile parse_config_text(const std::string& text) {
    ConfigFile cf;
    std::string section;
    std::map<std::string, std::string>* target = nullptr;

    std::size_t pos = 0, lineno = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        const std::string where = "config line " + std::to_string(lineno);

        const std::size_t cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument(where + ": malformed section header '" + line + "'");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (!detail::config_schema().count(section))
                throw std::invalid_argument(where + ": unknown section [" + section + "]");
            if (section == "bump") {
                cf.bumps.emplace_back();
                target = &cf.bumps.back();
            } else {
                if (cf.sections.count(section))
                    throw std::invalid_argument(where + ": section [" + section +
                                                "] appears twice");
                target = &cf.sections[section];
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(where + ": expected 'key = value', got '" + line + "'");
        if (!target) throw std::invalid_argument(where + ": key before any [section]");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument(where + ": empty key");
        if (value.empty()) throw std::invalid_argument(where + ": empty value for '" + key + "'");
        detail::require_known(section, key, where);
        if (target->count(key))
            throw std::invalid_argument(where + ": duplicate key '" + key + "' in [" + section +
                                        "]");
        (*target)[key] = value;
    }
    return cf;
}

/// Apply one "section.key=value" override on top of a parsed file. [bump]
/// sections are ordered and cannot be addressed this way.
inline void apply_override(ConfigFile& cf, const std::string& assignment) {
    const std::string where = "override '" + assignment + "'";
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument(where + ": expected section.key=value");
    const std::string path = detail::trim(assignment.substr(0, eq));
    const std::string value = detail::trim(assignment.substr(eq + 1));
    const std::size_t dot = path.find('.');
    if (dot == std::string::npos)
        throw std::invalid_argument(where + ": expected section.key=value");
    const std::string section = path.substr(0, dot);
    const std::string key = path.substr(dot + 1);
    if (section == "bump")
        throw std::invalid_argument(where + ": bump sections cannot be overridden");
    detail::require_known(section, key, where);
    if (value.empty()) throw std::invalid_argument(where + ": empty value");
    cf.sections[section][key] = value;
}

enum class Command { none, simulate, verify_exact, regimes, particles };

inline std::string command_name(Command c) {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::verify_exact: return "verify-exact";
        case Command::regimes: return "regimes";
        case Command::particles: return "particles";
        case Command::none: break;
    }
    return "none";
}

enum class InitialFamily { constant, gaussian, eigenfunction, barenblatt };

struct GridSpec {
    GeometryKind kind = GeometryKind::interval;
    double length = 1.0;    ///< interval extent
    double length_x = 1.0;  ///< rectangle extents
    double length_y = 1.0;
    double radius = 1.0;  ///< radial extent
    int cells = 200;      ///< interval / radial resolution
    int cells_x = 64;     ///< rectangle resolution
    int cells_y = 64;
};

struct InitialSpec {
    InitialFamily family = InitialFamily::constant;
    double value = 0.25;     ///< constant level
    double amplitude = 1.0;  ///< gaussian peak height / eigenfunction moment
    double center = 0.0;     ///< gaussian center (resolved default: midpoint)
    double center_y = 0.0;
    double sigma = 0.1;  ///< gaussian width
};

struct ExactSpec {
    MultiBumpConfig cfg;        ///< bump list plus optional horizon
    std::vector<double> times;  ///< evaluation times; empty = derive from tau
    double residual_dt = 1e-5;  ///< time-difference step for the residual table
};

struct ParticleSpec {
    ParticleConfig cfg;
    double bandwidth = 0.0;  ///< kernel width for densities; 0 = rule of thumb
    int stride = 1;          ///< record every stride-th step
    bool compare = false;    ///< also run the nonlocal model and compare
    std::vector<double> compare_times;  ///< empty = {0, t_end}
};

struct RegimeSpec {
    std::optional<double> u0_max;  ///< enables the global-existence check
    std::optional<double> A0;      ///< enables the moment blow-up check
    double mu = 0.0;               ///< eigenvalue for the moment check
    bool mu_auto = true;           ///< compute mu from the grid when true
    bool concavity = false;
    bool pohozaev = false;
    bool stability = false;
    int modes = 16;  ///< spectrum length for the stability scan

    bool any() const {
        return u0_max.has_value() || A0.has_value() || concavity || pohozaev || stability;
    }
};

/// Fully resolved, validated run description. Construct via resolve_spec.
struct RunSpec {
    Command command = Command::none;
    Params params;
    GridSpec grid;
    BoundaryKind boundary = BoundaryKind::neumann;
    VarTag variable = VarTag::u;
    SolverConfig solver;  ///< carries model kind, epsilon and time stepping
    bool strict = true;   ///< breakdown or blow-up exits nonzero when true
    InitialSpec initial;
    ExactSpec exact;
    ParticleSpec particles;
    RegimeSpec regimes;
    std::string out_dir = "out";
    std::string prefix = "run";
};

namespace detail {

inline const std::string* lookup(const ConfigFile& cf, const std::string& sec,
                                 const std::string& key) {
    const auto s = cf.sections.find(sec);
    if (s == cf.sections.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

inline double parse_double(const std::string& text, const std::string& name) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(name + ": not a number: '" + text + "'");
    }
    if (used != t.size()) throw std::invalid_argument(name + ": not a number: '" + text + "'");
    return v;
}

inline long long parse_int(const std::string& text, const std::string& name) {
    const std::string t = trim(text);
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(t, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(name + ": not an integer: '" + text + "'");
    }
    if (used != t.size()) throw std::invalid_argument(name + ": not an integer: '" + text + "'");
    return v;
}

inline std::uint64_t parse_uint64(const std::string& text, const std::string& name) {
    const std::string t = trim(text);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(t, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(name + ": not an unsigned integer: '" + text + "'");
    }
    if (used != t.size() || t.front() == '-')
        throw std::invalid_argument(name + ": not an unsigned integer: '" + text + "'");
    return v;
}

inline bool parse_bool(const std::string& text, const std::string& name) {
    const std::string t = trim(text);
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    throw std::invalid_argument(name + ": expected true or false, got '" + text + "'");
}

inline std::vector<double> parse_double_list(const std::string& text, const std::string& name) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string item =
            text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        out.push_back(parse_double(item, name));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

/// Pick one of the allowed words; error message lists the choices.
inline std::size_t parse_choice(const std::string& text, const std::string& name,
                                const std::vector<std::string>& words) {
    const std::string t = trim(text);
    for (std::size_t i = 0; i < words.size(); ++i)
        if (t == words[i]) return i;
    std::string msg = name + ": expected one of {";
    for (std::size_t i = 0; i < words.size(); ++i) msg += (i ? ", " : "") + words[i];
    throw std::invalid_argument(msg + "}, got '" + text + "'");
}

template <typename F>
inline void with(const ConfigFile& cf, const std::string& sec, const std::string& key, F&& f) {
    if (const std::string* v = lookup(cf, sec, key)) f(*v, sec + "." + key);
}

/// Reject keys that do not apply to the selected grid kind.
inline void reject_foreign_grid_keys(const ConfigFile& cf, GeometryKind kind) {
    static const std::vector<std::string> all = {"length",  "cells",   "length_x", "length_y",
                                                 "cells_x", "cells_y", "radius"};
    std::vector<std::string> allowed;
    switch (kind) {
        case GeometryKind::interval: allowed = {"length", "cells"}; break;
        case GeometryKind::rectangle:
            allowed = {"length_x", "length_y", "cells_x", "cells_y"};
            break;
        case GeometryKind::radial: allowed = {"radius", "cells"}; break;
    }
    for (const auto& key : all) {
        if (!lookup(cf, "grid", key)) continue;
        bool ok = false;
        for (const auto& a : allowed) ok = ok || a == key;
        if (!ok)
            throw std::invalid_argument("grid." + key + " does not apply to this grid kind");
    }
}

}  // namespace detail

/// Turn a parsed file into a validated RunSpec. `command` from the command
/// line wins over an absent [run] section; if both are present they must
/// agree. Every constraint violation throws invalid_argument.
inline RunSpec resolve_spec(const ConfigFile& cf, Command command = Command::none) {
    using namespace detail;
    RunSpec s;

    with(cf, "run", "command", [&](const std::string& v, const std::string& n) {
        static const std::vector<std::string> words = {"simulate", "verify-exact", "regimes",
                                                       "particles"};
        switch (parse_choice(v, n, words)) {
            case 0: s.command = Command::simulate; break;
            case 1: s.command = Command::verify_exact; break;
            case 2: s.command = Command::regimes; break;
            default: s.command = Command::particles; break;
        }
    });
    if (command != Command::none) {
        if (s.command != Command::none && s.command != command)
            throw std::invalid_argument("run.command = " + command_name(s.command) +
                                        " conflicts with the '" + command_name(command) +
                                        "' subcommand");
        s.command = command;
    }
    if (s.command == Command::none)
        throw std::invalid_argument("no command: pass a subcommand or set run.command");

    with(cf, "params", "a", [&](const std::string& v, const std::string& n) {
        s.params.a = parse_double(v, n);
    });
    with(cf, "params", "b", [&](const std::string& v, const std::string& n) {
        s.params.b = parse_double(v, n);
    });
    with(cf, "params", "c", [&](const std::string& v, const std::string& n) {
        s.params.c = parse_double(v, n);
    });
    with(cf, "params", "d", [&](const std::string& v, const std::string& n) {
        s.params.d = parse_double(v, n);
    });
    with(cf, "params", "n", [&](const std::string& v, const std::string& n) {
        s.params.n = static_cast<int>(parse_int(v, n));
    });
    s.params.validate();

    with(cf, "grid", "kind", [&](const std::string& v, const std::string& n) {
        static const std::vector<std::string> words = {"interval", "rectangle", "radial"};
        switch (parse_choice(v, n, words)) {
            case 0: s.grid.kind = GeometryKind::interval; break;
            case 1: s.grid.kind = GeometryKind::rectangle; break;
            default: s.grid.kind = GeometryKind::radial; break;
        }
    });
    reject_foreign_grid_keys(cf, s.grid.kind);
    with(cf, "grid", "length", [&](const std::string& v, const std::string& n) {
        s.grid.length = parse_double(v, n);
    });
    with(cf, "grid", "length_x", [&](const std::string& v, const std::string& n) {
        s.grid.length_x = parse_double(v, n);
    });
    with(cf, "grid", "length_y", [&](const std::string& v, const std::string& n) {
        s.grid.length_y = parse_double(v, n);
    });
    with(cf, "grid", "radius", [&](const std::string& v, const std::string& n) {
        s.grid.radius = parse_double(v, n);
    });
    with(cf, "grid", "cells", [&](const std::string& v, const std::string& n) {
        s.grid.cells = static_cast<int>(parse_int(v, n));
    });
    with(cf, "grid", "cells_x", [&](const std::string& v, const std::string& n) {
        s.grid.cells_x = static_cast<int>(parse_int(v, n));
    });
    with(cf, "grid", "cells_y", [&](const std::string& v, const std::string& n) {
        s.grid.cells_y = static_cast<int>(parse_int(v, n));
    });

    with(cf, "model", "kind", [&](const std::string& v, const std::string& n) {
        s.solver.model = parse_choice(v, n, {"local", "nonlocal"}) == 0 ? ModelKind::local
                                                                        : ModelKind::nonlocal;
    });
    with(cf, "model", "epsilon", [&](const std::string& v, const std::string& n) {
        s.solver.epsilon = parse_double(v, n);
    });
    with(cf, "model", "boundary", [&](const std::string& v, const std::string& n) {
        s.boundary = parse_choice(v, n, {"neumann", "dirichlet"}) == 0 ? BoundaryKind::neumann
                                                                       : BoundaryKind::dirichlet;
    });
    with(cf, "model", "variable", [&](const std::string& v, const std::string& n) {
        s.variable = parse_choice(v, n, {"u", "v"}) == 0 ? VarTag::u : VarTag::v;
    });
    if (s.solver.model == ModelKind::nonlocal && s.grid.kind == GeometryKind::radial)
        throw std::invalid_argument("the nonlocal model needs an interval or rectangle grid");

    with(cf, "time", "dt_policy", [&](const std::string& v, const std::string& n) {
        s.solver.dt_policy =
            parse_choice(v, n, {"adaptive", "fixed"}) == 0 ? DtPolicy::adaptive : DtPolicy::fixed;
    });
    with(cf, "time", "dt", [&](const std::string& v, const std::string& n) {
        s.solver.dt = parse_double(v, n);
    });
    with(cf, "time", "safety", [&](const std::string& v, const std::string& n) {
        s.solver.safety = parse_double(v, n);
    });
    with(cf, "time", "t_end", [&](const std::string& v, const std::string& n) {
        s.solver.t_end = parse_double(v, n);
    });
    with(cf, "time", "output_stride", [&](const std::string& v, const std::string& n) {
        const long long k = parse_int(v, n);
        if (k < 1) throw std::invalid_argument(n + ": must be >= 1");
        s.solver.output_stride = static_cast<std::size_t>(k);
    });
    with(cf, "time", "breakdown", [&](const std::string& v, const std::string& n) {
        s.solver.breakdown = parse_choice(v, n, {"halt", "continue"}) == 0
                                 ? BreakdownPolicy::halt
                                 : BreakdownPolicy::continue_with_event;
    });
    with(cf, "time", "value_cap", [&](const std::string& v, const std::string& n) {
        s.solver.value_cap = parse_double(v, n);
    });
    with(cf, "time", "strict", [&](const std::string& v, const std::string& n) {
        s.strict = parse_bool(v, n);
    });
    s.solver.validate();

    // Initial data. Centers default to the domain midpoint.
    s.initial.center = s.grid.kind == GeometryKind::rectangle ? 0.5 * s.grid.length_x
                       : s.grid.kind == GeometryKind::interval ? 0.5 * s.grid.length
                                                               : 0.0;
    s.initial.center_y = s.grid.kind == GeometryKind::rectangle ? 0.5 * s.grid.length_y : 0.0;
    with(cf, "initial", "family", [&](const std::string& v, const std::string& n) {
        static const std::vector<std::string> words = {"constant", "gaussian", "eigenfunction",
                                                       "barenblatt"};
        switch (parse_choice(v, n, words)) {
            case 0: s.initial.family = InitialFamily::constant; break;
            case 1: s.initial.family = InitialFamily::gaussian; break;
            case 2: s.initial.family = InitialFamily::eigenfunction; break;
            default: s.initial.family = InitialFamily::barenblatt; break;
        }
    });
    with(cf, "initial", "value", [&](const std::string& v, const std::string& n) {
        s.initial.value = parse_double(v, n);
    });
    with(cf, "initial", "amplitude", [&](const std::string& v, const std::string& n) {
        s.initial.amplitude = parse_double(v, n);
    });
    with(cf, "initial", "center", [&](const std::string& v, const std::string& n) {
        s.initial.center = parse_double(v, n);
    });
    with(cf, "initial", "center_y", [&](const std::string& v, const std::string& n) {
        s.initial.center_y = parse_double(v, n);
    });
    with(cf, "initial", "sigma", [&](const std::string& v, const std::string& n) {
        s.initial.sigma = parse_double(v, n);
    });
    if (s.initial.family == InitialFamily::gaussian && !(s.initial.sigma > 0.0))
        throw std::invalid_argument("initial.sigma must be > 0");
    if (s.initial.family == InitialFamily::eigenfunction) {
        if (s.grid.kind != GeometryKind::interval)
            throw std::invalid_argument("eigenfunction initial data needs an interval grid");
        if (s.boundary != BoundaryKind::dirichlet)
            throw std::invalid_argument("eigenfunction initial data needs model.boundary = dirichlet");
        if (s.variable != VarTag::u)
            throw std::invalid_argument("eigenfunction initial data needs model.variable = u");
        if (!(s.initial.amplitude > 0.0))
            throw std::invalid_argument("eigenfunction initial data needs initial.amplitude > 0");
    }

    for (std::size_t k = 0; k < cf.bumps.size(); ++k) {
        const auto& raw = cf.bumps[k];
        const std::string where = "bump" + std::to_string(k + 1);
        BarenblattBump b;
        if (const auto it = raw.find("sign"); it != raw.end())
            b.sign = parse_choice(it->second, where + ".sign", {"negative", "positive"}) == 0
                         ? BumpSign::negative
                         : BumpSign::positive;
        if (const auto it = raw.find("T"); it != raw.end())
            b.T = parse_double(it->second, where + ".T");
        if (const auto it = raw.find("x0"); it != raw.end())
            b.x0 = parse_double(it->second, where + ".x0");
        b.validate();
        s.exact.cfg.bumps.push_back(b);
    }
    with(cf, "exact", "times", [&](const std::string& v, const std::string& n) {
        s.exact.times = parse_double_list(v, n);
        if (s.exact.times.empty()) throw std::invalid_argument(n + ": empty list");
        for (const double t : s.exact.times)
            if (!(t >= 0.0)) throw std::invalid_argument(n + ": times must be >= 0");
    });
    with(cf, "exact", "horizon", [&](const std::string& v, const std::string& n) {
        s.exact.cfg.horizon = parse_double(v, n);
        if (!(s.exact.cfg.horizon > 0.0)) throw std::invalid_argument(n + ": must be > 0");
    });
    with(cf, "exact", "residual_dt", [&](const std::string& v, const std::string& n) {
        s.exact.residual_dt = parse_double(v, n);
        if (!(s.exact.residual_dt > 0.0)) throw std::invalid_argument(n + ": must be > 0");
    });

    const bool bumps_used =
        s.initial.family == InitialFamily::barenblatt || s.command == Command::verify_exact;
    if (!s.exact.cfg.bumps.empty() && !bumps_used)
        throw std::invalid_argument(
            "[bump] sections are only used by verify-exact or initial.family = barenblatt");
    if (s.initial.family == InitialFamily::barenblatt) {
        if (s.exact.cfg.bumps.empty())
            throw std::invalid_argument("initial.family = barenblatt needs [bump] sections");
        if (s.grid.kind == GeometryKind::rectangle)
            throw std::invalid_argument("barenblatt initial data needs a 1-d grid");
        if (s.grid.kind == GeometryKind::radial)
            for (const auto& b : s.exact.cfg.bumps)
                if (b.x0 != 0.0)
                    throw std::invalid_argument("radial barenblatt bumps must sit at x0 = 0");
    }
    if (s.command == Command::verify_exact) {
        if (s.exact.cfg.bumps.empty())
            throw std::invalid_argument("verify-exact needs at least one [bump] section");
        if (s.grid.kind != GeometryKind::interval)
            throw std::invalid_argument("verify-exact needs an interval grid");
    }

    with(cf, "output", "dir", [&](const std::string& v, const std::string&) { s.out_dir = v; });
    with(cf, "output", "prefix", [&](const std::string& v, const std::string& n) {
        if (v.find('/') != std::string::npos)
            throw std::invalid_argument(n + ": must not contain '/'");
        s.prefix = v;
    });

    // Particle defaults tie the reflecting box to the grid extent.
    s.particles.cfg.box_hi[0] =
        s.grid.kind == GeometryKind::rectangle ? s.grid.length_x : s.grid.length;
    s.particles.cfg.box_hi[1] =
        s.grid.kind == GeometryKind::rectangle ? s.grid.length_y : 1.0;
    with(cf, "particles", "count", [&](const std::string& v, const std::string& n) {
        s.particles.cfg.N = static_cast<int>(parse_int(v, n));
    });
    with(cf, "particles", "epsilon", [&](const std::string& v, const std::string& n) {
        s.particles.cfg.epsilon = parse_double(v, n);
    });
    with(cf, "particles", "dt", [&](const std::string& v, const std::string& n) {
        s.particles.cfg.dt = parse_double(v, n);
    });
    with(cf, "particles", "t_end", [&](const std::string& v, const std::string& n) {
        s.particles.cfg.t_end = parse_double(v, n);
    });
    with(cf, "particles", "domain", [&](const std::string& v, const std::string& n) {
        s.particles.cfg.domain = parse_choice(v, n, {"free", "reflecting"}) == 0
                                     ? DomainMode::free_space
                                     : DomainMode::reflecting_box;
    });
    with(cf, "particles", "box_lo", [&](const std::string& v, const std::string& n) {
        s.particles.cfg.box_lo[0] = parse_double(v, n);
    });
    with(cf, "particles", "box_hi", [&](const std::string& v, const std::string& n) {
        s.particles.cfg.box_hi[0] = parse_double(v, n);
    });
    with(cf, "particles", "box_lo_y", [&](const std::string& v, const std::string& n) {
        s.particles.cfg.box_lo[1] = parse_double(v, n);
    });
    with(cf, "particles", "box_hi_y", [&](const std::string& v, const std::string& n) {
        s.particles.cfg.box_hi[1] = parse_double(v, n);
    });
    with(cf, "particles", "seed", [&](const std::string& v, const std::string& n) {
        s.particles.cfg.seed = parse_uint64(v, n);
    });
    with(cf, "particles", "bandwidth", [&](const std::string& v, const std::string& n) {
        s.particles.bandwidth = parse_double(v, n);
        if (s.particles.bandwidth < 0.0) throw std::invalid_argument(n + ": must be >= 0");
    });
    with(cf, "particles", "stride", [&](const std::string& v, const std::string& n) {
        s.particles.stride = static_cast<int>(parse_int(v, n));
        if (s.particles.stride < 1) throw std::invalid_argument(n + ": must be >= 1");
    });
    with(cf, "particles", "compare", [&](const std::string& v, const std::string& n) {
        s.particles.compare = parse_bool(v, n);
    });
    with(cf, "particles", "compare_times", [&](const std::string& v, const std::string& n) {
        s.particles.compare_times = parse_double_list(v, n);
        for (const double t : s.particles.compare_times)
            if (!(t >= 0.0)) throw std::invalid_argument(n + ": times must be >= 0");
    });
    if (s.command == Command::particles) {
        s.particles.cfg.validate();
        if (s.grid.kind == GeometryKind::radial)
            throw std::invalid_argument("the particle model needs an interval or rectangle grid");
        if (s.particles.compare && s.solver.model != ModelKind::nonlocal)
            throw std::invalid_argument("particles.compare needs model.kind = nonlocal");
        if (s.variable != VarTag::u)
            throw std::invalid_argument("the particle model samples a density: model.variable = u");
    }

    with(cf, "regimes", "u0_max", [&](const std::string& v, const std::string& n) {
        s.regimes.u0_max = parse_double(v, n);
    });
    with(cf, "regimes", "A0", [&](const std::string& v, const std::string& n) {
        s.regimes.A0 = parse_double(v, n);
    });
    with(cf, "regimes", "mu", [&](const std::string& v, const std::string& n) {
        if (detail::trim(v) == "auto") {
            s.regimes.mu_auto = true;
            return;
        }
        s.regimes.mu = parse_double(v, n);
        s.regimes.mu_auto = false;
        if (!(s.regimes.mu > 0.0)) throw std::invalid_argument(n + ": must be > 0 or 'auto'");
    });
    with(cf, "regimes", "concavity", [&](const std::string& v, const std::string& n) {
        s.regimes.concavity = parse_bool(v, n);
    });
    with(cf, "regimes", "pohozaev", [&](const std::string& v, const std::string& n) {
        s.regimes.pohozaev = parse_bool(v, n);
    });
    with(cf, "regimes", "stability", [&](const std::string& v, const std::string& n) {
        s.regimes.stability = parse_bool(v, n);
    });
    with(cf, "regimes", "modes", [&](const std::string& v, const std::string& n) {
        s.regimes.modes = static_cast<int>(parse_int(v, n));
        if (s.regimes.modes < 1) throw std::invalid_argument(n + ": must be >= 1");
    });
    if (s.command == Command::regimes) {
        if (!s.regimes.any())
            throw std::invalid_argument(
                "regimes: enable at least one check (u0_max, A0, concavity, pohozaev, stability)");
        if (s.regimes.A0 && s.regimes.mu_auto && s.grid.kind != GeometryKind::interval)
            throw std::invalid_argument("regimes.mu = auto needs an interval grid");
        if (s.regimes.stability && s.grid.kind != GeometryKind::interval)
            throw std::invalid_argument("the stability scan needs an interval grid");
        if (s.regimes.concavity && s.variable != VarTag::v)
            throw std::invalid_argument("the concavity check reads shifted data: model.variable = v");
    }

    return s;
}

/// Parse + resolve in one step.
inline RunSpec resolve_spec(const std::string& text, Command command = Command::none) {
    return resolve_spec(parse_config_text(text), command);
}

/// Complete resolved state as ordered (key, value) pairs: the audit trail
/// embedded in every output file. Formatting is deterministic, so equal
/// specs produce byte-identical headers.
inline AuditEntries resolved_entries(const RunSpec& s) {
    AuditEntries e;
    const auto put = [&](const std::string& k, const std::string& v) { e.emplace_back(k, v); };
    const auto putd = [&](const std::string& k, double v) { put(k, format_g17(v)); };
    const auto putb = [&](const std::string& k, bool v) { put(k, v ? "true" : "false"); };

    put("run.command", command_name(s.command));
    putd("params.a", s.params.a);
    putd("params.b", s.params.b);
    putd("params.c", s.params.c);
    putd("params.d", s.params.d);
    put("params.n", std::to_string(s.params.n));
    switch (s.grid.kind) {
        case GeometryKind::interval:
            put("grid.kind", "interval");
            putd("grid.length", s.grid.length);
            put("grid.cells", std::to_string(s.grid.cells));
            break;
        case GeometryKind::rectangle:
            put("grid.kind", "rectangle");
            putd("grid.length_x", s.grid.length_x);
            putd("grid.length_y", s.grid.length_y);
            put("grid.cells_x", std::to_string(s.grid.cells_x));
            put("grid.cells_y", std::to_string(s.grid.cells_y));
            break;
        case GeometryKind::radial:
            put("grid.kind", "radial");
            putd("grid.radius", s.grid.radius);
            put("grid.cells", std::to_string(s.grid.cells));
            break;
    }
    put("model.kind", s.solver.model == ModelKind::local ? "local" : "nonlocal");
    if (s.solver.model == ModelKind::nonlocal) putd("model.epsilon", s.solver.epsilon);
    put("model.boundary", s.boundary == BoundaryKind::neumann ? "neumann" : "dirichlet");
    put("model.variable", s.variable == VarTag::u ? "u" : "v");
    put("time.dt_policy", s.solver.dt_policy == DtPolicy::adaptive ? "adaptive" : "fixed");
    if (s.solver.dt_policy == DtPolicy::fixed) putd("time.dt", s.solver.dt);
    else putd("time.safety", s.solver.safety);
    putd("time.t_end", s.solver.t_end);
    put("time.output_stride", std::to_string(s.solver.output_stride));
    put("time.breakdown", s.solver.breakdown == BreakdownPolicy::halt ? "halt" : "continue");
    putd("time.value_cap", s.solver.value_cap);
    putb("time.strict", s.strict);
    switch (s.initial.family) {
        case InitialFamily::constant:
            put("initial.family", "constant");
            putd("initial.value", s.initial.value);
            break;
        case InitialFamily::gaussian:
            put("initial.family", "gaussian");
            putd("initial.amplitude", s.initial.amplitude);
            putd("initial.center", s.initial.center);
            if (s.grid.kind == GeometryKind::rectangle) putd("initial.center_y", s.initial.center_y);
            putd("initial.sigma", s.initial.sigma);
            break;
        case InitialFamily::eigenfunction:
            put("initial.family", "eigenfunction");
            putd("initial.amplitude", s.initial.amplitude);
            break;
        case InitialFamily::barenblatt: put("initial.family", "barenblatt"); break;
    }
    for (std::size_t k = 0; k < s.exact.cfg.bumps.size(); ++k) {
        const auto& b = s.exact.cfg.bumps[k];
        const std::string key = "bump" + std::to_string(k + 1);
        put(key + ".sign", b.sign == BumpSign::positive ? "positive" : "negative");
        putd(key + ".T", b.T);
        putd(key + ".x0", b.x0);
    }
    if (!s.exact.cfg.bumps.empty()) {
        if (s.exact.times.empty()) put("exact.times", "auto");
        else {
            std::string list;
            for (std::size_t i = 0; i < s.exact.times.size(); ++i)
                list += (i ? "," : "") + format_g17(s.exact.times[i]);
            put("exact.times", list);
        }
        if (std::isfinite(s.exact.cfg.horizon)) putd("exact.horizon", s.exact.cfg.horizon);
        putd("exact.residual_dt", s.exact.residual_dt);
    }
    put("output.dir", s.out_dir);
    put("output.prefix", s.prefix);
    if (s.command == Command::particles) {
        put("particles.count", std::to_string(s.particles.cfg.N));
        putd("particles.epsilon", s.particles.cfg.epsilon);
        putd("particles.dt", s.particles.cfg.dt);
        putd("particles.t_end", s.particles.cfg.t_end);
        put("particles.domain",
            s.particles.cfg.domain == DomainMode::free_space ? "free" : "reflecting");
        if (s.particles.cfg.domain == DomainMode::reflecting_box) {
            putd("particles.box_lo", s.particles.cfg.box_lo[0]);
            putd("particles.box_hi", s.particles.cfg.box_hi[0]);
            if (s.grid.kind == GeometryKind::rectangle) {
                putd("particles.box_lo_y", s.particles.cfg.box_lo[1]);
                putd("particles.box_hi_y", s.particles.cfg.box_hi[1]);
            }
        }
        put("particles.seed", std::to_string(s.particles.cfg.seed));
        putd("particles.bandwidth", s.particles.bandwidth);
        put("particles.stride", std::to_string(s.particles.stride));
        putb("particles.compare", s.particles.compare);
        if (s.particles.compare) {
            if (s.particles.compare_times.empty()) put("particles.compare_times", "auto");
            else {
                std::string list;
                for (std::size_t i = 0; i < s.particles.compare_times.size(); ++i)
                    list += (i ? "," : "") + format_g17(s.particles.compare_times[i]);
                put("particles.compare_times", list);
            }
        }
    }
    if (s.command == Command::regimes) {
        if (s.regimes.u0_max) putd("regimes.u0_max", *s.regimes.u0_max);
        if (s.regimes.A0) {
            putd("regimes.A0", *s.regimes.A0);
            if (s.regimes.mu_auto) put("regimes.mu", "auto");
            else putd("regimes.mu", s.regimes.mu);
        }
        putb("regimes.concavity", s.regimes.concavity);
        putb("regimes.pohozaev", s.regimes.pohozaev);
        putb("regimes.stability", s.regimes.stability);
        if (s.regimes.stability) put("regimes.modes", std::to_string(s.regimes.modes));
    }
    return e;
}

/// Build the grid a RunSpec describes.
inline GridPtr make_grid(const RunSpec& s) {
    switch (s.grid.kind) {
        case GeometryKind::interval:
            return std::make_shared<const Grid>(Grid::interval(s.grid.length, s.grid.cells));
        case GeometryKind::rectangle:
            return std::make_shared<const Grid>(Grid::rectangle(
                s.grid.length_x, s.grid.length_y, s.grid.cells_x, s.grid.cells_y));
        case GeometryKind::radial:
            return std::make_shared<const Grid>(
                Grid::radial(s.grid.radius, s.grid.cells, s.params.n));
    }
    throw std::logic_error("make_grid: unreachable");
}

/// Sample the configured initial-data family on a grid. The eigenfunction
/// family is scaled so its weighted moment against the first Dirichlet
/// eigenfunction equals initial.amplitude; the barenblatt family evaluates
/// the bump list at t = 0 and, for u data, shifts by a/(2b).
inline Field make_initial(const RunSpec& s, const GridPtr& g) {
    const BoundaryKind bc = s.boundary;
    const VarTag tag = s.variable;
    switch (s.initial.family) {
        case InitialFamily::constant:
            return Field(g, bc, tag, std::vector<double>(g->size(), s.initial.value));
        case InitialFamily::gaussian: {
            const double amp = s.initial.amplitude;
            const double cx = s.initial.center, cy = s.initial.center_y;
            const double inv2s2 = 0.5 / (s.initial.sigma * s.initial.sigma);
            if (g->kind() == GeometryKind::rectangle)
                return Field::from_fn(g, bc, tag, [&](double x, double y) {
                    const double dx = x - cx, dy = y - cy;
                    return amp * std::exp(-(dx * dx + dy * dy) * inv2s2);
                });
            return Field::from_fn(g, bc, tag, [&](double x) {
                const double dx = x - cx;
                return amp * std::exp(-dx * dx * inv2s2);
            });
        }
        case InitialFamily::eigenfunction: {
            const EigenPair ep = dirichlet_first_numeric(g);
            double s2 = 0.0;
            for (std::size_t i = 0; i < ep.phi.size(); ++i)
                s2 += ep.phi[i] * ep.phi[i] * g->quad_weight(i);
            std::vector<double> vals(g->size());
            for (std::size_t i = 0; i < vals.size(); ++i)
                vals[i] = s.initial.amplitude / s2 * ep.phi[i];
            return Field(g, bc, tag, std::move(vals));
        }
        case InitialFamily::barenblatt: {
            const ValidityReport rep = validate_multibump(s.exact.cfg, s.params);
            if (!rep.valid)
                throw std::invalid_argument(
                    "barenblatt initial data: bump configuration is inadmissible");
            const double shift = tag == VarTag::u ? s.params.parabolicity_threshold() : 0.0;
            return Field::from_fn(g, bc, tag, [&](double x) {
                return multibump_eval(s.exact.cfg, x, 0.0, s.params) + shift;
            });
        }
    }
    throw std::logic_error("make_initial: unreachable");
}

}  // namespace ard
