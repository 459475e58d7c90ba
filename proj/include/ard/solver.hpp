#pragma once

/// @file solver.hpp
/// Explicit conservative time stepping for
///
///   local    : du/dt = Lap((a - bu)u) + (c - du)u
///   nonlocal : du/dt = div(a grad u - u grad(V_eps * u)) + (c - du)u
///
/// Fluxes live on faces between samples and telescope, so under Neumann
/// boundaries with c = d = 0 the quadrature-weighted mass is conserved to
/// accumulation roundoff. The local model is integrated only where it is
/// forward-parabolic (a - 2bu > 0); crossings are reported as events and,
/// by policy, halt the run or mark its remainder untrusted. The nonlocal
/// model has linear diffusion a and stays well posed for every eps > 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "ard/grid.hpp"
#include "ard/kernel.hpp"
#include "ard/params.hpp"

namespace ard {

enum class ModelKind { local, nonlocal };
enum class DtPolicy { fixed, adaptive };
enum class BreakdownPolicy { halt, continue_with_event };
enum class EventKind { parabolicity_lost, negative_density, value_cap_exceeded, completed };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::parabolicity_lost: return "parabolicity_lost";
        case EventKind::negative_density: return "negative_density";
        case EventKind::value_cap_exceeded: return "value_cap_exceeded";
        case EventKind::completed: return "completed";
    }
    return "unknown";
}

struct Event {
    double t = 0.0;
    EventKind kind = EventKind::completed;
    std::string info;
};

struct SolverConfig {
    ModelKind model = ModelKind::local;
    double epsilon = 0.05;  ///< mollification width, nonlocal model only
    DtPolicy dt_policy = DtPolicy::adaptive;
    double dt = 0.0;        ///< step size under the fixed policy
    double safety = 0.4;    ///< CFL fraction sigma under the adaptive policy
    double t_end = 1.0;
    BreakdownPolicy breakdown = BreakdownPolicy::halt;
    std::size_t output_stride = 1;  ///< snapshot every this many steps
    double value_cap = 1e12;

    void validate() const {
        if (!(safety > 0.0) || safety > 1.0)
            throw std::invalid_argument("SolverConfig: safety must lie in (0, 1]");
        if (model == ModelKind::nonlocal && !(epsilon > 0.0))
            throw std::invalid_argument("SolverConfig: nonlocal model needs epsilon > 0");
        if (dt_policy == DtPolicy::fixed && !(dt > 0.0))
            throw std::invalid_argument("SolverConfig: fixed policy needs dt > 0");
        if (!(t_end >= 0.0)) throw std::invalid_argument("SolverConfig: t_end must be >= 0");
        if (output_stride == 0) throw std::invalid_argument("SolverConfig: output_stride must be >= 1");
        if (!(value_cap > 0.0)) throw std::invalid_argument("SolverConfig: value_cap must be > 0");
    }
};

struct RunResult {
    std::vector<double> times;     ///< snapshot times, strictly increasing
    std::vector<Field> snapshots;  ///< one field per recorded time
    std::vector<Event> events;     ///< time-ordered
    bool untrusted = false;        ///< continued past a breakdown, or blew up

    bool completed() const {
        return !events.empty() && events.back().kind == EventKind::completed;
    }
};

namespace detail {

inline int space_dims(const Grid& g) {
    switch (g.kind()) {
        case GeometryKind::interval: return 1;
        case GeometryKind::rectangle: return 2;
        case GeometryKind::radial: return g.dim();
    }
    return 1;
}

inline void require_u(const Field& f, const char* who) {
    if (f.tag() != VarTag::u)
        throw std::invalid_argument(std::string(who) + ": field must carry u values");
}

inline void require_dt(double dt, const char* who) {
    if (!(dt > 0.0)) throw std::invalid_argument(std::string(who) + ": dt must be > 0");
}

/// Divergence of face fluxes on a node-centered line of n samples:
/// out[i] += (F[i] - F[i-1]) / (w_i h) with boundary faces already folded
/// into F (Neumann: zero; Dirichlet: handled by pinned end values).
/// w_i is 1 except 0.5 at the end nodes (trapezoid control volumes).
inline void add_line_divergence(const std::vector<double>& face_flux, double h, double dt,
                                std::vector<double>& out, long stride, long offset, long n) {
    out[offset] += dt * face_flux[0] / (0.5 * h);
    for (long i = 1; i + 1 < n; ++i)
        out[offset + i * stride] += dt * (face_flux[i] - face_flux[i - 1]) / h;
    out[offset + (n - 1) * stride] += dt * (-face_flux[n - 2]) / (0.5 * h);
}

/// Advance one explicit step of du/dt = div(flux) + g(u) where the face flux
/// between samples i and i+1 along each axis is supplied by `face`. Neumann
/// folds zero boundary fluxes; Dirichlet pins boundary samples to 0.
template <class FaceFluxX, class FaceFluxY>
Field step_flux_form(const Field& f, const Params& p, double dt, FaceFluxX face_x,
                     FaceFluxY face_y) {
    const Grid& g = f.grid();
    const double h = g.spacing();
    const bool dirichlet = f.boundary() == BoundaryKind::dirichlet;
    std::vector<double> out(f.values().begin(), f.values().end());

    if (g.kind() == GeometryKind::radial) {
        const long n = static_cast<long>(g.size());
        // Face areas omega_n r^{n-1} at r = (i+1)h; the axis face r = 0 carries
        // zero flux by symmetry. Control volume of cell i is quad_weight(i).
        for (long i = 0; i < n; ++i) {
            const double left = i == 0 ? 0.0
                                       : unit_sphere_area(p.n) *
                                             std::pow(double(i) * h, p.n - 1) * face_x(i - 1);
            double right = 0.0;
            if (i + 1 < n)
                right = unit_sphere_area(p.n) * std::pow(double(i + 1) * h, p.n - 1) * face_x(i);
            else if (dirichlet)
                right = unit_sphere_area(p.n) * std::pow(double(n) * h, p.n - 1) * face_x(i);
            out[i] += dt * (right - left) / g.quad_weight(i);
        }
    } else if (g.kind() == GeometryKind::interval) {
        const long n = static_cast<long>(g.size());
        std::vector<double> face(n - 1);
        for (long i = 0; i + 1 < n; ++i) face[i] = face_x(i);
        add_line_divergence(face, h, dt, out, 1, 0, n);
        if (dirichlet) out[0] = out[n - 1] = 0.0;
    } else {
        const long nx = static_cast<long>(g.axis_samples_x());
        const long ny = static_cast<long>(g.axis_samples_y());
        std::vector<double> face(std::max(nx, ny));
        for (long j = 0; j < ny; ++j) {
            for (long i = 0; i + 1 < nx; ++i) face[i] = face_x(j * nx + i);
            add_line_divergence(face, h, dt, out, 1, j * nx, nx);
        }
        for (long i = 0; i < nx; ++i) {
            for (long j = 0; j + 1 < ny; ++j) face[j] = face_y(j * nx + i);
            add_line_divergence(face, h, dt, out, nx, i, ny);
        }
        if (dirichlet) {
            for (long i = 0; i < nx; ++i) out[i] = out[(ny - 1) * nx + i] = 0.0;
            for (long j = 0; j < ny; ++j) out[j * nx] = out[j * nx + nx - 1] = 0.0;
        }
    }

    if (p.c != 0.0 || p.d != 0.0) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += dt * reaction(f[i], p);
        if (dirichlet && g.kind() != GeometryKind::radial) {
            // reaction(0) = 0, so re-pinning only guards modified boundary data
            if (g.kind() == GeometryKind::interval) {
                out.front() = out.back() = 0.0;
            } else {
                const long nx = static_cast<long>(g.axis_samples_x());
                const long ny = static_cast<long>(g.axis_samples_y());
                for (long i = 0; i < nx; ++i) out[i] = out[(ny - 1) * nx + i] = 0.0;
                for (long j = 0; j < ny; ++j) out[j * nx] = out[j * nx + nx - 1] = 0.0;
            }
        }
    }
    return f.with_values(std::move(out));
}

inline double max_face_speed(const Field& f, const Kernel& k) {
    const Grid& g = f.grid();
    const std::vector<double> w = convolve(f, k);
    const double h = g.spacing();
    double speed = 0.0;
    if (g.kind() == GeometryKind::interval) {
        for (std::size_t i = 0; i + 1 < w.size(); ++i)
            speed = std::max(speed, std::abs(w[i + 1] - w[i]) / h);
    } else {
        const std::size_t nx = g.axis_samples_x(), ny = g.axis_samples_y();
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i + 1 < nx; ++i)
                speed = std::max(speed, std::abs(w[j * nx + i + 1] - w[j * nx + i]) / h);
        for (std::size_t j = 0; j + 1 < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i)
                speed = std::max(speed, std::abs(w[(j + 1) * nx + i] - w[j * nx + i]) / h);
    }
    return speed;
}

}  // namespace detail

/// Stable explicit step for the current field state: the diffusion bound
/// sigma h^2 / (2 n_dims max|phi'(u)|) capped by the reaction bound
/// sigma / max|c - 2du|, both floored at 1e-10 to avoid division by zero.
inline double cfl_dt(const Field& f, const Params& p, double sigma) {
    if (!(sigma > 0.0) || sigma > 1.0)
        throw std::invalid_argument("cfl_dt: sigma must lie in (0, 1]");
    const double floor = 1e-10;
    double max_diff = 0.0, max_react = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(effective_diffusivity(f[i], p)));
        max_react = std::max(max_react, std::abs(reaction_derivative(f[i], p)));
    }
    const double h = f.grid().spacing();
    const int nd = detail::space_dims(f.grid());
    const double dt_diff = sigma * h * h / (2.0 * nd * std::max(max_diff, floor));
    const double dt_react = sigma / std::max(max_react, floor);
    return std::min(dt_diff, dt_react);
}

/// One explicit conservative step of the local model.
inline Field step_local(const Field& f, const Params& p, double dt) {
    detail::require_u(f, "step_local");
    detail::require_dt(dt, "step_local");
    if (f.grid().kind() == GeometryKind::radial && f.grid().dim() != p.n)
        throw std::invalid_argument("step_local: radial grid dimension must match n");
    const double h = f.grid().spacing();
    std::vector<double> phi(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) phi[i] = flux(f[i], p);

    const Grid& g = f.grid();
    if (g.kind() == GeometryKind::radial && f.boundary() == BoundaryKind::dirichlet) {
        // outer face: ghost value u = 0 => phi = 0 at distance h
        return detail::step_flux_form(
            f, p, dt,
            [&](long i) {
                const long n = static_cast<long>(f.size());
                const double right = i + 1 < n ? phi[i + 1] : 0.0;
                return (right - phi[i]) / h;
            },
            [](long) { return 0.0; });
    }
    auto face_x = [&](long i) { return (phi[i + 1] - phi[i]) / h; };
    auto face_y = [&](long idx) {
        const long nx = static_cast<long>(g.axis_samples_x());
        return (phi[idx + nx] - phi[idx]) / h;
    };
    return detail::step_flux_form(f, p, dt, face_x, face_y);
}

/// One explicit step of the nonlocal model: linear diffusion a grad u plus
/// the aggregation drift -u grad(V_eps * u), upwinded by the drift sign.
inline Field step_nonlocal(const Field& f, const Params& p, const Kernel& k, double dt) {
    detail::require_u(f, "step_nonlocal");
    detail::require_dt(dt, "step_nonlocal");
    const Grid& g = f.grid();
    if (g.kind() == GeometryKind::radial)
        throw std::invalid_argument("step_nonlocal: radial grids are not supported");
    const double h = g.spacing();
    const std::vector<double> w = convolve(f, k);

    auto face = [&](long i, long j) {
        // face between samples i and j = i + stride along one axis
        const double vel = -(w[j] - w[i]) / h;
        const double upwind = vel >= 0.0 ? f[i] : f[j];
        return p.a * (f[j] - f[i]) / h + upwind * vel;
    };
    auto face_x = [&](long i) { return face(i, i + 1); };
    auto face_y = [&](long idx) {
        const long nx = static_cast<long>(g.axis_samples_x());
        return face(idx, idx + nx);
    };
    return detail::step_flux_form(f, p, dt, face_x, face_y);
}

namespace detail {

inline double nonlocal_dt(const Field& f, const Params& p, const Kernel& k, double sigma) {
    const double floor = 1e-10;
    const double h = f.grid().spacing();
    const int nd = space_dims(f.grid());
    double max_react = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        max_react = std::max(max_react, std::abs(reaction_derivative(f[i], p)));
    const double dt_diff = sigma * h * h / (2.0 * nd * std::max(p.a, floor));
    const double dt_adv = sigma * h / std::max(max_face_speed(f, k), floor);
    const double dt_react = sigma / std::max(max_react, floor);
    return std::min(dt_diff, std::min(dt_adv, dt_react));
}

}  // namespace detail

/// Integrate from f0 to t_end, recording snapshots every output_stride steps
/// plus the initial and final states. Events are recorded in time order; the
/// `untrusted` flag marks trajectories continued past a parabolicity loss or
/// terminated by a value explosion.
inline RunResult run(const Field& f0, const Params& p, const SolverConfig& cfg) {
    p.validate();
    cfg.validate();
    detail::require_u(f0, "run");

    Kernel kernel;
    if (cfg.model == ModelKind::nonlocal) kernel = make_kernel(f0.grid_ptr(), cfg.epsilon, p);

    RunResult r;
    Field f = f0;
    double t = 0.0;
    bool seen_parab = false, seen_neg = false;

    r.times.push_back(0.0);
    r.snapshots.push_back(f);

    // Returns true when the run must halt at time tt.
    auto inspect = [&](double tt) {
        const double lo = f.min(), hi = f.max();
        if (!std::isfinite(lo) || !std::isfinite(hi) ||
            std::max(std::abs(lo), std::abs(hi)) > cfg.value_cap) {
            r.events.push_back({tt, EventKind::value_cap_exceeded,
                                "non-finite or above value_cap " + std::to_string(cfg.value_cap)});
            r.untrusted = true;
            return true;
        }
        if (lo < -1e-8 && !seen_neg) {
            seen_neg = true;
            r.events.push_back({tt, EventKind::negative_density,
                                "min u = " + std::to_string(lo)});
        }
        if (cfg.model == ModelKind::local) {
            const double margin = effective_diffusivity(hi, p);
            if (margin < -1e-12 && !seen_parab) {
                seen_parab = true;
                r.events.push_back({tt, EventKind::parabolicity_lost,
                                    "min(a - 2bu) = " + std::to_string(margin)});
                if (cfg.breakdown == BreakdownPolicy::halt) return true;
                r.untrusted = true;
            }
        }
        return false;
    };

    if (inspect(0.0)) return r;

    std::size_t steps = 0;
    while (t < cfg.t_end) {
        double dt = cfg.dt_policy == DtPolicy::fixed
                        ? cfg.dt
                        : (cfg.model == ModelKind::local
                               ? cfl_dt(f, p, cfg.safety)
                               : detail::nonlocal_dt(f, p, kernel, cfg.safety));
        bool last = false;
        if (dt >= (cfg.t_end - t) * (1.0 - 1e-12)) {
            dt = cfg.t_end - t;
            last = true;
        }
        if (!(dt > 0.0) || dt < 1e-18 * std::max(1.0, cfg.t_end))
            throw std::runtime_error("run: time step underflow");

        f = cfg.model == ModelKind::local ? step_local(f, p, dt)
                                          : step_nonlocal(f, p, kernel, dt);
        const double t_next = last ? cfg.t_end : t + dt;
        if (!(t_next > t)) throw std::runtime_error("run: time step underflow");
        t = t_next;
        ++steps;

        const bool halt_now = inspect(t);
        if (halt_now || last || steps % cfg.output_stride == 0) {
            r.times.push_back(t);
            r.snapshots.push_back(f);
        }
        if (halt_now) return r;
        if (last) break;
    }

    r.events.push_back({cfg.t_end, EventKind::completed, ""});
    return r;
}

/// Same dynamics through the substitution u = v + a/(2b); exact profiles of
/// the c = d = 0 equation dv/dt = -b Lap(v^2) can be fed in directly.
inline RunResult run_v_form(const Field& v0, const Params& p, const SolverConfig& cfg) {
    if (v0.tag() != VarTag::v)
        throw std::invalid_argument("run_v_form: field must carry v values");
    RunResult r = run(from_v(v0, p), p, cfg);
    for (auto& s : r.snapshots) s = to_v(s, p);
    return r;
}

}  // namespace ard
