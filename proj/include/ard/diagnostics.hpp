#pragma once

/// @file diagnostics.hpp
/// Functionals used to certify dissipation or detect blow-up:
///
///   mass, entropy E[u] = int a u(log u - 1) - b u^2 and its dissipation,
///   the eigenfunction moment A(t) = int phi u with its ODE threshold and
///   blow-up time bound, and the concavity machinery Psi, E(t), H, and the
///   pointwise condition s^m h(s) >= 2 H(s).
///
/// Every quadrature is the grid's own weight vector, the same one used to
/// normalize eigenfunctions, so the discrete Jensen inequality
/// sum(u^2 phi w) >= (sum(u phi w))^2 holds exactly.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ard/eigen.hpp"
#include "ard/grid.hpp"
#include "ard/params.hpp"
#include "ard/solver.hpp"

namespace ard {

inline double mass(const Field& f) { return integrate(f); }

namespace detail {

constexpr double u_floor = 1e-14;

inline void require_nonnegative(const Field& f, const char* who) {
    if (f.min() < -1e-10)
        throw std::invalid_argument(std::string(who) + ": field has negative samples");
}

/// |grad f|^2 per sample: central differences inside, one-sided at ends.
inline std::vector<double> gradient_sq(const Field& f) {
    const Grid& g = f.grid();
    const double h = g.spacing();
    std::vector<double> out(f.size(), 0.0);

    auto line = [&](long n, long stride, long offset) {
        if (n < 2) return;
        auto at = [&](long i) { return f[offset + i * stride]; };
        for (long i = 0; i < n; ++i) {
            double d;
            if (i == 0)
                d = (at(1) - at(0)) / h;
            else if (i == n - 1)
                d = (at(n - 1) - at(n - 2)) / h;
            else
                d = (at(i + 1) - at(i - 1)) / (2.0 * h);
            out[offset + i * stride] += d * d;
        }
    };

    if (g.kind() == GeometryKind::rectangle) {
        const long nx = static_cast<long>(g.axis_samples_x());
        const long ny = static_cast<long>(g.axis_samples_y());
        for (long j = 0; j < ny; ++j) line(nx, 1, j * nx);
        for (long i = 0; i < nx; ++i) line(ny, nx, i);
    } else {
        line(static_cast<long>(f.size()), 1, 0);
    }
    return out;
}

}  // namespace detail

/// E[u] = sum (a u (log u - 1) - b u^2) w; samples at or below the floor
/// contribute only their -b u^2 part (u log u -> 0).
inline double entropy(const Field& f, const Params& p) {
    detail::require_nonnegative(f, "entropy");
    double e = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double u = f[i];
        double t = -p.b * u * u;
        if (u > detail::u_floor) t += p.a * u * (std::log(u) - 1.0);
        e += t * f.grid().quad_weight(i);
    }
    return e;
}

/// dE/dt along the local flow: -sum (1/u)(a-2bu)^2 |grad u|^2 w  (<= 0).
inline double entropy_dissipation(const Field& f, const Params& p) {
    detail::require_nonnegative(f, "entropy_dissipation");
    const std::vector<double> gsq = detail::gradient_sq(f);
    double d = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double u = std::max(f[i], detail::u_floor);
        const double m = effective_diffusivity(f[i], p);
        d -= m * m * gsq[i] / u * f.grid().quad_weight(i);
    }
    return d;
}

inline double parabolicity_margin(const Field& f, const Params& p) {
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.size(); ++i)
        margin = std::min(margin, effective_diffusivity(f[i], p));
    return margin;
}

/// A = sum phi u w, the moment against the unit-mass eigenfunction.
inline double kaplan_A(const Field& f, const EigenPair& ep) {
    if (!f.grid().same_layout(ep.phi.grid()))
        throw std::invalid_argument("kaplan_A: field and eigenpair live on different grids");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        acc += ep.phi[i] * f[i] * f.grid().quad_weight(i);
    return acc;
}

/// Moment threshold max(mu a - c, 0)/(mu b - d); above it A(t) blows up.
inline double kaplan_threshold(const Params& p, double mu) {
    if (!(mu * p.b > p.d))
        throw std::invalid_argument("kaplan_threshold: requires mu b > d");
    return std::max(mu * p.a - p.c, 0.0) / (mu * p.b - p.d);
}

/// Upper bound for the blow-up time of A' >= (c - mu a) A + (mu b - d) A^2,
/// valid when A0 exceeds the threshold; std::nullopt otherwise. The closed
/// form log1p((c - mu a)/((mu b - d) A0))/(c - mu a) covers both signs of
/// c - mu a; at c = mu a it degenerates to the limit 1/((mu b - d) A0).
inline std::optional<double> kaplan_tstar(const Params& p, double mu, double A0) {
    const double gamma = mu * p.b - p.d;
    if (!(gamma > 0.0)) throw std::invalid_argument("kaplan_tstar: requires mu b > d");
    if (!(A0 > kaplan_threshold(p, mu)) || !(A0 > 0.0)) return std::nullopt;
    const double beta = p.c - mu * p.a;
    if (beta == 0.0) return 1.0 / (gamma * A0);
    return std::log1p(beta / (gamma * A0)) / beta;
}

struct ConcavityConfig {
    double m = 2.0;  ///< exponent of the porous-medium nonlinearity, > 1
    std::function<double(double)> h;  ///< reaction in the v variable
    /// Concavity exponent in (0, (m-1)/(m+1)); NaN selects the midpoint.
    double alpha = std::numeric_limits<double>::quiet_NaN();

    double effective_alpha() const {
        return std::isnan(alpha) ? (m - 1.0) / (2.0 * (m + 1.0)) : alpha;
    }
    void validate() const {
        if (!(m > 1.0)) throw std::invalid_argument("ConcavityConfig: m must be > 1");
        const double a = effective_alpha();
        if (!(a > 0.0) || !(a < (m - 1.0) / (m + 1.0)))
            throw std::invalid_argument("ConcavityConfig: alpha must lie in (0, (m-1)/(m+1))");
        if (!h) throw std::invalid_argument("ConcavityConfig: reaction handle h is empty");
    }
};

/// Config with the reaction the substitution u = v + a/(2b) induces:
/// h(s) = (c - d a/(2b) - d s)(s + a/(2b)).
inline ConcavityConfig default_concavity(const Params& p) {
    ConcavityConfig cfg;
    const double shift = p.parabolicity_threshold();
    cfg.h = [c = p.c, d = p.d, shift](double s) { return (c - d * shift - d * s) * (s + shift); };
    return cfg;
}

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                               double flo, double fmid, double fhi, double tol, int depth) {
    const double mid = 0.5 * (lo + hi);
    const double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
    const double fl = f(lmid), fr = f(rmid);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, lo, mid, flo, fl, fmid, tol / 2.0, depth - 1) +
           adaptive_simpson(f, mid, hi, fmid, fr, fhi, tol / 2.0, depth - 1);
}

inline double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                 double tol) {
    if (hi <= lo) return 0.0;
    const double mid = 0.5 * (lo + hi);
    return adaptive_simpson(f, lo, hi, f(lo), f(mid), f(hi), tol, 40);
}

}  // namespace detail

/// H(s) = int_0^s m t^{m-1} h(t) dt by adaptive quadrature (tol 1e-10).
inline double concavity_H(double s, const ConcavityConfig& cfg) {
    cfg.validate();
    if (s < 0.0) throw std::invalid_argument("concavity_H: s must be >= 0");
    if (s == 0.0) return 0.0;
    auto integrand = [&](double t) { return cfg.m * std::pow(t, cfg.m - 1.0) * cfg.h(t); };
    return detail::integrate_adaptive(integrand, 0.0, s, 1e-10);
}

struct GgReport {
    bool holds = false;         ///< s^m h(s) >= 2H(s) on every sample
    bool boundary_tie = false;  ///< equality attained within tolerance somewhere
    double min_value = 0.0;     ///< min of s^m h(s) - 2H(s)
    double min_s = 0.0;
    double first_violation = std::numeric_limits<double>::quiet_NaN();
};

/// Samples s^m h(s) - 2H(s) at s = 0 and log-spaced points of (0, s_max].
inline GgReport check_gG(const ConcavityConfig& cfg, double s_max, int samples) {
    cfg.validate();
    if (!(s_max > 0.0)) throw std::invalid_argument("check_gG: s_max must be > 0");
    if (samples < 2) throw std::invalid_argument("check_gG: samples must be >= 2");

    GgReport rep;
    rep.holds = true;
    rep.min_value = std::numeric_limits<double>::infinity();

    const double lo = s_max * 1e-6;
    for (int k = 0; k <= samples; ++k) {
        const double s =
            k == 0 ? 0.0 : lo * std::pow(s_max / lo, double(k - 1) / double(samples - 1));
        const double lhs = std::pow(s, cfg.m) * cfg.h(s);
        const double rhs = 2.0 * concavity_H(s, cfg);
        const double r = lhs - rhs;
        // Violations are judged with an absolute floor so rounding noise
        // never trips the check; ties only against the local scale, so a
        // genuine equality case is flagged but a strict r ~ s^k near zero
        // is not.
        const double viol_tol = 1e-9 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
        const double tie_tol = 1e-9 * std::max(std::abs(lhs), std::abs(rhs));
        if (r < rep.min_value) {
            rep.min_value = r;
            rep.min_s = s;
        }
        if (r < -viol_tol) {
            rep.holds = false;
            if (std::isnan(rep.first_violation)) rep.first_violation = s;
        } else if (s > 0.0 && std::abs(r) <= tie_tol) {
            rep.boundary_tie = true;
        }
    }
    return rep;
}

/// Concavity energy E = (b/2) sum |grad v^m|^2 w + sum H(v) w of one field.
/// Values are clamped at zero before powers, matching the series routine.
inline double concavity_energy(const Field& v, const ConcavityConfig& cfg, const Params& p) {
    cfg.validate();
    double hterm = 0.0;
    std::vector<double> vm(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double vi = std::max(v[i], 0.0);
        hterm += concavity_H(vi, cfg) * v.grid().quad_weight(i);
        vm[i] = std::pow(vi, cfg.m);
    }
    const std::vector<double> gsq = detail::gradient_sq(v.with_values(std::move(vm)));
    double grad_term = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) grad_term += gsq[i] * v.grid().quad_weight(i);
    return 0.5 * p.b * grad_term + hterm;
}

struct DiagnosticsSeries {
    std::vector<double> times;
    std::vector<double> mass;
    std::vector<double> entropy;
    std::vector<double> dissipation;
    std::vector<double> margin;
    std::vector<double> kaplan_a;  ///< NaN when no eigenpair was supplied
    std::vector<double> psi;       ///< NaN outside concavity post-processing
    std::vector<double> energy;    ///< NaN outside concavity post-processing
    std::vector<Event> events;
};

/// Per-snapshot functionals of a u-form trajectory.
inline DiagnosticsSeries compute_series(const RunResult& r, const Params& p,
                                        const EigenPair* ep = nullptr) {
    DiagnosticsSeries s;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        const Field& f = r.snapshots[k];
        if (f.tag() != VarTag::u)
            throw std::invalid_argument("compute_series: snapshots must carry u values");
        s.times.push_back(r.times[k]);
        s.mass.push_back(mass(f));
        s.entropy.push_back(f.min() < -1e-10 ? nan : entropy(f, p));
        s.dissipation.push_back(f.min() < -1e-10 ? nan : entropy_dissipation(f, p));
        s.margin.push_back(parabolicity_margin(f, p));
        s.kaplan_a.push_back(ep ? kaplan_A(f, *ep) : nan);
        s.psi.push_back(nan);
        s.energy.push_back(nan);
    }
    s.events = r.events;
    return s;
}

struct ConcavityReport {
    DiagnosticsSeries series;           ///< times, psi, energy (and mass of v)
    std::vector<double> psi_prime;      ///< Psi'(t_k) = sum v^{m+1} w
    std::vector<double> concavity_margin;  ///< Psi Psi'' - (1+alpha) Psi'^2, NaN at ends
    double alpha = 0.0;
    double energy0 = 0.0;
    bool energy0_positive = false;
    double onset_t0 = std::numeric_limits<double>::quiet_NaN();
    double tstar_bound = std::numeric_limits<double>::quiet_NaN();
};

/// Concavity-method post-processing of a v-form trajectory with v >= 0:
/// Psi(t) = int_0^t sum v^{m+1} w, E(t) = (b/2) sum |grad v^m|^2 w + sum H(v) w.
/// The onset time is the first snapshot where
/// [1 - sqrt((m+1)(alpha+1)/(2m))] Psi'(t) >= Psi'(0), and the reported bound
/// is t* <= (Psi(t0) + alpha t0 Psi'(t0))/(alpha Psi'(t0)).
inline ConcavityReport concavity_series(const RunResult& r, const ConcavityConfig& cfg,
                                        const Params& p) {
    cfg.validate();
    if (r.times.empty()) throw std::invalid_argument("concavity_series: empty trajectory");

    ConcavityReport rep;
    rep.alpha = cfg.effective_alpha();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::size_t n = r.times.size();

    for (std::size_t k = 0; k < n; ++k) {
        const Field& v = r.snapshots[k];
        if (v.tag() != VarTag::v)
            throw std::invalid_argument("concavity_series: snapshots must carry v values");
        if (v.min() < -1e-6)
            throw std::invalid_argument("concavity_series: snapshots must satisfy v >= 0");

        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += std::pow(std::max(v[i], 0.0), cfg.m + 1.0) * v.grid().quad_weight(i);

        rep.psi_prime.push_back(s);
        rep.series.times.push_back(r.times[k]);
        rep.series.mass.push_back(mass(v));
        rep.series.energy.push_back(concavity_energy(v, cfg, p));
        rep.series.entropy.push_back(nan);
        rep.series.dissipation.push_back(nan);
        rep.series.margin.push_back(nan);
        rep.series.kaplan_a.push_back(nan);
    }
    rep.series.events = r.events;
    rep.energy0 = rep.series.energy.front();
    rep.energy0_positive = rep.energy0 > 0.0;

    // Psi by trapezoid in time of Psi'.
    rep.series.psi.resize(n);
    rep.series.psi[0] = 0.0;
    for (std::size_t k = 1; k < n; ++k)
        rep.series.psi[k] =
            rep.series.psi[k - 1] + 0.5 * (rep.psi_prime[k] + rep.psi_prime[k - 1]) *
                                        (r.times[k] - r.times[k - 1]);

    // Central second differences of Psi (= first differences of Psi').
    rep.concavity_margin.assign(n, nan);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double ddpsi =
            (rep.psi_prime[k + 1] - rep.psi_prime[k - 1]) / (r.times[k + 1] - r.times[k - 1]);
        rep.concavity_margin[k] = rep.series.psi[k] * ddpsi -
                                  (1.0 + rep.alpha) * rep.psi_prime[k] * rep.psi_prime[k];
    }

    const double factor = 1.0 - std::sqrt((cfg.m + 1.0) * (rep.alpha + 1.0) / (2.0 * cfg.m));
    for (std::size_t k = 0; k < n; ++k) {
        if (factor * rep.psi_prime[k] >= rep.psi_prime[0] && rep.psi_prime[k] > 0.0 &&
            r.times[k] > 0.0) {
            rep.onset_t0 = r.times[k];
            rep.tstar_bound = (rep.series.psi[k] + rep.alpha * r.times[k] * rep.psi_prime[k]) /
                              (rep.alpha * rep.psi_prime[k]);
            break;
        }
    }
    return rep;
}

}  // namespace ard
