#pragma once

/// @file barenblatt.hpp
/// Explicit Barenblatt-type profiles for the shifted variable v = u - a/(2b),
/// which with c = d = 0 evolves by dv/dt + b*Lap(v^2) = 0. Two families:
///
///   positive (blow-up) : v(x,t) =  [(T-t)^{2/(n+2)} - |x-x0|^2/(4(n+2))]_+ / (b(T-t)),  t < T
///   negative (decaying): v(x,t) = -[(T+t)^{2/(n+2)} - |x-x0|^2/(4(n+2))]_+ / (b(T+t)),  t >= 0
///
/// Finitely many bumps may be superposed as long as their supports stay
/// pairwise disjoint on the intended existence window; validate_multibump
/// evaluates the closed-form separation conditions that guarantee this.
/// Centers live on a line: every grid this library evolves is 1-D or radial,
/// and a radial bump must sit at the origin.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ard/grid.hpp"
#include "ard/params.hpp"

namespace ard {

enum class BumpSign { positive, negative };

struct BarenblattBump {
    BumpSign sign = BumpSign::negative;
    double T = 1.0;    ///< time offset, > 0
    double x0 = 0.0;   ///< center coordinate

    void validate() const {
        if (!(T > 0.0)) throw std::invalid_argument("BarenblattBump: T must be > 0");
    }
};

struct MultiBumpConfig {
    std::vector<BarenblattBump> bumps;
    /// Optional validity horizon. Must be supplied when no positive bump
    /// exists but negative-negative separation needs a finite probe time;
    /// otherwise defaults to min T over positive bumps.
    double horizon = std::numeric_limits<double>::quiet_NaN();
};

struct ConditionCheck {
    std::string name;
    double lhs = 0.0;  ///< value that must stay strictly below rhs
    double rhs = 0.0;
    bool ok = false;
};

struct ValidityReport {
    std::vector<ConditionCheck> checks;
    bool valid = false;
    double tau = 0.0;  ///< existence window used by the checks (may be +inf)
};

namespace detail {

inline double bump_eval_unchecked(const BarenblattBump& b, double x, double t, const Params& p) {
    const double shifted = b.sign == BumpSign::positive ? b.T - t : b.T + t;
    const double dx = x - b.x0;
    const double paren =
        std::pow(shifted, 2.0 / (p.n + 2)) - dx * dx / (4.0 * (p.n + 2));
    if (paren <= 0.0) return 0.0;
    const double mag = paren / (p.b * shifted);
    return b.sign == BumpSign::positive ? mag : -mag;
}

inline void require_time_window(const BarenblattBump& b, double t) {
    if (b.sign == BumpSign::positive && t >= b.T)
        throw std::domain_error("BarenblattBump: positive type is defined only for t < T");
}

}  // namespace detail

/// v-value of a single bump at coordinate x (radial grids: x = r, center 0).
inline double bump_eval(const BarenblattBump& b, double x, double t, const Params& p) {
    b.validate();
    detail::require_time_window(b, t);
    return detail::bump_eval_unchecked(b, x, t, p);
}

/// Radius of the bump support: 2 sqrt(n+2) (T -+ t)^{1/(n+2)}.
inline double support_radius(const BarenblattBump& b, double t, const Params& p) {
    b.validate();
    detail::require_time_window(b, t);
    const double shifted = b.sign == BumpSign::positive ? b.T - t : b.T + t;
    return 2.0 * std::sqrt(double(p.n + 2)) * std::pow(shifted, 1.0 / (p.n + 2));
}

/// Evaluate the separation conditions that keep all bump supports pairwise
/// disjoint for t in [0, tau), plus the lower bound that keeps
/// u = v + a/(2b) nonnegative. Strict inequalities are required with slack
/// `delta` against floating-point ties. The report carries every condition
/// with both sides evaluated; `valid` is their conjunction.
inline ValidityReport validate_multibump(const MultiBumpConfig& cfg, const Params& p,
                                         double delta = 1e-12) {
    p.validate();
    for (const auto& b : cfg.bumps) b.validate();

    const double inv_exp = 1.0 / (p.n + 2);
    const double sep_scale = 2.0 * std::sqrt(double(p.n + 2));

    // Existence window: min T over positive bumps, optionally shortened by a
    // user horizon; negative-only configs need the user horizon as probe time.
    double tau = std::numeric_limits<double>::infinity();
    bool has_positive = false;
    for (const auto& b : cfg.bumps)
        if (b.sign == BumpSign::positive) {
            has_positive = true;
            tau = std::min(tau, b.T);
        }
    if (std::isfinite(cfg.horizon)) {
        if (!(cfg.horizon > 0.0))
            throw std::invalid_argument("MultiBumpConfig: horizon must be > 0");
        if (has_positive && cfg.horizon > tau)
            throw std::invalid_argument(
                "MultiBumpConfig: horizon exceeds min T over positive bumps");
        tau = std::min(tau, cfg.horizon);
    }
    std::size_t negatives = 0;
    for (const auto& b : cfg.bumps)
        if (b.sign == BumpSign::negative) ++negatives;
    if (!has_positive && negatives >= 2 && !std::isfinite(cfg.horizon))
        throw std::invalid_argument(
            "MultiBumpConfig: negative-only configs need a finite horizon for the "
            "separation checks");

    ValidityReport report;
    report.tau = tau;

    auto add = [&](std::string name, double lhs, double rhs) {
        report.checks.push_back({std::move(name), lhs, rhs, lhs < rhs - delta});
    };

    for (std::size_t j = 0; j < cfg.bumps.size(); ++j) {
        for (std::size_t k = j + 1; k < cfg.bumps.size(); ++k) {
            const auto& bj = cfg.bumps[j];
            const auto& bk = cfg.bumps[k];
            const double dist = std::abs(bk.x0 - bj.x0) / sep_scale;
            const std::string pair =
                "bumps " + std::to_string(j) + "," + std::to_string(k);

            if (bj.sign == BumpSign::negative && bk.sign == BumpSign::negative) {
                const double lhs =
                    std::pow(tau + bj.T, inv_exp) + std::pow(tau + bk.T, inv_exp);
                add("separation(neg,neg) " + pair, lhs, dist);
            } else if (bj.sign != bk.sign) {
                // Orient the pair: Tn = negative bump offset, Tp = positive.
                const double Tn = bj.sign == BumpSign::negative ? bj.T : bk.T;
                const double Tp = bj.sign == BumpSign::positive ? bj.T : bk.T;
                double lhs;
                const char* kind;
                if (Tp - Tn <= 0.0) {
                    lhs = std::pow(Tn, inv_exp) + std::pow(Tp, inv_exp);
                    kind = "separation(neg,pos|grown) ";
                } else if (Tp - Tn >= 2.0 * tau) {
                    lhs = std::pow(tau + Tn, inv_exp) + std::pow(Tp - tau, inv_exp);
                    kind = "separation(neg,pos|end) ";
                } else {
                    lhs = std::pow(2.0, (p.n + 1.0) / (p.n + 2.0)) *
                          std::pow(Tp + Tn, inv_exp);
                    kind = "separation(neg,pos|mid) ";
                }
                add(kind + pair, lhs, dist);
            }
            // Positive-positive pairs shrink from their t=0 supports; the
            // closed-form conditions cover only pairs with a negative member.
        }
    }

    // Lower bound keeping u = v + a/(2b) >= 0: the deepest negative value is
    // -T^{-n/(n+2)}/b at t = 0, so T must exceed (a/2)^{-1-2/n}.
    const double T_floor = std::pow(0.5 * p.a, -1.0 - 2.0 / p.n);
    for (std::size_t j = 0; j < cfg.bumps.size(); ++j) {
        if (cfg.bumps[j].sign == BumpSign::negative)
            add("density floor bump " + std::to_string(j), T_floor, cfg.bumps[j].T);
    }

    report.valid = true;
    for (const auto& c : report.checks) report.valid = report.valid && c.ok;
    return report;
}

/// Superposed v-value of an admissible configuration at (x, t), t < tau.
inline double multibump_eval(const MultiBumpConfig& cfg, double x, double t, const Params& p) {
    if (cfg.bumps.empty()) return 0.0;
    ValidityReport report = validate_multibump(cfg, p);
    if (!report.valid)
        throw std::invalid_argument("multibump_eval: configuration fails separation checks");
    if (t >= report.tau)
        throw std::domain_error("multibump_eval: t must be below the existence window tau");
    double v = 0.0;
    for (const auto& b : cfg.bumps) v += detail::bump_eval_unchecked(b, x, t, p);
    return v;
}

/// Max |dv/dt + b Lap(v^2)| over grid samples that keep a 2h margin from
/// every support boundary (the profile is only Lipschitz there). Central
/// differences in space and time; radial grids use Lap = w'' + (n-1)/r w'.
/// For an exact profile this is pure discretization error, O(h^2 + dt^2).
inline double residual_check(const MultiBumpConfig& cfg, const Grid& grid, double t,
                             const Params& p, double time_step = 1e-5) {
    ValidityReport report = validate_multibump(cfg, p);
    if (!report.valid)
        throw std::invalid_argument("residual_check: configuration fails separation checks");
    if (!(time_step > 0.0) || t + time_step >= report.tau)
        throw std::domain_error("residual_check: need t + time_step < tau");

    const bool radial = grid.kind() == GeometryKind::radial;
    if (grid.kind() == GeometryKind::rectangle)
        throw std::invalid_argument("residual_check: rectangle grids not supported");
    if (radial) {
        if (grid.dim() != p.n)
            throw std::invalid_argument("residual_check: radial grid dimension must match n");
        for (const auto& b : cfg.bumps)
            if (b.x0 != 0.0)
                throw std::invalid_argument("residual_check: radial bumps must sit at r = 0");
    } else if (p.n != 1) {
        throw std::invalid_argument("residual_check: interval grids require n = 1");
    }

    auto eval = [&](double x, double tt) {
        double v = 0.0;
        for (const auto& b : cfg.bumps) v += detail::bump_eval_unchecked(b, x, tt, p);
        return v;
    };

    const double h = grid.spacing();
    const double pad = 2.0 * h;
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double x = grid.x(i);
        bool near_front = false;
        for (const auto& b : cfg.bumps) {
            const double r = support_radius(b, t, p);
            if (std::abs(std::abs(x - b.x0) - r) < pad) near_front = true;
        }
        if (near_front) continue;

        const double dvdt = (eval(x, t + time_step) - eval(x, t - time_step)) / (2.0 * time_step);
        const double wm = eval(grid.x(i - 1), t), wc = eval(x, t), wp = eval(grid.x(i + 1), t);
        double lap = (wp * wp - 2.0 * wc * wc + wm * wm) / (h * h);
        if (radial && p.n > 1)
            lap += (p.n - 1) / x * (wp * wp - wm * wm) / (2.0 * h);
        worst = std::max(worst, std::abs(dvdt + p.b * lap));
    }
    return worst;
}

}  // namespace ard
