#pragma once

/// @file regimes.hpp
/// Parameter-space classifier. Each routine evaluates one closed-form
/// sufficient condition (global existence, weighted-moment blow-up, concavity
/// blow-up, steady-state nonexistence, linear stability of the constant
/// state) and returns a certificate carrying the numeric value of both sides
/// of every inequality it checked.
///
/// Tie handling is uniform: a comparison within 1e-12 relative tolerance is
/// flagged as a boundary case and resolved by the strictness of the
/// underlying hypothesis (strict comparisons fail on a tie, non-strict ones
/// hold).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ard/diagnostics.hpp"
#include "ard/eigen.hpp"
#include "ard/params.hpp"

namespace ard {

enum class Verdict { holds, fails, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        default: return "inconclusive";
    }
}

/// One evaluated inequality with the numbers that decided it.
struct ConditionEntry {
    std::string name;
    double lhs = std::numeric_limits<double>::quiet_NaN();
    double rhs = std::numeric_limits<double>::quiet_NaN();
    Verdict verdict = Verdict::inconclusive;
    bool boundary_tie = false;  ///< sides agreed to 1e-12 relative
    std::string note;
};

struct RegimeReport {
    std::string claim;  ///< what a "holds" verdict certifies
    Verdict verdict = Verdict::inconclusive;
    std::vector<ConditionEntry> entries;
    std::optional<double> tstar;  ///< moment blow-up bound, when that claim holds
    std::vector<double> rates;    ///< per-mode growth rates (stability only)
    std::string note;             ///< conventions applied, if any
};

namespace detail {

inline bool regime_tie(double lhs, double rhs) {
    if (std::isinf(lhs) || std::isinf(rhs)) return lhs == rhs;
    return std::abs(lhs - rhs) <= 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

/// lhs-vs-rhs comparison entry; `less` selects the direction, `strict` the
/// tie resolution.
inline ConditionEntry compare_entry(std::string name, double lhs, double rhs, bool strict,
                                    bool less) {
    ConditionEntry e;
    e.name = std::move(name);
    e.lhs = lhs;
    e.rhs = rhs;
    if (regime_tie(lhs, rhs)) {
        e.boundary_tie = true;
        e.verdict = strict ? Verdict::fails : Verdict::holds;
    } else {
        const bool satisfied = less ? lhs < rhs : lhs > rhs;
        e.verdict = satisfied ? Verdict::holds : Verdict::fails;
    }
    return e;
}

inline Verdict combine(Verdict acc, Verdict next) {
    if (acc == Verdict::fails || next == Verdict::fails) return Verdict::fails;
    if (acc == Verdict::inconclusive || next == Verdict::inconclusive)
        return Verdict::inconclusive;
    return Verdict::holds;
}

}  // namespace detail

/// Global existence below the parabolicity threshold: both of
/// max u0 < a/(2b) and c/d < a/(2b) must hold strictly. The d = 0
/// conventions: c <= 0 counts the ratio as -inf (no logistic cap is needed
/// when the reaction does not grow), c > 0 leaves the criterion silent.
inline RegimeReport classify_global(const Params& p, double u0_max) {
    p.validate();
    RegimeReport rep;
    rep.claim = "unique global classical solution staying below a/(2b)";
    const double thr = p.parabolicity_threshold();
    rep.entries.push_back(detail::compare_entry("max u0 < a/(2b)", u0_max, thr, true, true));

    ConditionEntry cap;
    cap.name = "c/d < a/(2b)";
    cap.rhs = thr;
    if (p.d != 0.0) {
        cap = detail::compare_entry(cap.name, p.c / p.d, thr, true, true);
    } else if (p.c <= 0.0) {
        cap.lhs = -std::numeric_limits<double>::infinity();
        cap.verdict = Verdict::holds;
        cap.note = p.c == 0.0 ? "d = 0, c = 0: reaction absent, ratio taken as -inf"
                              : "d = 0, c < 0: pure decay, ratio taken as -inf";
    } else {
        cap.verdict = Verdict::inconclusive;
        cap.note = "d = 0, c > 0: unbounded linear growth, criterion silent";
    }
    rep.entries.push_back(cap);

    rep.verdict = Verdict::holds;
    for (const auto& e : rep.entries) rep.verdict = detail::combine(rep.verdict, e.verdict);
    if (p.d == 0.0) rep.note = "d = 0 convention applied; see the logistic-cap entry";
    return rep;
}

/// Weighted-moment blow-up: mu b > d and A0 strictly above the threshold
/// max(mu a - c, 0)/(mu b - d). When both hold the closed-form upper bound
/// on the blow-up time is attached.
inline RegimeReport classify_kaplan(const Params& p, double mu, double A0) {
    p.validate();
    RegimeReport rep;
    rep.claim = "the eigenfunction-weighted moment blows up in finite time";

    const ConditionEntry hyp = detail::compare_entry("mu b > d", mu * p.b, p.d, true, false);
    rep.entries.push_back(hyp);
    if (hyp.verdict != Verdict::holds) {
        rep.verdict = Verdict::inconclusive;
        rep.note = "mu b <= d: the moment inequality degenerates, no conclusion";
        return rep;
    }

    const double thr = kaplan_threshold(p, mu);
    const ConditionEntry dom =
        detail::compare_entry("A0 > max(mu a - c, 0)/(mu b - d)", A0, thr, true, false);
    rep.entries.push_back(dom);
    rep.verdict = dom.verdict;
    if (rep.verdict == Verdict::holds) rep.tstar = kaplan_tstar(p, mu, A0);
    return rep;
}

/// Concavity blow-up for the shifted flow: (i) c <= min(ad/b, ad/(2b)),
/// (ii) v0 >= 0 everywhere, (iii) E(0) > 0. The reaction enters through the
/// default shifted profile for the given parameters.
inline RegimeReport classify_concavity(const Params& p, const Field& v0, double m = 2.0) {
    p.validate();
    if (v0.tag() != VarTag::v)
        throw std::invalid_argument("classify_concavity: v0 must carry v values");
    ConcavityConfig cfg = default_concavity(p);
    cfg.m = m;
    cfg.validate();

    RegimeReport rep;
    rep.claim = "the concavity functional forces finite-time blow-up of the shifted flow";
    const double cap = std::min(p.a * p.d / p.b, p.a * p.d / (2.0 * p.b));
    rep.entries.push_back(detail::compare_entry("c <= min(ad/b, ad/(2b))", p.c, cap, false, true));
    rep.entries.push_back(detail::compare_entry("min v0 >= 0", v0.min(), 0.0, false, false));
    rep.entries.push_back(
        detail::compare_entry("E(0) > 0", concavity_energy(v0, cfg, p), 0.0, true, false));

    rep.verdict = Verdict::holds;
    for (const auto& e : rep.entries) rep.verdict = detail::combine(rep.verdict, e.verdict);
    return rep;
}

/// Nonexistence of non-trivial nonnegative steady states on a star-shaped
/// domain (star-shapedness is asserted by the caller). Decides
/// q(s) = bd s^2 + B s + ac <= 0 for all s >= 0, B = ((n-6)ad - (n+6)bc)/6,
/// exactly by sign analysis; also evaluates the corollary window
/// ad(n-6) - bc(n+6) <= 0 or in (0, 12 sqrt(abcd)] as an informational
/// cross-check that never enters the overall verdict.
inline RegimeReport pohozaev_nonexistence(const Params& p) {
    p.validate();
    if (p.n <= 2) throw std::invalid_argument("pohozaev_nonexistence: requires n > 2");

    RegimeReport rep;
    rep.claim = "no non-trivial nonnegative steady state on a star-shaped domain";
    rep.note =
        "strictness of the underlying inequality is required only at s where the "
        "steady profile makes the product of reaction and flux nonzero; the s = 0 "
        "tie is admissible under this reading";

    const double bd = p.b * p.d;
    const double B = ((p.n - 6.0) * p.a * p.d - (p.n + 6.0) * p.b * p.c) / 6.0;
    const double ac = p.a * p.c;

    const ConditionEntry origin = detail::compare_entry("q(0) = ac <= 0", ac, 0.0, false, true);
    rep.entries.push_back(origin);

    Verdict shape = Verdict::inconclusive;
    if (bd > 0.0) {
        ConditionEntry lead;
        lead.name = "leading coefficient bd";
        lead.lhs = bd;
        lead.rhs = 0.0;
        lead.verdict = Verdict::fails;
        lead.note = "bd > 0: q grows without bound, the inequality fails for large s";
        rep.entries.push_back(lead);
        shape = Verdict::fails;
    } else if (bd == 0.0) {
        const ConditionEntry slope = detail::compare_entry("slope B <= 0", B, 0.0, false, true);
        rep.entries.push_back(slope);
        if (origin.verdict == Verdict::holds && slope.verdict == Verdict::holds &&
            detail::regime_tie(ac, 0.0) && detail::regime_tie(B, 0.0)) {
            ConditionEntry degen;
            degen.name = "q identically zero";
            degen.lhs = 0.0;
            degen.rhs = 0.0;
            degen.boundary_tie = true;
            degen.verdict = Verdict::inconclusive;
            degen.note = "q vanishes everywhere: the required strict inequality is unattainable";
            rep.entries.push_back(degen);
            shape = Verdict::inconclusive;
        } else {
            shape = slope.verdict;
        }
    } else {
        const double sv = -B / (2.0 * bd);
        const double qv = ac - B * B / (4.0 * bd);
        ConditionEntry vtx = detail::compare_entry("vertex s_v <= 0", sv, 0.0, false, true);
        ConditionEntry vval = detail::compare_entry("q(s_v) <= 0", qv, 0.0, false, true);
        vtx.note = "bd < 0: q is concave, so either condition on the vertex settles s >= 0";
        vval.note = vtx.note;
        rep.entries.push_back(vtx);
        rep.entries.push_back(vval);
        shape = (vtx.verdict == Verdict::holds || vval.verdict == Verdict::holds)
                    ? Verdict::holds
                    : Verdict::fails;
    }
    rep.verdict = origin.verdict == Verdict::fails ? Verdict::fails
                                                   : detail::combine(origin.verdict, shape);

    const double K = p.a * p.d * (p.n - 6.0) - p.b * p.c * (p.n + 6.0);
    ConditionEntry cor;
    cor.name = "corollary window: ad(n-6) - bc(n+6) <= 0 or in (0, 12 sqrt(abcd)]";
    cor.lhs = K;
    if (p.c <= 0.0 && p.d <= 0.0) {
        const double window = 12.0 * std::sqrt(p.a * p.b * p.c * p.d);
        cor.rhs = window;
        if (K <= 0.0) {
            cor.verdict = Verdict::holds;
            cor.boundary_tie = detail::regime_tie(K, 0.0);
        } else if (detail::regime_tie(K, window)) {
            cor.verdict = Verdict::holds;
            cor.boundary_tie = true;
        } else {
            cor.verdict = K < window ? Verdict::holds : Verdict::fails;
        }
        cor.note = "informational cross-check; does not enter the overall verdict";
    } else {
        cor.verdict = Verdict::inconclusive;
        cor.note = "corollary requires c <= 0 and d <= 0; informational only";
    }
    rep.entries.push_back(cor);

    ConditionEntry sharp;
    sharp.name = "sharpened boundary-term inequality";
    sharp.verdict = Verdict::inconclusive;
    sharp.note = "not evaluated (requires a candidate solution)";
    rep.entries.push_back(sharp);
    return rep;
}

/// Linear stability of the constant state c/d under the supplied Neumann
/// modes: r_k = (2bc/d - a) lambda_k - c. The closed-form criterion
/// c/d <= a/(2b) (nonpositive slope) governs the verdict; the finite-mode
/// maximum is reported alongside and a note is added when truncation hides
/// growing high modes.
inline RegimeReport linear_stability(const Params& p, const NeumannSpectrum& spectrum) {
    p.validate();
    if (!(p.c > 0.0) || !(p.d > 0.0))
        throw std::invalid_argument("linear_stability: requires c > 0 and d > 0");
    if (spectrum.lambdas.empty())
        throw std::invalid_argument("linear_stability: empty spectrum");

    RegimeReport rep;
    rep.claim = "the constant state u = c/d is asymptotically linearly stable";
    const double slope = 2.0 * p.b * p.c / p.d - p.a;

    ConditionEntry crit = detail::compare_entry("c/d <= a/(2b)", p.c / p.d,
                                                p.parabolicity_threshold(), false, true);
    crit.note = "equivalent to a nonpositive rate slope 2bc/d - a";
    rep.entries.push_back(crit);

    double worst = -std::numeric_limits<double>::infinity();
    for (const double lam : spectrum.lambdas) {
        const double r = slope * lam - p.c;
        rep.rates.push_back(r);
        worst = std::max(worst, r);
    }
    rep.entries.push_back(
        detail::compare_entry("max rate over supplied modes < 0", worst, 0.0, true, true));

    rep.verdict = crit.verdict;
    if (crit.verdict == Verdict::fails && rep.entries.back().verdict == Verdict::holds)
        rep.note =
            "every supplied mode decays, but the positive slope makes modes beyond the "
            "truncation grow; the closed form governs";
    return rep;
}

}  // namespace ard
