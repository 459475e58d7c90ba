#pragma once

/// @file params.hpp
/// Model coefficients and the pointwise algebra of the
/// aggregation-reaction-diffusion equation
///
///     du/dt = Lap[(a - b*u) * u] + (c - d*u) * u .
///
/// The quantity inside the Laplacian, (a - b*u)*u, acts as a nonlinear flux
/// potential; its derivative a - 2*b*u is the effective diffusivity, so the
/// equation is parabolic only while u < a/(2b).

#include <stdexcept>

namespace ard {

/// Coefficients a, b (both > 0), c, d (any sign) and ambient dimension n.
struct Params {
    double a = 1.0;  ///< diffusion strength
    double b = 1.0;  ///< aggregation strength
    double c = 0.0;  ///< linear reaction rate
    double d = 0.0;  ///< logistic damping
    int n = 1;       ///< spatial dimension

    void validate() const {
        if (!(a > 0.0)) throw std::invalid_argument("Params: a must be > 0");
        if (!(b > 0.0)) throw std::invalid_argument("Params: b must be > 0");
        if (n < 1) throw std::invalid_argument("Params: n must be >= 1");
    }

    /// Density at which the effective diffusivity changes sign.
    double parabolicity_threshold() const { return a / (2.0 * b); }

    /// Logistic equilibrium c/d. Only meaningful for d != 0.
    double logistic_cap() const { return c / d; }
};

/// Flux potential (a - b*u) * u. Vanishes at u = 0 and u = a/b,
/// with maximum a^2/(4b) at u = a/(2b).
inline double flux(double u, const Params& p) { return (p.a - p.b * u) * u; }

/// Effective diffusivity a - 2*b*u (derivative of the flux potential).
inline double effective_diffusivity(double u, const Params& p) {
    return p.a - 2.0 * p.b * u;
}

/// Reaction term (c - d*u) * u.
inline double reaction(double u, const Params& p) { return (p.c - p.d * u) * u; }

/// Derivative of the reaction term, c - 2*d*u. Used for step-size control.
inline double reaction_derivative(double u, const Params& p) {
    return p.c - 2.0 * p.d * u;
}

}  // namespace ard
