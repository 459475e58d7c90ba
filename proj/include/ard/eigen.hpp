#pragma once

/// @file eigen.hpp
/// First Dirichlet eigenpair (mu, phi) of -Lap on interval/rectangle grids,
/// and the analytic Neumann spectrum. phi is normalized so that its discrete
/// trapezoid integral is exactly 1; eigenfunction-weighted averages computed
/// with the library quadrature are then convex combinations at the grid
/// level, which keeps Jensen-type inequalities exact discretely.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ard/grid.hpp"

namespace ard {

struct EigenPair {
    enum class Source { analytic, numeric };
    double mu = 0.0;        ///< eigenvalue of -Lap with Dirichlet boundary
    Field phi;              ///< eigenfunction, zero on the boundary, > 0 inside
    double normalization;   ///< discrete integral of phi after rescaling
    Source source;
};

struct NeumannSpectrum {
    std::vector<double> lambdas;  ///< ascending, lambdas[0] == 0
};

namespace detail {

/// Rescale phi so its discrete integral is exactly 1; returns the integral
/// recomputed after rescaling.
inline double normalize_unit_integral(Field& phi) {
    double s = integrate(phi);
    if (!(s > 0.0)) throw std::runtime_error("eigen: eigenfunction has nonpositive integral");
    for (auto& v : phi.values()) v /= s;
    return integrate(phi);
}

/// y = A x for the second-order Dirichlet Laplacian on interior nodes.
/// Interval: tridiag(-1, 2, -1)/h^2; rectangle: 5-point stencil.
inline void dirichlet_laplacian_apply(const Grid& g, const std::vector<double>& x,
                                      std::vector<double>& y) {
    const double ih2 = 1.0 / (g.spacing() * g.spacing());
    if (g.kind() == GeometryKind::interval) {
        const std::size_t m = x.size();
        for (std::size_t i = 0; i < m; ++i) {
            const double left = i > 0 ? x[i - 1] : 0.0;
            const double right = i + 1 < m ? x[i + 1] : 0.0;
            y[i] = (2.0 * x[i] - left - right) * ih2;
        }
        return;
    }
    const std::size_t mx = g.axis_samples_x() - 2;
    const std::size_t my = g.axis_samples_y() - 2;
    for (std::size_t j = 0; j < my; ++j) {
        for (std::size_t i = 0; i < mx; ++i) {
            const std::size_t k = j * mx + i;
            const double left = i > 0 ? x[k - 1] : 0.0;
            const double right = i + 1 < mx ? x[k + 1] : 0.0;
            const double down = j > 0 ? x[k - mx] : 0.0;
            const double up = j + 1 < my ? x[k + mx] : 0.0;
            y[k] = (4.0 * x[k] - left - right - down - up) * ih2;
        }
    }
}

/// Solve A z = rhs for the interval stencil with the Thomas algorithm.
inline void tridiagonal_solve(double diag, double off, std::vector<double>& rhs) {
    const std::size_t m = rhs.size();
    std::vector<double> cp(m);
    cp[0] = off / diag;
    rhs[0] /= diag;
    for (std::size_t i = 1; i < m; ++i) {
        const double denom = diag - off * cp[i - 1];
        cp[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] -= cp[i] * rhs[i + 1];
}

/// Conjugate gradient for the SPD rectangle stencil.
inline void cg_solve(const Grid& g, const std::vector<double>& rhs, std::vector<double>& x,
                     double rel_tol, int max_iter) {
    const std::size_t m = rhs.size();
    std::vector<double> r = rhs, p = rhs, ap(m);
    std::fill(x.begin(), x.end(), 0.0);
    double rr = 0.0;
    for (double v : r) rr += v * v;
    const double stop = rel_tol * rel_tol * rr;
    for (int it = 0; it < max_iter && rr > stop; ++it) {
        dirichlet_laplacian_apply(g, p, ap);
        double pap = 0.0;
        for (std::size_t i = 0; i < m; ++i) pap += p[i] * ap[i];
        const double alpha = rr / pap;
        double rr_next = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            rr_next += r[i] * r[i];
        }
        const double beta = rr_next / rr;
        for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
        rr = rr_next;
    }
}

/// Embed an interior-node vector into a full-grid field with zero boundary.
inline Field embed_interior(const GridPtr& grid, const std::vector<double>& interior) {
    Field f(grid, BoundaryKind::dirichlet, VarTag::u);
    const Grid& g = *grid;
    if (g.kind() == GeometryKind::interval) {
        for (std::size_t i = 0; i < interior.size(); ++i) f[i + 1] = interior[i];
    } else {
        const std::size_t mx = g.axis_samples_x() - 2;
        for (std::size_t j = 0; j < g.axis_samples_y() - 2; ++j)
            for (std::size_t i = 0; i < mx; ++i)
                f[g.idx(i + 1, j + 1)] = interior[j * mx + i];
    }
    return f;
}

inline void require_cartesian(const Grid& g, const char* who) {
    if (g.kind() == GeometryKind::radial)
        throw std::invalid_argument(std::string(who) + ": radial geometry not supported");
}

}  // namespace detail

/// Closed-form first Dirichlet eigenpair. Interval: mu = pi^2/L^2 with a
/// half-sine mode; rectangle: mu = pi^2 (1/Lx^2 + 1/Ly^2) with a product of
/// half-sines. The sampled mode is rescaled to unit discrete integral.
inline EigenPair dirichlet_first_analytic(const GridPtr& grid) {
    detail::require_cartesian(*grid, "dirichlet_first_analytic");
    const Grid& g = *grid;
    Field phi(grid, BoundaryKind::dirichlet, VarTag::u);
    double mu;
    if (g.kind() == GeometryKind::interval) {
        const double L = g.length_x();
        mu = M_PI * M_PI / (L * L);
        for (std::size_t i = 0; i < g.size(); ++i)
            phi[i] = (M_PI / (2.0 * L)) * std::sin(M_PI * g.x(i) / L);
    } else {
        const double lx = g.length_x(), ly = g.length_y();
        mu = M_PI * M_PI * (1.0 / (lx * lx) + 1.0 / (ly * ly));
        for (std::size_t j = 0; j < g.axis_samples_y(); ++j)
            for (std::size_t i = 0; i < g.axis_samples_x(); ++i)
                phi[g.idx(i, j)] = (M_PI / (2.0 * lx)) * std::sin(M_PI * g.x(i) / lx) *
                                   (M_PI / (2.0 * ly)) * std::sin(M_PI * g.y(j) / ly);
    }
    // Boundary samples of sin can be denormal-scale garbage; force exact zeros.
    if (g.kind() == GeometryKind::interval) {
        phi[0] = phi[g.size() - 1] = 0.0;
    } else {
        for (std::size_t i = 0; i < g.axis_samples_x(); ++i) {
            phi[g.idx(i, 0)] = phi[g.idx(i, g.axis_samples_y() - 1)] = 0.0;
        }
        for (std::size_t j = 0; j < g.axis_samples_y(); ++j) {
            phi[g.idx(0, j)] = phi[g.idx(g.axis_samples_x() - 1, j)] = 0.0;
        }
    }
    const double norm = detail::normalize_unit_integral(phi);
    return EigenPair{mu, std::move(phi), norm, EigenPair::Source::analytic};
}

/// First Dirichlet eigenpair of the discrete Laplacian by inverse power
/// iteration (shift 0, all-ones start). Stops when the relative eigenvalue
/// residual ||A phi - mu phi|| / (mu ||phi||) drops below tol.
inline EigenPair dirichlet_first_numeric(const GridPtr& grid, double tol = 1e-10,
                                         int max_iter = 10000) {
    detail::require_cartesian(*grid, "dirichlet_first_numeric");
    const Grid& g = *grid;
    const bool is_1d = g.kind() == GeometryKind::interval;
    const std::size_t mx = g.axis_samples_x() - 2;
    const std::size_t my = is_1d ? 1 : g.axis_samples_y() - 2;
    if (static_cast<int>(mx) < 8 || (!is_1d && static_cast<int>(my) < 8))
        throw std::invalid_argument("dirichlet_first_numeric: need >= 8 interior cells per axis");
    const std::size_t m = mx * my;

    const double h2 = g.spacing() * g.spacing();
    std::vector<double> x(m, 1.0), y(m), ax(m);
    double mu = 0.0, residual = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        if (is_1d) {
            y = x;
            detail::tridiagonal_solve(2.0 / h2, -1.0 / h2, y);
        } else {
            detail::cg_solve(g, x, y, 1e-13, static_cast<int>(10 * std::sqrt(double(m))) + 200);
        }
        double norm = 0.0;
        for (double v : y) norm += v * v;
        norm = std::sqrt(norm);
        for (auto& v : y) v /= norm;

        detail::dirichlet_laplacian_apply(g, y, ax);
        double num = 0.0;
        for (std::size_t i = 0; i < m; ++i) num += y[i] * ax[i];
        mu = num;  // Rayleigh quotient; ||y|| = 1
        double rs = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double r = ax[i] - mu * y[i];
            rs += r * r;
        }
        residual = std::sqrt(rs) / mu;
        x = y;
        if (residual < tol) {
            if (x[m / 2] < 0.0)
                for (auto& v : x) v = -v;
            Field phi = detail::embed_interior(grid, x);
            const double norm1 = detail::normalize_unit_integral(phi);
            return EigenPair{mu, std::move(phi), norm1, EigenPair::Source::numeric};
        }
    }
    throw std::runtime_error("dirichlet_first_numeric: no convergence after " +
                             std::to_string(max_iter) +
                             " iterations, residual " + std::to_string(residual));
}

/// Closed-form Neumann spectrum of -Lap. Interval: ((k-1) pi / L)^2;
/// rectangle: sorted sums pi^2 (p^2/Lx^2 + q^2/Ly^2).
inline NeumannSpectrum neumann_spectrum_analytic(const Grid& g, int count) {
    detail::require_cartesian(g, "neumann_spectrum_analytic");
    if (count < 1) throw std::invalid_argument("neumann_spectrum_analytic: count must be >= 1");
    NeumannSpectrum spec;
    if (g.kind() == GeometryKind::interval) {
        const double L = g.length_x();
        for (int k = 0; k < count; ++k) {
            const double w = k * M_PI / L;
            spec.lambdas.push_back(w * w);
        }
        return spec;
    }
    const double lx = g.length_x(), ly = g.length_y();
    std::vector<double> all;
    for (int p = 0; p <= count; ++p)
        for (int q = 0; q <= count; ++q)
            all.push_back(M_PI * M_PI * (p * p / (lx * lx) + q * q / (ly * ly)));
    std::sort(all.begin(), all.end());
    spec.lambdas.assign(all.begin(), all.begin() + count);
    spec.lambdas[0] = 0.0;
    return spec;
}

}  // namespace ard
