#pragma once

/// @file kernel.hpp
/// Mollified interaction kernel V_eps for the nonlocal model: a Gaussian of
/// width eps carrying total mass 2b. Samples are taken per axis on the grid
/// spacing and renormalized so the discrete stencil sum times h equals 1
/// exactly; the full kernel is the (separable) product scaled by 2b, so the
/// discrete mass identity sum V * h^n = 2b holds to roundoff by construction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ard/grid.hpp"
#include "ard/params.hpp"

namespace ard {

struct Kernel {
    double epsilon = 0.0;
    double mass = 0.0;            ///< total integral, 2b
    std::vector<double> axis_x;   ///< one-sided samples, axis_x[0] at offset 0
    std::vector<double> axis_y;   ///< populated for rectangle grids only
    GridPtr grid;
};

namespace detail {

inline std::vector<double> gaussian_axis_samples(double h, double epsilon, std::size_t n_axis) {
    std::size_t radius = static_cast<std::size_t>(std::ceil(10.0 * epsilon / h));
    radius = std::max<std::size_t>(radius, 2);
    radius = std::min(radius, n_axis - 1);
    std::vector<double> s(radius + 1);
    for (std::size_t m = 0; m <= radius; ++m) {
        const double x = double(m) * h;
        s[m] = std::exp(-x * x / (2.0 * epsilon * epsilon));
    }
    double total = s[0];
    for (std::size_t m = 1; m <= radius; ++m) total += 2.0 * s[m];
    for (auto& v : s) v /= total * h;  // stencil sum * h == 1 exactly
    return s;
}

/// Even reflection about the end nodes (Neumann extension of node data).
inline std::size_t mirror_index(long i, long n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return static_cast<std::size_t>(i);
}

/// One axis of the convolution: out[i] = h * sum_m s[|m|] * in_ext[i + m],
/// with in extended by reflection (Neumann) or by zero (Dirichlet).
inline void convolve_axis(const double* in, double* out, long n, long stride,
                          const std::vector<double>& s, double h, BoundaryKind bc) {
    const long radius = static_cast<long>(s.size()) - 1;
    for (long i = 0; i < n; ++i) {
        double acc = s[0] * in[i * stride];
        for (long m = 1; m <= radius; ++m) {
            double left = 0.0, right = 0.0;
            if (bc == BoundaryKind::neumann) {
                left = in[static_cast<long>(mirror_index(i - m, n)) * stride];
                right = in[static_cast<long>(mirror_index(i + m, n)) * stride];
            } else {
                if (i - m >= 0) left = in[(i - m) * stride];
                if (i + m < n) right = in[(i + m) * stride];
            }
            acc += s[m] * (left + right);
        }
        out[i * stride] = acc * h;
    }
}

}  // namespace detail

inline Kernel make_kernel(const GridPtr& g, double epsilon, const Params& p) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("make_kernel: epsilon must be > 0");
    if (g->kind() == GeometryKind::radial)
        throw std::invalid_argument("make_kernel: nonlocal model supports interval and rectangle grids");
    Kernel k;
    k.epsilon = epsilon;
    k.mass = 2.0 * p.b;
    k.grid = g;
    k.axis_x = detail::gaussian_axis_samples(g->spacing(), epsilon, g->axis_samples_x());
    if (g->kind() == GeometryKind::rectangle)
        k.axis_y = detail::gaussian_axis_samples(g->spacing(), epsilon, g->axis_samples_y());
    return k;
}

/// Discrete V_eps * u on the grid of f, boundary-extended to match f's
/// boundary condition. Constant fields map to mass * constant.
inline std::vector<double> convolve(const Field& f, const Kernel& k) {
    const Grid& g = f.grid();
    if (!k.grid || !g.same_layout(*k.grid))
        throw std::invalid_argument("convolve: kernel was built for a different grid");
    const double h = g.spacing();
    std::vector<double> w(f.values().begin(), f.values().end());

    if (g.kind() == GeometryKind::interval) {
        std::vector<double> out(w.size());
        detail::convolve_axis(w.data(), out.data(), static_cast<long>(w.size()), 1, k.axis_x, h,
                              f.boundary());
        w.swap(out);
    } else {
        const long nx = static_cast<long>(g.axis_samples_x());
        const long ny = static_cast<long>(g.axis_samples_y());
        std::vector<double> out(w.size());
        for (long j = 0; j < ny; ++j)
            detail::convolve_axis(w.data() + j * nx, out.data() + j * nx, nx, 1, k.axis_x, h,
                                  f.boundary());
        for (long i = 0; i < nx; ++i)
            detail::convolve_axis(out.data() + i, w.data() + i, ny, nx, k.axis_y, h, f.boundary());
    }
    for (auto& v : w) v *= k.mass;
    return w;
}

}  // namespace ard
