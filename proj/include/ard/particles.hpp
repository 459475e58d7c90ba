#pragma once

/// @file particles.hpp
/// Interacting-particle simulation of the aggregation model without
/// reaction:
///
///     dX^i = sqrt(2a) dB^i + (1/N) sum_{j != i} grad V_eps(X^i - X^j) dt,
///
/// where V_eps is a Gaussian of width eps carrying total mass 2b, the same
/// interaction the nonlocal solver mollifies with. The microscopic model has
/// no reaction, so runs require c = d = 0 and are compared against matching
/// nonlocal runs via a kernel density estimate. The 1/N weighting makes the
/// empirical law converge to the PDE density only when u0 carries unit mass;
/// any other mass m is equivalent to rescaling the aggregation strength to
/// b m on the PDE side.
///
/// Randomness is counter-based: every normal increment is a pure function of
/// (seed, particle index, step index), so trajectories are reproducible
/// independent of evaluation order. Exchangeability therefore holds at the
/// level of the sampled ensemble: relabeling particles permutes trajectories
/// only if their noise streams are carried along with the labels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ard/grid.hpp"
#include "ard/params.hpp"
#include "ard/solver.hpp"

namespace ard {

enum class DomainMode { free_space, reflecting_box };

struct ParticleConfig {
    int N = 1000;
    double epsilon = 0.05;
    double dt = 1e-4;
    double t_end = 1.0;
    DomainMode domain = DomainMode::free_space;
    std::array<double, 2> box_lo{0.0, 0.0};  ///< reflecting_box bounds per axis
    std::array<double, 2> box_hi{1.0, 1.0};
    std::uint64_t seed = 0;

    void validate() const {
        if (N < 1) throw std::invalid_argument("ParticleConfig: N must be >= 1");
        if (!(epsilon > 0.0)) throw std::invalid_argument("ParticleConfig: epsilon must be > 0");
        if (!(dt > 0.0)) throw std::invalid_argument("ParticleConfig: dt must be > 0");
        if (!(t_end >= 0.0)) throw std::invalid_argument("ParticleConfig: t_end must be >= 0");
        if (domain == DomainMode::reflecting_box)
            for (int ax = 0; ax < 2; ++ax)
                if (!(box_lo[ax] < box_hi[ax]))
                    throw std::invalid_argument("ParticleConfig: box must have positive extent");
    }
};

struct ParticleState {
    int dim = 1;
    std::vector<double> x;  ///< interleaved coordinates, particle i at [i*dim, (i+1)*dim)
    double t = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t step = 0;             ///< RNG stream position
    std::uint64_t drift_warnings = 0;   ///< particle-steps with |drift| dt > eps

    std::size_t count() const { return dim > 0 ? x.size() / std::size_t(dim) : 0; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter RNG key for (seed, particle, step, draw).
inline std::uint64_t rng_key(std::uint64_t seed, std::uint64_t particle, std::uint64_t step,
                             std::uint64_t draw) {
    std::uint64_t z = splitmix64(seed);
    z = splitmix64(z ^ particle);
    z = splitmix64(z ^ step);
    return splitmix64(z ^ draw);
}

/// Uniform in the open interval (0, 1).
inline double unit_open(std::uint64_t key) {
    return (double(key >> 11) + 0.5) * 0x1.0p-53;
}

/// One Box-Muller pair for (seed, particle, step).
inline void normal_pair(std::uint64_t seed, std::uint64_t particle, std::uint64_t step,
                        double& z0, double& z1) {
    const double u1 = unit_open(rng_key(seed, particle, step, 0));
    const double u2 = unit_open(rng_key(seed, particle, step, 1));
    const double r = std::sqrt(-2.0 * std::log(u1));
    z0 = r * std::cos(2.0 * M_PI * u2);
    z1 = r * std::sin(2.0 * M_PI * u2);
}

/// Sampling draws live on a reserved stream position never reached by steps.
constexpr std::uint64_t sample_stream = ~std::uint64_t(0);

/// Fold x into [lo, hi] by even reflection.
inline double reflect(double x, double lo, double hi) {
    const double period = 2.0 * (hi - lo);
    double y = std::fmod(x - lo, period);
    if (y < 0.0) y += period;
    if (y > hi - lo) y = period - y;
    return lo + y;
}

/// Bilinear interpolation of node data at (x, y), clamped to the rectangle.
inline double bilinear(const Field& f, double x, double y) {
    const Grid& g = f.grid();
    const double h = g.spacing();
    const std::size_t nx = g.axis_samples_x(), ny = g.axis_samples_y();
    double fx = std::clamp(x / h, 0.0, double(nx - 1));
    double fy = std::clamp(y / h, 0.0, double(ny - 1));
    std::size_t i = std::min(std::size_t(fx), nx - 2);
    std::size_t j = std::min(std::size_t(fy), ny - 2);
    const double sx = fx - double(i), sy = fy - double(j);
    const double f00 = f[g.idx(i, j)], f10 = f[g.idx(i + 1, j)];
    const double f01 = f[g.idx(i, j + 1)], f11 = f[g.idx(i + 1, j + 1)];
    return (1.0 - sy) * ((1.0 - sx) * f00 + sx * f10) + sy * ((1.0 - sx) * f01 + sx * f11);
}

}  // namespace detail

/// Draw N i.i.d. samples from u0 / integral(u0). Interval grids invert the
/// piecewise-linear node CDF (cellwise-constant density); rectangle grids use
/// rejection against the bilinear interpolant. Deterministic given the seed.
inline ParticleState sample_initial(const Field& u0, int N, std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("sample_initial: N must be >= 1");
    const Grid& g = u0.grid();
    if (g.kind() == GeometryKind::radial)
        throw std::invalid_argument("sample_initial: requires an interval or rectangle grid");
    if (u0.min() < -1e-12)
        throw std::invalid_argument("sample_initial: u0 must be nonnegative");

    ParticleState s;
    s.dim = g.kind() == GeometryKind::interval ? 1 : 2;
    s.seed = seed;
    s.x.resize(std::size_t(N) * std::size_t(s.dim));

    if (s.dim == 1) {
        const std::size_t n = g.size();
        std::vector<double> cdf(n, 0.0);
        for (std::size_t i = 1; i < n; ++i) {
            const double seg =
                0.5 * (std::max(u0[i - 1], 0.0) + std::max(u0[i], 0.0)) * g.spacing();
            cdf[i] = cdf[i - 1] + seg;
        }
        const double total = cdf.back();
        if (!(total > 0.0)) throw std::invalid_argument("sample_initial: u0 has no mass");

        for (int i = 0; i < N; ++i) {
            const double u =
                total * detail::unit_open(detail::rng_key(seed, i, detail::sample_stream, 0));
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            const std::size_t k = std::min<std::size_t>(it - cdf.begin(), n - 1);
            const double seg = cdf[k] - cdf[k - 1];
            const double frac = seg > 0.0 ? (u - cdf[k - 1]) / seg : 0.5;
            s.x[i] = g.x(k - 1) + frac * g.spacing();
        }
    } else {
        const double umax = u0.max();
        if (!(umax > 0.0)) throw std::invalid_argument("sample_initial: u0 has no mass");
        for (int i = 0; i < N; ++i) {
            std::uint64_t draw = 0;
            for (;;) {
                const double ux =
                    detail::unit_open(detail::rng_key(seed, i, detail::sample_stream, draw++));
                const double uy =
                    detail::unit_open(detail::rng_key(seed, i, detail::sample_stream, draw++));
                const double uz =
                    detail::unit_open(detail::rng_key(seed, i, detail::sample_stream, draw++));
                const double px = ux * g.length_x();
                const double py = uy * g.length_y();
                if (uz * umax <= detail::bilinear(u0, px, py)) {
                    s.x[std::size_t(i) * 2] = px;
                    s.x[std::size_t(i) * 2 + 1] = py;
                    break;
                }
            }
        }
    }
    return s;
}

/// One Euler-Maruyama step. The pairwise drift is accumulated antisymmetrically
/// (O(N^2) at desk scale) and the Gaussian gradient is evaluated analytically:
/// grad V_eps(x) = -x/eps^2 * V_eps(x) with V_eps = 2b N(0, eps^2 I).
inline ParticleState em_step(const ParticleState& s, const ParticleConfig& cfg, const Params& p) {
    cfg.validate();
    // a = 0 (pure drift) is admitted as a degenerate case for deterministic
    // checks; b > 0 is still required for the interaction mass.
    if (!(p.a >= 0.0) || !(p.b > 0.0))
        throw std::invalid_argument("em_step: requires a >= 0 and b > 0");
    if (s.dim != 1 && s.dim != 2) throw std::invalid_argument("em_step: dim must be 1 or 2");
    const std::size_t n = s.count();
    const int dim = s.dim;
    const double eps2 = cfg.epsilon * cfg.epsilon;
    const double norm =
        2.0 * p.b / std::pow(2.0 * M_PI * eps2, 0.5 * dim);  // V_eps peak amplitude

    std::vector<double> drift(s.x.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double sep[2] = {0.0, 0.0};
            double r2 = 0.0;
            for (int ax = 0; ax < dim; ++ax) {
                sep[ax] = s.x[i * dim + ax] - s.x[j * dim + ax];
                r2 += sep[ax] * sep[ax];
            }
            const double v = norm * std::exp(-0.5 * r2 / eps2);
            for (int ax = 0; ax < dim; ++ax) {
                const double grad = -sep[ax] / eps2 * v;  // grad V_eps at x_i - x_j
                drift[i * dim + ax] += grad;
                drift[j * dim + ax] -= grad;
            }
        }
    }

    ParticleState next = s;
    next.t = s.t + cfg.dt;
    next.step = s.step + 1;
    const double noise_scale = std::sqrt(2.0 * p.a * cfg.dt);
    const double inv_n = 1.0 / double(n);
    for (std::size_t i = 0; i < n; ++i) {
        double z[2];
        detail::normal_pair(s.seed, i, s.step, z[0], z[1]);
        double d2 = 0.0;
        for (int ax = 0; ax < dim; ++ax) {
            const double di = drift[i * dim + ax] * inv_n;
            d2 += di * di;
            double xi = s.x[i * dim + ax] + di * cfg.dt + noise_scale * z[ax];
            if (cfg.domain == DomainMode::reflecting_box)
                xi = detail::reflect(xi, cfg.box_lo[ax], cfg.box_hi[ax]);
            if (!std::isfinite(xi)) throw std::runtime_error("em_step: non-finite position");
            next.x[i * dim + ax] = xi;
        }
        if (std::sqrt(d2) * cfg.dt > cfg.epsilon) ++next.drift_warnings;
    }
    return next;
}

/// Gaussian kernel density estimate on the grid nodes, with even reflection
/// at the grid bounds (so a flat density stays flat near the edges) and a
/// final global rescale to exactly total_mass.
inline Field kde_density(const ParticleState& s, const GridPtr& grid, double bandwidth,
                         double total_mass) {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("kde_density: bandwidth must be > 0");
    if (!(total_mass > 0.0)) throw std::invalid_argument("kde_density: total_mass must be > 0");
    const Grid& g = *grid;
    const bool rect = g.kind() == GeometryKind::rectangle;
    if (g.kind() == GeometryKind::radial)
        throw std::invalid_argument("kde_density: requires an interval or rectangle grid");
    if ((rect ? 2 : 1) != s.dim)
        throw std::invalid_argument("kde_density: grid dimension does not match particles");

    const double cutoff = 8.0 * bandwidth;
    const double inv2b2 = 1.0 / (2.0 * bandwidth * bandwidth);
    const std::size_t n = s.count();
    Field out(grid, BoundaryKind::neumann, VarTag::u);

    // Images of one coordinate under reflection about [0, len].
    auto images = [&](double c, double len, std::array<double, 3>& im) {
        im = {c, -c, 2.0 * len - c};
        return (c > cutoff && len - c > cutoff) ? std::size_t(1) : std::size_t(3);
    };

    std::array<double, 3> imx{}, imy{};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t kx = images(s.x[i * s.dim], g.length_x(), imx);
        const std::size_t ky =
            rect ? images(s.x[i * s.dim + 1], g.length_y(), imy) : std::size_t(1);
        if (!rect) imy[0] = 0.0;
        for (std::size_t a = 0; a < kx; ++a) {
            for (std::size_t b = 0; b < ky; ++b) {
                for (std::size_t k = 0; k < g.size(); ++k) {
                    const double dx = g.x(k % g.axis_samples_x()) - imx[a];
                    const double dy = rect ? g.y(k / g.axis_samples_x()) - imy[b] : 0.0;
                    const double r2 = dx * dx + dy * dy;
                    if (r2 > cutoff * cutoff) continue;
                    out[k] += std::exp(-r2 * inv2b2);
                }
            }
        }
    }

    const double raw = integrate(out);
    if (!(raw > 0.0)) throw std::runtime_error("kde_density: no particle mass reaches the grid");
    const double scale = total_mass / raw;
    for (std::size_t k = 0; k < g.size(); ++k) out[k] *= scale;
    return out;
}

/// Rule-of-thumb bandwidth: 1.06 sigma N^{-1/5} in 1d, geometric-mean sigma
/// times N^{-1/6} in 2d, with the sample standard deviation (ddof 1).
inline double silverman_bandwidth(const ParticleState& s) {
    const std::size_t n = s.count();
    if (n < 2) throw std::invalid_argument("silverman_bandwidth: needs at least 2 particles");
    double bw = 1.0;
    for (int ax = 0; ax < s.dim; ++ax) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += s.x[i * s.dim + ax];
        mean /= double(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = s.x[i * s.dim + ax] - mean;
            var += d * d;
        }
        var /= double(n - 1);
        bw *= std::sqrt(var);
    }
    bw = std::pow(bw, 1.0 / s.dim);
    if (!(bw > 0.0)) throw std::invalid_argument("silverman_bandwidth: zero spread");
    return s.dim == 1 ? 1.06 * bw * std::pow(double(n), -0.2)
                      : bw * std::pow(double(n), -1.0 / 6.0);
}

struct ParticleRun {
    std::vector<double> times;
    std::vector<ParticleState> states;
    std::uint64_t drift_warnings = 0;
};

/// Sample u0 and march to t_end, keeping every output_stride-th state (and
/// always the final one). The microscopic model has no reaction, so c and d
/// must vanish.
inline ParticleRun run_particles(const Field& u0, const ParticleConfig& cfg, const Params& p,
                                 int output_stride = 1) {
    cfg.validate();
    p.validate();
    if (p.c != 0.0 || p.d != 0.0)
        throw std::invalid_argument("run_particles: the particle model requires c = d = 0");
    if (output_stride < 1)
        throw std::invalid_argument("run_particles: output_stride must be >= 1");

    ParticleState s = sample_initial(u0, cfg.N, cfg.seed);
    const long long steps = std::llround(cfg.t_end / cfg.dt);

    ParticleRun run;
    run.times.push_back(s.t);
    run.states.push_back(s);
    for (long long k = 1; k <= steps; ++k) {
        s = em_step(s, cfg, p);
        if (k % output_stride == 0 || k == steps) {
            run.times.push_back(s.t);
            run.states.push_back(s);
        }
    }
    run.drift_warnings = s.drift_warnings;
    return run;
}

/// Integral of |f - g| over the shared grid.
inline double l1_distance(const Field& f, const Field& g) {
    if (!f.grid().same_layout(g.grid()))
        throw std::invalid_argument("l1_distance: fields live on different grids");
    double acc = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
        acc += std::abs(f[k] - g[k]) * f.grid().quad_weight(k);
    return acc;
}

struct ComparisonSeries {
    std::vector<double> times;
    std::vector<double> l1;
};

/// L1 distance between the particle KDE and the PDE field at each requested
/// time. Snapshots are matched to requested times within 1e-6; the KDE is
/// scaled to the PDE snapshot's mass so the comparison is shape-only.
inline ComparisonSeries compare_to_pde(const ParticleRun& pr, const RunResult& pde,
                                       const std::vector<double>& times, double bandwidth) {
    if (pr.states.empty() || pde.snapshots.empty())
        throw std::invalid_argument("compare_to_pde: empty run");

    auto locate = [](const std::vector<double>& ts, double t) {
        std::size_t best = 0;
        double err = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const double e = std::abs(ts[k] - t);
            if (e < err) {
                err = e;
                best = k;
            }
        }
        if (err > 1e-6) throw std::invalid_argument("compare_to_pde: time not present in run");
        return best;
    };

    ComparisonSeries out;
    for (const double t : times) {
        const std::size_t ip = locate(pr.times, t);
        const std::size_t iu = locate(pde.times, t);
        const Field& u = pde.snapshots[iu];
        const Field kde =
            kde_density(pr.states[ip], u.grid_ptr(), bandwidth, integrate(u));
        out.times.push_back(t);
        out.l1.push_back(l1_distance(kde, u));
    }
    return out;
}

}  // namespace ard
