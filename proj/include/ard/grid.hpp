#pragma once

/// @file grid.hpp
/// Uniform grids (interval, rectangle, radial shell), sampled fields, and the
/// shared quadrature used by every integral in the library.
///
/// Conventions:
///  - interval / rectangle grids are node-centered: samples sit at j*h
///    including both boundaries, and integrals use the trapezoid rule;
///  - radial grids are cell-centered: samples sit at (i + 1/2)*h so the
///    coordinate singularity at r = 0 is never evaluated, and integrals use
///    the midpoint rule with shell weights omega_n * r^(n-1) * h.
///
/// Every functional in the library integrates with Grid::quad_weight so that
/// discrete identities (mass balance, Jensen-type inequalities) hold exactly
/// at the grid level rather than only in the continuum limit.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ard/params.hpp"

namespace ard {

enum class GeometryKind { interval, rectangle, radial };
enum class BoundaryKind { dirichlet, neumann };

/// Which variable a field stores: the density u >= 0, or the shifted
/// variable v = u - a/(2b) used by the flux-form analysis.
enum class VarTag { u, v };

/// Surface area of the unit sphere in n dimensions, 2*pi^(n/2)/Gamma(n/2).
inline double unit_sphere_area(int n) {
    if (n < 1) throw std::invalid_argument("unit_sphere_area: n must be >= 1");
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

class Grid {
public:
    /// Node-centered 1-D grid on [0, length] with `cells` cells
    /// (cells + 1 samples).
    static Grid interval(double length, int cells) {
        check(length > 0.0, "Grid::interval: length must be > 0");
        check(cells >= 2, "Grid::interval: need at least 2 cells");
        Grid g;
        g.kind_ = GeometryKind::interval;
        g.len_x_ = length;
        g.cells_x_ = cells;
        g.h_ = length / cells;
        g.dim_ = 1;
        g.build_weights();
        return g;
    }

    /// Node-centered 2-D grid on [0, lx] x [0, ly]. Spacing must be the same
    /// along both axes.
    static Grid rectangle(double lx, double ly, int cells_x, int cells_y) {
        check(lx > 0.0 && ly > 0.0, "Grid::rectangle: side lengths must be > 0");
        check(cells_x >= 2 && cells_y >= 2, "Grid::rectangle: need at least 2 cells per axis");
        const double hx = lx / cells_x;
        const double hy = ly / cells_y;
        check(std::abs(hx - hy) <= 1e-12 * std::max(hx, hy),
              "Grid::rectangle: spacing must be uniform across axes");
        Grid g;
        g.kind_ = GeometryKind::rectangle;
        g.len_x_ = lx;
        g.len_y_ = ly;
        g.cells_x_ = cells_x;
        g.cells_y_ = cells_y;
        g.h_ = hx;
        g.dim_ = 2;
        g.build_weights();
        return g;
    }

    /// Cell-centered radial grid on [0, radius] representing a ball in
    /// `dim` dimensions; samples at r_i = (i + 1/2) h.
    static Grid radial(double radius, int cells, int dim) {
        check(radius > 0.0, "Grid::radial: radius must be > 0");
        check(cells >= 2, "Grid::radial: need at least 2 cells");
        check(dim >= 1, "Grid::radial: dimension must be >= 1");
        Grid g;
        g.kind_ = GeometryKind::radial;
        g.len_x_ = radius;
        g.cells_x_ = cells;
        g.h_ = radius / cells;
        g.dim_ = dim;
        g.build_weights();
        return g;
    }

    GeometryKind kind() const { return kind_; }
    double spacing() const { return h_; }
    /// Ambient dimension: 1 (interval), 2 (rectangle), or the ball dimension.
    int dim() const { return dim_; }

    double length_x() const { return len_x_; }
    double length_y() const { return len_y_; }
    int cells_x() const { return cells_x_; }
    int cells_y() const { return cells_y_; }

    /// Samples per axis (nodes for Cartesian grids, cells for radial).
    std::size_t axis_samples_x() const {
        return kind_ == GeometryKind::radial ? static_cast<std::size_t>(cells_x_)
                                             : static_cast<std::size_t>(cells_x_) + 1;
    }
    std::size_t axis_samples_y() const {
        return kind_ == GeometryKind::rectangle ? static_cast<std::size_t>(cells_y_) + 1 : 1;
    }

    std::size_t size() const { return axis_samples_x() * axis_samples_y(); }

    /// Coordinate of sample i along the first axis (x or r).
    double x(std::size_t i) const {
        return kind_ == GeometryKind::radial ? (static_cast<double>(i) + 0.5) * h_
                                             : static_cast<double>(i) * h_;
    }
    double y(std::size_t j) const { return static_cast<double>(j) * h_; }

    /// Flat index of sample (i, j) on a rectangle.
    std::size_t idx(std::size_t i, std::size_t j) const { return j * axis_samples_x() + i; }

    /// Measure weight of sample k: summing value[k] * quad_weight(k) is the
    /// discrete integral over the domain.
    double quad_weight(std::size_t k) const { return weights_[k]; }
    const std::vector<double>& quad_weights() const { return weights_; }

    /// Total measure of the domain (for a radial grid, of the n-ball).
    double measure() const {
        switch (kind_) {
            case GeometryKind::interval: return len_x_;
            case GeometryKind::rectangle: return len_x_ * len_y_;
            case GeometryKind::radial:
                return unit_sphere_area(dim_) * std::pow(len_x_, dim_) / dim_;
        }
        return 0.0;
    }

    bool same_layout(const Grid& o) const {
        return kind_ == o.kind_ && cells_x_ == o.cells_x_ && cells_y_ == o.cells_y_ &&
               len_x_ == o.len_x_ && len_y_ == o.len_y_ && dim_ == o.dim_;
    }

private:
    static void check(bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    }

    void build_weights() {
        weights_.assign(size(), 0.0);
        switch (kind_) {
            case GeometryKind::interval: {
                const std::size_t nx = axis_samples_x();
                for (std::size_t i = 0; i < nx; ++i)
                    weights_[i] = trapezoid_end(i, nx) * h_;
                break;
            }
            case GeometryKind::rectangle: {
                const std::size_t nx = axis_samples_x();
                const std::size_t ny = axis_samples_y();
                for (std::size_t j = 0; j < ny; ++j)
                    for (std::size_t i = 0; i < nx; ++i)
                        weights_[idx(i, j)] =
                            trapezoid_end(i, nx) * trapezoid_end(j, ny) * h_ * h_;
                break;
            }
            case GeometryKind::radial: {
                const double area = unit_sphere_area(dim_);
                for (std::size_t i = 0; i < size(); ++i)
                    weights_[i] = area * std::pow(x(i), dim_ - 1) * h_;
                break;
            }
        }
    }

    static double trapezoid_end(std::size_t i, std::size_t n) {
        return (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    }

    GeometryKind kind_ = GeometryKind::interval;
    double len_x_ = 0.0, len_y_ = 0.0;
    int cells_x_ = 0, cells_y_ = 0;
    double h_ = 0.0;
    int dim_ = 1;
    std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Values sampled on a grid, together with the boundary condition they are
/// evolved under and the variable they represent.
class Field {
public:
    Field(GridPtr grid, BoundaryKind bc, VarTag tag)
        : grid_(require(std::move(grid))), bc_(bc), tag_(tag), values_(grid_->size(), 0.0) {}

    Field(GridPtr grid, BoundaryKind bc, VarTag tag, std::vector<double> values)
        : grid_(require(std::move(grid))), bc_(bc), tag_(tag), values_(std::move(values)) {
        if (values_.size() != grid_->size())
            throw std::invalid_argument("Field: value count does not match grid");
    }

    /// Sample fn(x) (interval/radial) on every grid point.
    static Field from_fn(GridPtr grid, BoundaryKind bc, VarTag tag,
                         const std::function<double(double)>& fn) {
        Field f(std::move(grid), bc, tag);
        if (f.grid().kind() == GeometryKind::rectangle)
            throw std::invalid_argument("Field::from_fn: rectangle grids need fn(x, y)");
        for (std::size_t i = 0; i < f.size(); ++i) f.values_[i] = fn(f.grid().x(i));
        return f;
    }

    /// Sample fn(x, y) on a rectangle grid.
    static Field from_fn(GridPtr grid, BoundaryKind bc, VarTag tag,
                         const std::function<double(double, double)>& fn) {
        Field f(std::move(grid), bc, tag);
        if (f.grid().kind() != GeometryKind::rectangle)
            throw std::invalid_argument("Field::from_fn: fn(x, y) requires a rectangle grid");
        const Grid& g = f.grid();
        for (std::size_t j = 0; j < g.axis_samples_y(); ++j)
            for (std::size_t i = 0; i < g.axis_samples_x(); ++i)
                f.values_[g.idx(i, j)] = fn(g.x(i), g.y(j));
        return f;
    }

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    BoundaryKind boundary() const { return bc_; }
    VarTag tag() const { return tag_; }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double min() const {
        double m = values_[0];
        for (double v : values_) m = std::min(m, v);
        return m;
    }
    double max() const {
        double m = values_[0];
        for (double v : values_) m = std::max(m, v);
        return m;
    }

    Field with_values(std::vector<double> vals) const {
        return Field(grid_, bc_, tag_, std::move(vals));
    }
    Field with_tag(VarTag tag) const {
        Field f = *this;
        f.tag_ = tag;
        return f;
    }

private:
    static GridPtr require(GridPtr g) {
        if (!g) throw std::invalid_argument("Field: null grid");
        return g;
    }

    GridPtr grid_;
    BoundaryKind bc_;
    VarTag tag_;
    std::vector<double> values_;
};

/// Discrete integral of the field over its domain.
inline double integrate(const Field& f) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += f[k] * f.grid().quad_weight(k);
    return s;
}

/// Shift u -> v = u - a/(2b). The flux potential becomes -b*v^2 + const,
/// so with c = d = 0 the evolution of v is dv/dt = -b * Lap(v^2).
inline Field to_v(const Field& f, const Params& p) {
    if (f.tag() != VarTag::u) throw std::invalid_argument("to_v: field must carry u");
    Field out = f.with_tag(VarTag::v);
    const double shift = p.parabolicity_threshold();
    for (auto& x : out.values()) x -= shift;
    return out;
}

/// Inverse shift v -> u = v + a/(2b).
inline Field from_v(const Field& f, const Params& p) {
    if (f.tag() != VarTag::v) throw std::invalid_argument("from_v: field must carry v");
    Field out = f.with_tag(VarTag::u);
    const double shift = p.parabolicity_threshold();
    for (auto& x : out.values()) x += shift;
    return out;
}

}  // namespace ard
