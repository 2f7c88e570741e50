#pragma once

#include <array>
#include <functional>
#include <vector>

#include "parobs/common.hpp"

namespace parobs::grid {

// Uniform tensor grid in space (dim 1 or 2) times uniform time levels.
struct Grid {
    int dim = 1;
    std::array<Real, 2> lo{{-1.0, -1.0}};
    std::array<Real, 2> hi{{1.0, 1.0}};
    Real h = 0.0;
    Real t_begin = 0.0;
    Real t_end = 0.0;
    Real dt = 0.0;
    std::array<int, 2> nx{{0, 1}};
    int nt = 0;

    static Grid make(int dim, std::array<Real, 2> lo, std::array<Real, 2> hi, Real h,
                     Real t_begin, Real t_end, Real dt);

    int nodes() const { return nx[0] * nx[1]; }
    Real x(int axis, int i) const { return lo[size_t(axis)] + h * i; }
    Real t(int m) const { return t_begin + dt * m; }
    Point point(int ix, int iy) const {
        Point p;
        p[0] = x(0, ix);
        if (dim == 2) p[1] = x(1, iy);
        return p;
    }
    int index(int ix, int iy) const { return iy * nx[0] + ix; }
    bool on_spatial_boundary(int ix, int iy) const {
        if (ix == 0 || ix == nx[0] - 1) return true;
        return dim == 2 && (iy == 0 || iy == nx[1] - 1);
    }
    Real cell_volume() const { return (dim == 2 ? h * h : h) * dt; }
    bool contains(const Point& p, Real slack) const {
        for (int d = 0; d < dim; ++d)
            if (p[d] < lo[size_t(d)] - slack || p[d] > hi[size_t(d)] + slack) return false;
        return true;
    }
    bool contains_time(Real t, Real slack) const {
        return t >= t_begin - slack && t <= t_end + slack;
    }
};

// Time-independent scalar field on the spatial part of a grid.
struct SpatialField {
    int dim = 1;
    std::array<Real, 2> lo{{-1.0, -1.0}};
    std::array<Real, 2> hi{{1.0, 1.0}};
    Real h = 0.0;
    std::array<int, 2> nx{{0, 1}};
    std::vector<Real> v;

    static SpatialField from_function(const Grid& g, const std::function<Real(Point)>& f);

    int nodes() const { return nx[0] * nx[1]; }
    int index(int ix, int iy) const { return iy * nx[0] + ix; }
    Real at(int ix, int iy) const { return v[size_t(index(ix, iy))]; }
    Point point(int ix, int iy) const {
        Point p;
        p[0] = lo[0] + h * ix;
        if (dim == 2) p[1] = lo[1] + h * iy;
        return p;
    }
    Real interp(const Point& p) const;
    // Discrete Hessian at a node, shifted stencils at the edges (exact on quadratics).
    std::array<Real, 3> hessian(int ix, int iy) const; // {xx, xy, yy}
    Real min_value() const;
    Real max_value() const;
};

struct GridFunction {
    Grid grid;
    std::vector<Real> v;

    GridFunction() = default;
    explicit GridFunction(const Grid& g, Real fill = 0.0) : grid(g), v(size_t(g.nodes()) * size_t(g.nt), fill) {}

    static GridFunction from_function(const Grid& g, const std::function<Real(Point, Real)>& f);

    size_t index(int ix, int iy, int m) const {
        return size_t(m) * size_t(grid.nodes()) + size_t(grid.index(ix, iy));
    }
    Real at(int ix, int iy, int m) const { return v[index(ix, iy, m)]; }
    Real at1(int ix, int m) const { return v[index(ix, 0, m)]; }
    void set(int ix, int iy, int m, Real value);
    // Bulk write of one time level; rejects non-finite values like set().
    void set_level(int m, const std::vector<Real>& level);
    const Real* level(int m) const { return v.data() + size_t(m) * size_t(grid.nodes()); }

    Real interp(const Point& p, Real t) const;
    Real max_abs() const;
    Real min_value() const;
    Real max_value() const;
};

enum class CylVariant { Q, Qplus, Qminus, Dplus, Dminus, Qtilde };

// Parabolic cylinders. Q_r = B_r x (t0-r^2, t0+r^2); the D variants are the
// shifted sub-cylinders used by the Harnack inequalities.
struct Cylinder {
    SpaceTimePoint center;
    Real r = 0.0;
    CylVariant variant = CylVariant::Q;

    Cylinder() = default;
    Cylinder(SpaceTimePoint c, Real radius, CylVariant var = CylVariant::Q)
        : center(c), r(radius), variant(var) {}

    std::array<Real, 2> time_window() const;
    bool contains_space(const Point& p) const;
    bool contains(const Point& p, Real t) const;
};

struct CylinderStats {
    Real sup = 0.0;
    Real inf = 0.0;
    Real zero_measure = 0.0;
    Real total_measure = 0.0;
    long node_count = 0;
};

// Visit all grid nodes realized inside the cylinder (clipped to the grid).
void for_each_node(const Grid& g, const Cylinder& c,
                   const std::function<void(int ix, int iy, int m)>& fn);

CylinderStats cylinder_stats(const GridFunction& u, const Cylinder& c, Real contact_tol);

Real parabolic_distance(const SpaceTimePoint& p, const SpaceTimePoint& q);

// Pointwise discrete derivatives; shifted stencils at domain edges,
// backward difference in time (forward at the first level).
Real diff_t(const GridFunction& u, int ix, int iy, int m);
Real diff_grad(const GridFunction& u, int axis, int ix, int iy, int m);
Real diff_second(const GridFunction& u, int axis, int ix, int iy, int m);
Real diff_cross(const GridFunction& u, int ix, int iy, int m);
// Second difference along a unit direction e.
Real diff_dir_second(const GridFunction& u, const Real e[2], int ix, int iy, int m);
Real grad_norm(const GridFunction& u, int ix, int iy, int m);

struct DerivedFields {
    GridFunction dt_u;
    std::array<GridFunction, 2> grad;
    GridFunction hess_xx, hess_xy, hess_yy;
};

DerivedFields finite_differences(const GridFunction& u);

GridFunction rescale(const GridFunction& u, const SpaceTimePoint& center, Real r, const Grid& ref_grid);

} // namespace parobs::grid
