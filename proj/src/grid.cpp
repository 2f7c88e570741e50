#include "parobs/grid.hpp"

#include <algorithm>
#include <cmath>

#include "parobs/kernels.hpp"

namespace parobs::grid {

namespace {
constexpr Real kSlack = 1e-9;

int axis_count(Real lo, Real hi, Real h) {
    const Real span = hi - lo;
    const Real steps = span / h;
    const Real rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-6 * std::max(1.0, std::abs(steps)))
        throw ConfigError("grid extent is not an integer multiple of h");
    return int(rounded) + 1;
}
} // namespace

Grid Grid::make(int dim, std::array<Real, 2> lo, std::array<Real, 2> hi, Real h,
                Real t_begin, Real t_end, Real dt) {
    if (dim != 1 && dim != 2) throw ConfigError("grid dim must be 1 or 2");
    if (h <= 0 || dt <= 0) throw ConfigError("grid requires h > 0 and dt > 0");
    if (t_end <= t_begin) throw ConfigError("grid requires t_end > t_begin");
    Grid g;
    g.dim = dim;
    g.lo = lo;
    g.hi = hi;
    g.h = h;
    g.t_begin = t_begin;
    g.t_end = t_end;
    g.dt = dt;
    g.nx[0] = axis_count(lo[0], hi[0], h);
    g.nx[1] = dim == 2 ? axis_count(lo[1], hi[1], h) : 1;
    for (int d = 0; d < dim; ++d)
        if (g.nx[size_t(d)] < 3) throw GridTooSmallError("need at least 3 nodes per spatial axis");
    const Real tsteps = (t_end - t_begin) / dt;
    g.nt = int(std::round(tsteps)) + 1;
    if (std::abs(tsteps - std::round(tsteps)) > 1e-6 * std::max(1.0, tsteps))
        throw ConfigError("time range is not an integer multiple of dt");
    if (g.nt < 2) throw GridTooSmallError("need at least 2 time levels");
    return g;
}

SpatialField SpatialField::from_function(const Grid& g, const std::function<Real(Point)>& f) {
    SpatialField s;
    s.dim = g.dim;
    s.lo = g.lo;
    s.hi = g.hi;
    s.h = g.h;
    s.nx = g.nx;
    s.v.resize(size_t(g.nodes()));
    for (int iy = 0; iy < g.nx[1]; ++iy)
        for (int ix = 0; ix < g.nx[0]; ++ix) {
            const Real val = f(g.point(ix, iy));
            if (!std::isfinite(val)) throw Error("non-finite value in spatial field");
            s.v[size_t(s.index(ix, iy))] = val;
        }
    return s;
}

Real SpatialField::interp(const Point& p) const {
    auto locate = [&](int axis, Real q, int& i0, Real& th) {
        const Real s = (q - lo[size_t(axis)]) / h;
        i0 = std::clamp(int(std::floor(s)), 0, nx[size_t(axis)] - 2);
        th = std::clamp(s - i0, 0.0, 1.0);
    };
    int i0;
    Real tx;
    locate(0, p[0], i0, tx);
    if (dim == 1) return (1 - tx) * at(i0, 0) + tx * at(i0 + 1, 0);
    int j0;
    Real ty;
    locate(1, p[1], j0, ty);
    const Real a = (1 - tx) * at(i0, j0) + tx * at(i0 + 1, j0);
    const Real b = (1 - tx) * at(i0, j0 + 1) + tx * at(i0 + 1, j0 + 1);
    return (1 - ty) * a + ty * b;
}

std::array<Real, 3> SpatialField::hessian(int ix, int iy) const {
    const Real h2 = h * h;
    auto second = [&](int axis) {
        int i = axis == 0 ? ix : iy;
        const int n = nx[size_t(axis)];
        i = std::clamp(i, 1, n - 2);
        auto val = [&](int k) { return axis == 0 ? at(k, iy) : at(ix, k); };
        return (val(i + 1) - 2 * val(i) + val(i - 1)) / h2;
    };
    std::array<Real, 3> out{second(0), 0.0, 0.0};
    if (dim == 2) {
        out[2] = second(1);
        const int i = std::clamp(ix, 1, nx[0] - 2);
        const int j = std::clamp(iy, 1, nx[1] - 2);
        out[1] = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4 * h2);
    }
    return out;
}

Real SpatialField::min_value() const { return *std::min_element(v.begin(), v.end()); }
Real SpatialField::max_value() const { return *std::max_element(v.begin(), v.end()); }

GridFunction GridFunction::from_function(const Grid& g, const std::function<Real(Point, Real)>& f) {
    GridFunction u(g);
    const int nn = g.nodes();
    for (int m = 0; m < g.nt; ++m) {
        const Real t = g.t(m);
        for (int iy = 0; iy < g.nx[1]; ++iy)
            for (int ix = 0; ix < g.nx[0]; ++ix) {
                const Real val = f(g.point(ix, iy), t);
                if (!std::isfinite(val)) throw Error("non-finite value in grid function");
                u.v[size_t(m) * size_t(nn) + size_t(g.index(ix, iy))] = val;
            }
    }
    return u;
}

void GridFunction::set(int ix, int iy, int m, Real value) {
    if (!std::isfinite(value)) throw Error("non-finite value written to grid function");
    v[index(ix, iy, m)] = value;
}

void GridFunction::set_level(int m, const std::vector<Real>& level) {
    const size_t nn = size_t(grid.nodes());
    if (level.size() != nn) throw Error("level size mismatch");
    for (const Real x : level)
        if (!std::isfinite(x)) throw Error("non-finite value written to grid function");
    std::copy(level.begin(), level.end(), v.begin() + size_t(m) * nn);
}

Real GridFunction::interp(const Point& p, Real t) const {
    auto locate = [&](Real q, Real origin, Real step, int n, int& i0, Real& th) {
        const Real s = (q - origin) / step;
        i0 = std::clamp(int(std::floor(s)), 0, n - 2);
        th = std::clamp(s - i0, 0.0, 1.0);
    };
    int i0, m0;
    Real tx, tt;
    locate(p[0], grid.lo[0], grid.h, grid.nx[0], i0, tx);
    locate(t, grid.t_begin, grid.dt, grid.nt, m0, tt);
    auto space = [&](int m) {
        if (grid.dim == 1) return (1 - tx) * at(i0, 0, m) + tx * at(i0 + 1, 0, m);
        int j0;
        Real ty;
        locate(p[1], grid.lo[1], grid.h, grid.nx[1], j0, ty);
        const Real a = (1 - tx) * at(i0, j0, m) + tx * at(i0 + 1, j0, m);
        const Real b = (1 - tx) * at(i0, j0 + 1, m) + tx * at(i0 + 1, j0 + 1, m);
        return (1 - ty) * a + ty * b;
    };
    return (1 - tt) * space(m0) + tt * space(m0 + 1);
}

Real GridFunction::max_abs() const {
    return par::max_abs(std::ptrdiff_t(v.size()), [&](std::ptrdiff_t i) { return v[size_t(i)]; });
}

Real GridFunction::min_value() const {
    return par::min_of(std::ptrdiff_t(v.size()), [&](std::ptrdiff_t i) { return v[size_t(i)]; });
}

Real GridFunction::max_value() const {
    return par::max_of(std::ptrdiff_t(v.size()), [&](std::ptrdiff_t i) { return v[size_t(i)]; });
}

std::array<Real, 2> Cylinder::time_window() const {
    const Real t0 = center.t;
    const Real r2 = r * r;
    switch (variant) {
        case CylVariant::Q:
        case CylVariant::Qtilde: return {t0 - r2, t0 + r2};
        case CylVariant::Qplus: return {t0, t0 + r2};
        case CylVariant::Qminus: return {t0 - r2, t0};
        case CylVariant::Dplus: return {t0 + 3 * r2, t0 + 4 * r2};
        case CylVariant::Dminus: return {t0 - 3 * r2, t0 - 2 * r2};
    }
    return {t0 - r2, t0 + r2};
}

bool Cylinder::contains_space(const Point& p) const {
    const Real dx = p[0] - center.x[0];
    const Real dy = p[1] - center.x[1];
    if (variant == CylVariant::Qtilde) return std::max(std::abs(dx), std::abs(dy)) <= r + kSlack;
    return dx * dx + dy * dy <= r * r * (1 + 1e-12) + kSlack;
}

bool Cylinder::contains(const Point& p, Real t) const {
    const auto w = time_window();
    return t >= w[0] - kSlack && t <= w[1] + kSlack && contains_space(p);
}

void for_each_node(const Grid& g, const Cylinder& c,
                   const std::function<void(int, int, int)>& fn) {
    const auto w = c.time_window();
    const int m_lo = std::max(0, int(std::ceil((w[0] - g.t_begin - kSlack) / g.dt)));
    const int m_hi = std::min(g.nt - 1, int(std::floor((w[1] - g.t_begin + kSlack) / g.dt)));
    auto axis_range = [&](int axis, int& i_lo, int& i_hi) {
        const Real a = c.center.x[axis] - c.r;
        const Real b = c.center.x[axis] + c.r;
        i_lo = std::max(0, int(std::ceil((a - g.lo[size_t(axis)] - kSlack) / g.h)));
        i_hi = std::min(g.nx[size_t(axis)] - 1, int(std::floor((b - g.lo[size_t(axis)] + kSlack) / g.h)));
    };
    int ix_lo, ix_hi;
    axis_range(0, ix_lo, ix_hi);
    int iy_lo = 0, iy_hi = 0;
    if (g.dim == 2) axis_range(1, iy_lo, iy_hi);
    for (int m = m_lo; m <= m_hi; ++m)
        for (int iy = iy_lo; iy <= iy_hi; ++iy)
            for (int ix = ix_lo; ix <= ix_hi; ++ix)
                if (c.contains_space(g.point(ix, iy))) fn(ix, iy, m);
}

CylinderStats cylinder_stats(const GridFunction& u, const Cylinder& c, Real contact_tol) {
    CylinderStats s;
    s.sup = -std::numeric_limits<Real>::infinity();
    s.inf = std::numeric_limits<Real>::infinity();
    long zero_count = 0;
    for_each_node(u.grid, c, [&](int ix, int iy, int m) {
        const Real val = u.at(ix, iy, m);
        s.sup = std::max(s.sup, val);
        s.inf = std::min(s.inf, val);
        if (val <= contact_tol) ++zero_count;
        ++s.node_count;
    });
    if (s.node_count == 0) throw EmptyRegionError("cylinder does not intersect the grid");
    const Real vol = u.grid.cell_volume();
    s.zero_measure = Real(zero_count) * vol;
    s.total_measure = Real(s.node_count) * vol;
    return s;
}

Real parabolic_distance(const SpaceTimePoint& p, const SpaceTimePoint& q) {
    Real dx2 = 0;
    for (int d = 0; d < 2; ++d) {
        const Real d1 = p.x[d] - q.x[d];
        dx2 += d1 * d1;
    }
    return std::max(std::sqrt(dx2), std::sqrt(std::abs(p.t - q.t)));
}

Real diff_t(const GridFunction& u, int ix, int iy, int m) {
    const Grid& g = u.grid;
    if (m == 0) return (u.at(ix, iy, 1) - u.at(ix, iy, 0)) / g.dt;
    return (u.at(ix, iy, m) - u.at(ix, iy, m - 1)) / g.dt;
}

Real diff_grad(const GridFunction& u, int axis, int ix, int iy, int m) {
    const Grid& g = u.grid;
    const int n = g.nx[size_t(axis)];
    const int i = axis == 0 ? ix : iy;
    auto val = [&](int k) { return axis == 0 ? u.at(k, iy, m) : u.at(ix, k, m); };
    if (i == 0) return (-3 * val(0) + 4 * val(1) - val(2)) / (2 * g.h);
    if (i == n - 1) return (3 * val(n - 1) - 4 * val(n - 2) + val(n - 3)) / (2 * g.h);
    return (val(i + 1) - val(i - 1)) / (2 * g.h);
}

Real diff_second(const GridFunction& u, int axis, int ix, int iy, int m) {
    const Grid& g = u.grid;
    const int n = g.nx[size_t(axis)];
    int i = axis == 0 ? ix : iy;
    i = std::clamp(i, 1, n - 2);
    auto val = [&](int k) { return axis == 0 ? u.at(k, iy, m) : u.at(ix, k, m); };
    return (val(i + 1) - 2 * val(i) + val(i - 1)) / (g.h * g.h);
}

Real diff_cross(const GridFunction& u, int ix, int iy, int m) {
    const Grid& g = u.grid;
    if (g.dim == 1) return 0.0;
    const int i = std::clamp(ix, 1, g.nx[0] - 2);
    const int j = std::clamp(iy, 1, g.nx[1] - 2);
    return (u.at(i + 1, j + 1, m) - u.at(i + 1, j - 1, m) - u.at(i - 1, j + 1, m) + u.at(i - 1, j - 1, m)) /
           (4 * g.h * g.h);
}

Real diff_dir_second(const GridFunction& u, const Real e[2], int ix, int iy, int m) {
    if (u.grid.dim == 1) return diff_second(u, 0, ix, iy, m);
    const Real uxx = diff_second(u, 0, ix, iy, m);
    const Real uyy = diff_second(u, 1, ix, iy, m);
    const Real uxy = diff_cross(u, ix, iy, m);
    return e[0] * e[0] * uxx + 2 * e[0] * e[1] * uxy + e[1] * e[1] * uyy;
}

Real grad_norm(const GridFunction& u, int ix, int iy, int m) {
    const Real gx = diff_grad(u, 0, ix, iy, m);
    if (u.grid.dim == 1) return std::abs(gx);
    const Real gy = diff_grad(u, 1, ix, iy, m);
    return std::sqrt(gx * gx + gy * gy);
}

DerivedFields finite_differences(const GridFunction& u) {
    const Grid& g = u.grid;
    for (int d = 0; d < g.dim; ++d)
        if (g.nx[size_t(d)] < 3) throw GridTooSmallError("finite differences need 3 nodes per axis");
    if (g.nt < 2) throw GridTooSmallError("finite differences need 2 time levels");
    DerivedFields out{GridFunction(g), {GridFunction(g), GridFunction(g)}, GridFunction(g), GridFunction(g), GridFunction(g)};
    const int nn = g.nodes();
    for (int m = 0; m < g.nt; ++m) {
        par::for_each(nn, [&](std::ptrdiff_t node) {
            const int ix = int(node) % g.nx[0];
            const int iy = int(node) / g.nx[0];
            const size_t k = size_t(m) * size_t(nn) + size_t(node);
            out.dt_u.v[k] = diff_t(u, ix, iy, m);
            out.grad[0].v[k] = diff_grad(u, 0, ix, iy, m);
            out.hess_xx.v[k] = diff_second(u, 0, ix, iy, m);
            if (g.dim == 2) {
                out.grad[1].v[k] = diff_grad(u, 1, ix, iy, m);
                out.hess_yy.v[k] = diff_second(u, 1, ix, iy, m);
                out.hess_xy.v[k] = diff_cross(u, ix, iy, m);
            }
        });
    }
    return out;
}

GridFunction rescale(const GridFunction& u, const SpaceTimePoint& center, Real r, const Grid& ref_grid) {
    const Grid& src = u.grid;
    // Check the whole mapped box before interpolating.
    for (int d = 0; d < ref_grid.dim; ++d) {
        const Real a = center.x[d] + r * ref_grid.lo[size_t(d)];
        const Real b = center.x[d] + r * ref_grid.hi[size_t(d)];
        if (a < src.lo[size_t(d)] - kSlack || b > src.hi[size_t(d)] + kSlack)
            throw OutOfDomainError("rescale: mapped region exits the spatial domain");
    }
    const Real r2 = r * r;
    if (center.t + r2 * ref_grid.t_begin < src.t_begin - kSlack ||
        center.t + r2 * ref_grid.t_end > src.t_end + kSlack)
        throw OutOfDomainError("rescale: mapped region exits the time domain");

    GridFunction out(ref_grid);
    const int nn = ref_grid.nodes();
    for (int m = 0; m < ref_grid.nt; ++m) {
        const Real t = center.t + r2 * ref_grid.t(m);
        par::for_each(nn, [&](std::ptrdiff_t node) {
            const int ix = int(node) % ref_grid.nx[0];
            const int iy = int(node) / ref_grid.nx[0];
            Point p = ref_grid.point(ix, iy);
            Point q;
            q[0] = center.x[0] + r * p[0];
            q[1] = center.x[1] + r * p[1];
            out.v[size_t(m) * size_t(nn) + size_t(node)] = u.interp(q, t) / r2;
        });
    }
    return out;
}

} // namespace parobs::grid
