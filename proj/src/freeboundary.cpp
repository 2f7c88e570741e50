#include "parobs/freeboundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "parobs/kernels.hpp"

namespace parobs::freeboundary {

using grid::Grid;
using grid::GridFunction;

bool ContactSet::empty() const {
    return std::none_of(mask.begin(), mask.end(), [](char c) { return c != 0; });
}

bool ContactSet::full() const {
    return std::all_of(mask.begin(), mask.end(), [](char c) { return c != 0; });
}

ContactSet extract_contact_set(const GridFunction& u, Real kappa_c) {
    if (kappa_c <= 0) throw ConfigError("kappa_c must be positive");
    ContactSet c;
    c.grid = u.grid;
    c.kappa_c = kappa_c;
    c.tol_contact = kappa_c * u.grid.h * u.grid.h;
    c.mask.resize(u.v.size());
    par::for_each(std::ptrdiff_t(u.v.size()), [&](std::ptrdiff_t i) {
        c.mask[size_t(i)] = u.v[size_t(i)] <= c.tol_contact ? 1 : 0;
    });
    return c;
}

namespace {

CloudPoint make_point(const GridFunction& u, const Grid& g, Real tol,
                      int ix, int iy, int m, int axis) {
    // crossing on the edge from (ix,iy,m) toward +axis
    const Real u0 = u.at(ix, iy, m);
    int jx = ix, jy = iy, jm = m;
    if (axis == 0) ++jx;
    else if (axis == 1) ++jy;
    else ++jm;
    const Real u1 = u.at(jx, jy, jm);
    const Real theta = std::clamp((tol - u0) / (u1 - u0), 0.0, 1.0);
    CloudPoint p;
    p.edge_axis = axis;
    const Point a = g.point(ix, iy);
    const Point b = g.point(jx, jy);
    p.x[0] = a[0] + theta * (b[0] - a[0]);
    p.x[1] = a[1] + theta * (b[1] - a[1]);
    p.t = g.t(m) + theta * (g.t(jm) - g.t(m));
    const Real gx = grid::diff_grad(u, 0, ix, iy, m);
    const Real gy = g.dim == 2 ? grid::diff_grad(u, 1, ix, iy, m) : 0.0;
    const Real norm = std::sqrt(gx * gx + gy * gy);
    if (norm > 0) p.normal = {gx / norm, gy / norm};
    return p;
}

} // namespace

FreeBoundaryCloud extract_free_boundary(const GridFunction& u, const ContactSet& contact) {
    if (contact.empty() || contact.full())
        throw NoBoundaryError("contact set is empty or covers the whole grid");
    const Grid& g = u.grid;
    FreeBoundaryCloud cloud;
    cloud.h = g.h;
    cloud.dt = g.dt;
    cloud.tol = contact.tol_contact;
    for (int m = 0; m < g.nt; ++m)
        for (int iy = 0; iy < g.nx[1]; ++iy)
            for (int ix = 0; ix < g.nx[0]; ++ix) {
                const bool c0 = contact.at(ix, iy, m);
                if (ix + 1 < g.nx[0] && c0 != contact.at(ix + 1, iy, m))
                    cloud.points.push_back(make_point(u, g, contact.tol_contact, ix, iy, m, 0));
                if (g.dim == 2 && iy + 1 < g.nx[1] && c0 != contact.at(ix, iy + 1, m))
                    cloud.points.push_back(make_point(u, g, contact.tol_contact, ix, iy, m, 1));
                if (m + 1 < g.nt && c0 != contact.at(ix, iy, m + 1))
                    cloud.points.push_back(make_point(u, g, contact.tol_contact, ix, iy, m, 2));
            }
    return cloud;
}

Real density(const GridFunction& u, const ContactSet& contact, const SpaceTimePoint& center, Real r) {
    if (r < 4 * u.grid.h) throw ConfigError("density needs r >= 4h");
    const auto stats = grid::cylinder_stats(u, grid::Cylinder(center, r), contact.tol_contact);
    return stats.zero_measure / stats.total_measure;
}

BoundaryGraph time_graph(const GridFunction& u, const ContactSet& contact) {
    if (contact.empty() || contact.full()) throw NoBoundaryError("no free boundary to graph");
    const Grid& g = u.grid;
    const Real inf = std::numeric_limits<Real>::infinity();
    BoundaryGraph out;
    out.kind = BoundaryGraph::Kind::Time;
    out.tau.assign(size_t(g.nodes()), inf);
    out.flagged.assign(size_t(g.nodes()), 0);

    for (int iy = 0; iy < g.nx[1]; ++iy)
        for (int ix = 0; ix < g.nx[0]; ++ix) {
            const int col = g.index(ix, iy);
            int first_pos = -1;
            bool multivalued = false;
            bool seen_pos = false;
            for (int m = 0; m < g.nt; ++m) {
                const bool pos = !contact.at(ix, iy, m);
                if (pos && first_pos < 0) first_pos = m;
                if (!pos && seen_pos) multivalued = true; // re-touches zero
                seen_pos = seen_pos || pos;
            }
            if (first_pos < 0) {
                out.tau[size_t(col)] = inf; // never positive
                out.flagged[size_t(col)] = 1;
            } else if (first_pos == 0) {
                out.tau[size_t(col)] = -inf; // positive from the start (censored)
                out.flagged[size_t(col)] = 1;
            } else {
                const Real u0 = u.at(ix, iy, first_pos - 1);
                const Real u1 = u.at(ix, iy, first_pos);
                const Real theta = std::clamp((contact.tol_contact - u0) / (u1 - u0), 0.0, 1.0);
                out.tau[size_t(col)] = g.t(first_pos - 1) + theta * g.dt;
                if (multivalued) out.flagged[size_t(col)] = 1;
            }
        }

    Real lip = 0.0;
    long pairs = 0;
    auto consider = [&](int c0, int c1) {
        if (out.flagged[size_t(c0)] || out.flagged[size_t(c1)]) return;
        lip = std::max(lip, std::abs(out.tau[size_t(c1)] - out.tau[size_t(c0)]) / g.h);
        ++pairs;
    };
    for (int iy = 0; iy < g.nx[1]; ++iy)
        for (int ix = 0; ix + 1 < g.nx[0]; ++ix) consider(g.index(ix, iy), g.index(ix + 1, iy));
    if (g.dim == 2)
        for (int iy = 0; iy + 1 < g.nx[1]; ++iy)
            for (int ix = 0; ix < g.nx[0]; ++ix) consider(g.index(ix, iy), g.index(ix, iy + 1));
    out.lipschitz_estimate = lip;
    out.valid_pairs = pairs;
    return out;
}

BoundaryGraph space_graph(const FreeBoundaryCloud& cloud, const std::array<Real, 2>& e, Real window,
                          const Point& center) {
    BoundaryGraph out;
    out.kind = BoundaryGraph::Kind::Space;
    const Real en = std::sqrt(e[0] * e[0] + e[1] * e[1]);
    if (en == 0) throw ConfigError("space_graph needs a nonzero direction");
    const std::array<Real, 2> eu{e[0] / en, e[1] / en};
    const std::array<Real, 2> ep{-eu[1], eu[0]};

    // bin spatial-edge crossings by (x' cell, time level)
    std::map<std::pair<long, long>, std::vector<Real>> bins;
    const Real bin_w = cloud.h;
    const Real bin_t = std::max(cloud.dt, 1e-12);
    for (const auto& p : cloud.points) {
        if (p.edge_axis == 2) continue; // time edges do not define the spatial graph
        const Real dx = p.x[0] - center[0];
        const Real dy = p.x[1] - center[1];
        const Real xp = dx * ep[0] + dy * ep[1];
        const Real ge = dx * eu[0] + dy * eu[1];
        if (std::abs(xp) > window || std::abs(ge) > window) continue;
        const long bx = std::lround(xp / bin_w);
        const long bt = std::lround(p.t / bin_t);
        bins[{bx, bt}].push_back(ge);
        out.samples.push_back({xp, p.t, ge});
    }
    if (out.samples.empty()) throw NoBoundaryError("no cloud points inside the window");

    for (auto& [key, vals] : bins) {
        const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
        if (*mx - *mn > 3 * cloud.h)
            throw MultivaluedGraphError("graph is multivalued along the projection direction");
    }

    // discrete gradient of g along x' per time level, from bin means
    std::map<long, std::map<long, Real>> per_level; // bt -> bx -> mean g
    for (auto& [key, vals] : bins) {
        Real s = 0;
        for (Real v : vals) s += v;
        per_level[key.second][key.first] = s / Real(vals.size());
    }
    std::vector<std::array<Real, 2>> grads; // (|x'| position, dg/dx')
    Real lip = 0.0, grad_sum = 0.0;
    long grad_n = 0;
    for (auto& [bt, row] : per_level) {
        for (auto it = row.begin(); it != row.end(); ++it) {
            auto next = std::next(it);
            if (next == row.end()) break;
            if (next->first != it->first + 1) continue;
            const Real dg = (next->second - it->second) / bin_w;
            grads.push_back({std::abs((it->first + 0.5) * bin_w), dg});
            lip = std::max(lip, std::abs(dg));
            grad_sum += dg;
            ++grad_n;
        }
    }
    out.lipschitz_estimate = lip;
    if (grad_n > 0) {
        const Real gbar = grad_sum / Real(grad_n);
        // graph x.e = g(x'): normal direction e - g' e_perp, normalized
        Real nx = eu[0] - gbar * ep[0];
        Real ny = eu[1] - gbar * ep[1];
        const Real nn = std::sqrt(nx * nx + ny * ny);
        out.normal_estimate = {nx / nn, ny / nn};
    }

    // oscillation of the discrete gradient over dyadic windows
    for (Real w = window; w >= 2 * bin_w; w /= 2) {
        Real lo = std::numeric_limits<Real>::infinity(), hi = -lo;
        for (const auto& g2 : grads)
            if (g2[0] <= w) {
                lo = std::min(lo, g2[1]);
                hi = std::max(hi, g2[1]);
            }
        if (hi >= lo) out.c1_modulus_table.push_back({w, hi - lo});
    }
    return out;
}

bool cone_test(const std::vector<Point>& points, const Point& x0, const std::array<Real, 2>& e0,
               Real theta) {
    if (!(theta > 0 && theta < M_PI / 2)) throw ConfigError("cone_test needs theta in (0, pi/2)");
    const Real en = std::sqrt(e0[0] * e0[0] + e0[1] * e0[1]);
    const Real tan_theta = std::tan(theta);
    for (const auto& p : points) {
        const Real dx = p[0] - x0[0];
        const Real dy = p[1] - x0[1];
        const Real axial = (dx * e0[0] + dy * e0[1]) / en;
        if (axial == 0.0) continue; // on the equatorial plane: outside the two-sided cone
        const Real r2 = dx * dx + dy * dy;
        const Real perp = std::sqrt(std::max(0.0, r2 - axial * axial));
        if (perp / std::abs(axial) < tan_theta) return false;
    }
    return true;
}

std::vector<char> near_boundary_mask(const ContactSet& contact) {
    // The mask transition sits at u = kappa_c h^2, one cell into the positivity
    // set; the kink of u lies up to sqrt(2 kappa_c) h below it. Two cells of
    // spatial margin keep central stencils clear of both.
    const Grid& g = contact.grid;
    const int nn = g.nodes();
    std::vector<char> out(contact.mask.size(), 0);
    par::for_each(std::ptrdiff_t(contact.mask.size()), [&](std::ptrdiff_t k) {
        const int m = int(k / nn);
        const int node = int(k % nn);
        const int ix = node % g.nx[0];
        const int iy = node / g.nx[0];
        const bool state = contact.at(ix, iy, m);
        for (int dm = -1; dm <= 1; ++dm)
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    const int jx = ix + dx, jy = iy + dy, jm = m + dm;
                    if (jx < 0 || jx >= g.nx[0] || jm < 0 || jm >= g.nt) continue;
                    if (g.dim == 2 && (jy < 0 || jy >= g.nx[1])) continue;
                    if (g.dim == 1 && dy != 0) continue;
                    if (contact.at(jx, g.dim == 2 ? jy : 0, jm) != state) {
                        out[size_t(k)] = 1;
                        return;
                    }
                }
    });
    return out;
}

} // namespace parobs::freeboundary
