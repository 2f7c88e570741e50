#pragma once

#include <array>
#include <vector>

#include "parobs/grid.hpp"

namespace parobs::freeboundary {

// Node mask of the discrete contact set {u <= kappa_c h^2}.
struct ContactSet {
    grid::Grid grid;
    std::vector<char> mask; // per (node, level), aligned with GridFunction storage
    Real tol_contact = 0.0;
    Real kappa_c = 0.0;

    bool at(int ix, int iy, int m) const {
        return mask[size_t(m) * size_t(grid.nodes()) + size_t(grid.index(ix, iy))] != 0;
    }
    bool empty() const;
    bool full() const;
};

ContactSet extract_contact_set(const grid::GridFunction& u, Real kappa_c = 0.5);

struct CloudPoint {
    Point x;
    Real t = 0.0;
    int edge_axis = 0; // 0/1: spatial axis, 2: time edge
    std::array<Real, 2> normal{{0.0, 0.0}}; // local unit spatial gradient estimate
};

struct FreeBoundaryCloud {
    std::vector<CloudPoint> points;
    Real h = 0.0;
    Real dt = 0.0;
    Real tol = 0.0;
};

// Marching-edges extraction: linear crossings of level tol_contact on all
// grid edges joining a contact node with a positive node.
FreeBoundaryCloud extract_free_boundary(const grid::GridFunction& u, const ContactSet& contact);

// |{u = 0} cap Q_r| / |Q_r| on the realized cylinder.
Real density(const grid::GridFunction& u, const ContactSet& contact, const SpaceTimePoint& center, Real r);

struct BoundaryGraph {
    enum class Kind { Time, Space } kind = Kind::Time;

    // time graph t = tau(x): one entry per spatial node column
    std::vector<Real> tau;       // +inf never positive, -inf positive from the first level
    std::vector<char> flagged;   // censored or multivalued columns
    Real lipschitz_estimate = 0.0;
    long valid_pairs = 0;

    // space graph x_e = g(x', t): sample rows (x', t, g)
    std::vector<std::array<Real, 3>> samples;
    std::vector<std::array<Real, 2>> c1_modulus_table; // (window, oscillation of grad_x' g)
    std::array<Real, 2> normal_estimate{{0.0, 0.0}};
};

BoundaryGraph time_graph(const grid::GridFunction& u, const ContactSet& contact);

BoundaryGraph space_graph(const FreeBoundaryCloud& cloud, const std::array<Real, 2>& e, Real window,
                          const Point& center = Point{});

// True iff no point lies in the two-sided cone C(x0, e0, theta).
bool cone_test(const std::vector<Point>& points, const Point& x0, const std::array<Real, 2>& e0,
               Real theta);

// Nodes whose finite-difference stencil straddles the free boundary: anything
// within one cell (space and time) of a contact-state change.
std::vector<char> near_boundary_mask(const ContactSet& contact);

} // namespace parobs::freeboundary
