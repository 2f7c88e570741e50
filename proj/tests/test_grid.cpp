#include "doctest.h"

#include <cmath>

#include "parobs/grid.hpp"

using namespace parobs;
using namespace parobs::grid;

TEST_SUITE_BEGIN("grid");

TEST_CASE("grid construction validates sizes") {
    CHECK_THROWS_AS(Grid::make(1, {0.0, 0.0}, {0.1, 0.0}, 0.1, 0.0, 1.0, 0.1), GridTooSmallError);
    CHECK_THROWS_AS(Grid::make(1, {0.0, 0.0}, {1.0, 0.0}, -0.1, 0.0, 1.0, 0.1), ConfigError);
    const auto g = Grid::make(2, {-1.0, -1.0}, {1.0, 1.0}, 0.25, 0.0, 1.0, 0.25);
    CHECK(g.nx[0] == 9);
    CHECK(g.nx[1] == 9);
    CHECK(g.nt == 5);
}

TEST_CASE("finite differences are exact on quadratics") {
    const auto g = Grid::make(2, {-1.0, -1.0}, {1.0, 1.0}, 0.125, 0.0, 0.5, 0.125);
    const auto u = GridFunction::from_function(
        g, [](Point p, Real t) { return p[0] * p[0] + p[0] * p[1] + t; });
    const auto d = finite_differences(u);
    const int m = 2;
    for (int iy = 1; iy < g.nx[1] - 1; ++iy)
        for (int ix = 1; ix < g.nx[0] - 1; ++ix) {
            const size_t k = u.index(ix, iy, m);
            CHECK(d.hess_xx.v[k] == doctest::Approx(2.0).epsilon(1e-10));
            CHECK(d.hess_xy.v[k] == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(d.hess_yy.v[k] == doctest::Approx(0.0).epsilon(1e-10));
            CHECK(d.dt_u.v[k] == doctest::Approx(1.0).epsilon(1e-10));
        }
    // shifted stencils at the spatial edges keep quadratic exactness
    CHECK(d.hess_xx.v[u.index(0, 3, m)] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(d.hess_xx.v[u.index(g.nx[0] - 1, 3, m)] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("parabolic distance") {
    SpaceTimePoint p, q;
    p.x[0] = 0;
    p.t = 0;
    q.x[0] = 3;
    q.t = -4;
    CHECK(parabolic_distance(p, q) == doctest::Approx(3.0));
    CHECK(parabolic_distance(p, p) == doctest::Approx(0.0));
    q.x[0] = 1;
    CHECK(parabolic_distance(p, q) == doctest::Approx(2.0));
}

TEST_CASE("parabolic distance satisfies the triangle inequality on random triples") {
    Rng rng(17);
    for (int i = 0; i < 500; ++i) {
        auto rnd = [&]() {
            SpaceTimePoint p;
            p.x[0] = rng.uniform(-2, 2);
            p.x[1] = rng.uniform(-2, 2);
            p.t = rng.uniform(-2, 2);
            return p;
        };
        const auto a = rnd(), b = rnd(), c = rnd();
        CHECK(parabolic_distance(a, b) <=
              parabolic_distance(a, c) + parabolic_distance(c, b) + 1e-12);
    }
}

TEST_CASE("cylinder stats on constants and the half parabola") {
    const auto g = Grid::make(1, {-1.0, 0.0}, {1.0, 0.0}, 1.0 / 128.0, -1.0, 1.0, 0.025);
    SUBCASE("constant field") {
        const auto u = GridFunction::from_function(g, [](Point, Real) { return 1.0; });
        SpaceTimePoint c;
        const auto s = cylinder_stats(u, Cylinder(c, 0.5), 1e-6);
        CHECK(s.sup == doctest::Approx(1.0));
        CHECK(s.inf == doctest::Approx(1.0));
        CHECK(s.zero_measure == doctest::Approx(0.0));
    }
    SUBCASE("half parabola covers half the cylinder") {
        const auto u = GridFunction::from_function(
            g, [](Point p, Real) { return 0.5 * std::max(p[0], 0.0) * std::max(p[0], 0.0); });
        SpaceTimePoint c;
        const auto s = cylinder_stats(u, Cylinder(c, 0.9), 0.5 / (128.0 * 128.0));
        CHECK(s.zero_measure / s.total_measure == doctest::Approx(0.5).epsilon(0.05));
    }
    SUBCASE("total measure of Q_1 in 1D is about 4") {
        const auto u = GridFunction::from_function(g, [](Point, Real) { return 1.0; });
        SpaceTimePoint c;
        const auto s = cylinder_stats(u, Cylinder(c, 1.0), 0.0);
        CHECK(s.total_measure == doctest::Approx(4.0).epsilon(0.03));
    }
    SUBCASE("empty intersection throws") {
        const auto u = GridFunction::from_function(g, [](Point, Real) { return 1.0; });
        SpaceTimePoint c;
        c.x[0] = 50.0;
        CHECK_THROWS_AS(cylinder_stats(u, Cylinder(c, 0.1), 0.0), EmptyRegionError);
    }
}

TEST_CASE("cylinder sup is monotone in the radius") {
    const auto g = Grid::make(1, {-1.0, 0.0}, {1.0, 0.0}, 1.0 / 64.0, -1.0, 1.0, 0.05);
    const auto u = GridFunction::from_function(
        g, [](Point p, Real t) { return std::sin(3 * p[0]) + 0.5 * std::cos(2 * t); });
    SpaceTimePoint c;
    Real prev = -1e30;
    for (const Real r : {0.1, 0.2, 0.4, 0.8}) {
        const auto s = cylinder_stats(u, Cylinder(c, r), 0.0);
        CHECK(s.sup >= prev - 1e-12);
        prev = s.sup;
    }
}

TEST_CASE("tilde cylinders use the max-norm ball") {
    const auto g = Grid::make(2, {-1.0, -1.0}, {1.0, 1.0}, 0.125, -1.0, 1.0, 0.5);
    const auto u = GridFunction::from_function(g, [](Point, Real) { return 1.0; });
    SpaceTimePoint c;
    const auto round_stats = cylinder_stats(u, Cylinder(c, 0.5, CylVariant::Q), 0.0);
    const auto cube_stats = cylinder_stats(u, Cylinder(c, 0.5, CylVariant::Qtilde), 0.0);
    // the cube contains the corners the ball excludes
    CHECK(cube_stats.node_count > round_stats.node_count);
    Cylinder cube(c, 0.5, CylVariant::Qtilde);
    Point corner;
    corner[0] = 0.5;
    corner[1] = 0.5;
    CHECK(cube.contains_space(corner));
    CHECK_FALSE(Cylinder(c, 0.5, CylVariant::Q).contains_space(corner));
}

TEST_CASE("D variants sit in the right time windows") {
    SpaceTimePoint c;
    c.t = 1.0;
    const Cylinder dm(c, 0.5, CylVariant::Dminus);
    const auto wm = dm.time_window();
    CHECK(wm[0] == doctest::Approx(1.0 - 0.75));
    CHECK(wm[1] == doctest::Approx(1.0 - 0.5));
    const Cylinder dp(c, 0.5, CylVariant::Dplus);
    const auto wp = dp.time_window();
    CHECK(wp[0] == doctest::Approx(1.0 + 0.75));
    CHECK(wp[1] == doctest::Approx(1.0 + 1.0));
}

TEST_CASE("rescale reproduces 2-homogeneous profiles") {
    const auto g = Grid::make(1, {-2.0, 0.0}, {2.0, 0.0}, 1.0 / 128.0, -1.0, 1.0, 0.0125);
    const auto ref = Grid::make(1, {-1.0, 0.0}, {1.0, 0.0}, 1.0 / 32.0, -1.0, 1.0, 0.125);
    const auto u = GridFunction::from_function(
        g, [](Point p, Real) { return 0.5 * std::max(p[0], 0.0) * std::max(p[0], 0.0); });
    SpaceTimePoint c;
    for (const Real r : {0.5, 0.25, 0.125}) {
        // multilinear interpolation is exact only when sample points hit source
        // nodes; elsewhere the error is O(h^2 / r^2)
        const Real tol = (1.0 / 128.0) * (1.0 / 128.0) / (8 * r * r) + 1e-12;
        const auto v = rescale(u, c, r, ref);
        for (int ix = 0; ix < ref.nx[0]; ++ix) {
            const Real x = ref.x(0, ix);
            CHECK(std::abs(v.at(ix, 0, 3) - 0.5 * std::max(x, 0.0) * std::max(x, 0.0)) <= tol);
        }
    }
}

TEST_CASE("rescale reproduces 2D quadratics") {
    const auto g = Grid::make(2, {-1.0, -1.0}, {1.0, 1.0}, 1.0 / 64.0, -1.0, 1.0, 0.25);
    const auto ref = Grid::make(2, {-1.0, -1.0}, {1.0, 1.0}, 1.0 / 16.0, -1.0, 1.0, 0.25);
    auto q = [](Point p) { return p[0] * p[0] + 0.6 * p[0] * p[1] + 0.5 * p[1] * p[1]; };
    const auto u = GridFunction::from_function(g, [&](Point p, Real) { return q(p); });
    SpaceTimePoint c;
    for (const Real r : {0.5, 0.25}) {
        const Real tol = (1.0 / 64.0) * (1.0 / 64.0) / (2 * r * r) + 1e-12;
        const auto v = rescale(u, c, r, ref);
        for (int iy = 0; iy < ref.nx[1]; ++iy)
            for (int ix = 0; ix < ref.nx[0]; ++ix)
                CHECK(std::abs(v.at(ix, iy, 4) - q(ref.point(ix, iy))) <= tol);
    }
}

TEST_CASE("rescale of the travelling wave matches the Taylor value") {
    // u(x,t) = e^(x+t) - 1 - (x+t) on {x+t>0}; u_r(1,0) at r = 0.01 is w(0.01)/1e-4.
    // h = 0.002 puts the sample x = 0.01 on a source node.
    const auto g = Grid::make(1, {-2.0, 0.0}, {2.0, 0.0}, 0.002, -0.05, 0.05, 0.00025);
    const auto u = GridFunction::from_function(g, [](Point p, Real t) {
        const Real s = std::max(p[0] + t, 0.0);
        return std::exp(s) - 1.0 - s;
    });
    const auto ref = Grid::make(1, {-1.0, 0.0}, {1.0, 0.0}, 1.0 / 16.0, -1.0, 1.0, 0.25);
    SpaceTimePoint c;
    const auto v = rescale(u, c, 0.01, ref);
    const Real expected = (std::exp(0.01) - 1.0 - 0.01) / 1e-4; // = 0.50167 to 5 digits
    CHECK(expected == doctest::Approx(0.50167).epsilon(2e-5));
    CHECK(v.at(ref.nx[0] - 1, 0, 4) == doctest::Approx(expected).epsilon(1e-3 / 0.5));
}

TEST_CASE("rescale composes multiplicatively up to interpolation error") {
    const auto g = Grid::make(1, {-2.0, 0.0}, {2.0, 0.0}, 1.0 / 256.0, -1.0, 1.0, 0.00625);
    const auto ref = Grid::make(1, {-1.0, 0.0}, {1.0, 0.0}, 1.0 / 64.0, -1.0, 1.0, 0.0625);
    const auto u = GridFunction::from_function(g, [](Point p, Real t) {
        const Real s = std::max(p[0] + t, 0.0);
        return std::exp(s) - 1.0 - s;
    });
    SpaceTimePoint origin;
    const auto once = rescale(u, origin, 0.25, ref);   // r1 * r2 = 0.5 * 0.5
    const auto first = rescale(u, origin, 0.5, ref);
    const auto twice = rescale(first, origin, 0.5, ref);
    Real dev = 0.0;
    for (int ix = 8; ix < ref.nx[0] - 8; ++ix)
        dev = std::max(dev, std::abs(once.at(ix, 0, 16) - twice.at(ix, 0, 16)));
    CHECK(dev <= 5e-3); // O(h^2 / r^2)
}

TEST_CASE("rescale refuses to leave the domain") {
    const auto g = Grid::make(1, {-1.0, 0.0}, {1.0, 0.0}, 1.0 / 32.0, 0.0, 0.5, 0.03125);
    const auto ref = Grid::make(1, {-1.0, 0.0}, {1.0, 0.0}, 1.0 / 16.0, -1.0, 1.0, 0.25);
    const auto u = GridFunction::from_function(g, [](Point, Real) { return 1.0; });
    SpaceTimePoint c;
    c.t = 0.25;
    CHECK_THROWS_AS(rescale(u, c, 0.9, ref), OutOfDomainError);  // time window exits
    c.x[0] = 0.9;
    CHECK_THROWS_AS(rescale(u, c, 0.3, ref), OutOfDomainError);  // space exits
}

TEST_CASE("grid function rejects non-finite writes") {
    const auto g = Grid::make(1, {0.0, 0.0}, {1.0, 0.0}, 0.25, 0.0, 1.0, 0.5);
    GridFunction u(g);
    CHECK_THROWS_AS(u.set(0, 0, 0, std::nan("")), Error);
    CHECK_THROWS_AS(u.set(1, 0, 0, INFINITY), Error);
    CHECK_NOTHROW(u.set(1, 0, 0, 3.0));
}

TEST_SUITE_END();
