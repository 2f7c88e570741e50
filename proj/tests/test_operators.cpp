#include "doctest.h"

#include <cmath>

#include "parobs/operators.hpp"

using namespace parobs;
using namespace parobs::operators;

namespace {

grid::Grid small_grid_1d() {
    return grid::Grid::make(1, {-1.0, 0.0}, {1.0, 0.0}, 0.0625, 0.0, 0.1, 0.05);
}

} // namespace

TEST_SUITE_BEGIN("operators");

TEST_CASE("bounds validation") {
    CHECK_THROWS_AS(EllipticityBounds(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(EllipticityBounds(2.0, 1.0), ConfigError);
    CHECK_NOTHROW(EllipticityBounds(1.0, 1.0));
}

TEST_CASE("evaluate: trace operator on diag(2,3)") {
    const auto op = linear_operator(2, SymMat::identity(2));
    const auto ev = op.evaluate(SymMat::diag2(2.0, 3.0), Point{});
    CHECK(ev.value == doctest::Approx(5.0));
    CHECK(ev.active_control == 0);
}

TEST_CASE("evaluate: F(O) = 0 with lowest-index tie break") {
    const auto op = pucci_diagonal(2, EllipticityBounds(1.0, 2.0));
    const auto ev = op.evaluate(SymMat{2, 0.0, 0.0, 0.0}, Point{});
    CHECK(ev.value == doctest::Approx(0.0));
    CHECK(ev.active_control == 0);
}

TEST_CASE("evaluate: diagonal Pucci on diag(1,-1)") {
    const auto op = pucci_diagonal(2, EllipticityBounds(1.0, 2.0));
    const auto ev = op.evaluate(SymMat::diag2(1.0, -1.0), Point{});
    CHECK(ev.value == doctest::Approx(1.0)); // 2*1 - 1*1
    // the winning control pairs Lambda on axis 1 with lambda on axis 2
    const auto a = op.controls()[size_t(ev.active_control)].A;
    CHECK(a.xx == doctest::Approx(2.0));
    CHECK(a.yy == doctest::Approx(1.0));
}

TEST_CASE("empty control list rejected at construction") {
    CHECK_THROWS_AS(BellmanOperator(1, EllipticityBounds(1.0, 1.0), {}), ConfigError);
}

TEST_CASE("pucci_value oracle") {
    const EllipticityBounds b(1.0, 2.0);
    CHECK(pucci_value(b, SymMat::diag2(1.0, -1.0)) == doctest::Approx(1.0));
    CHECK(pucci_value(b, SymMat{2, 0.0, 0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(pucci_value(b, SymMat::diag2(-1.0, -1.0)) == doctest::Approx(-2.0));
}

TEST_CASE("finite-control Pucci equals the eigenvalue form on diagonal matrices") {
    const EllipticityBounds b(1.0, 2.0);
    const auto op = pucci_diagonal(2, b);
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const auto m = SymMat::diag2(rng.uniform(-3, 3), rng.uniform(-3, 3));
        CHECK(op.value(m, Point{}) == doctest::Approx(pucci_value(b, m)).epsilon(1e-12));
    }
}

TEST_CASE("positive 1-homogeneity and degenerate ellipticity") {
    const auto op = pucci_diagonal(2, EllipticityBounds(1.0, 2.0));
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        SymMat m{2, rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const Real s = rng.uniform(0, 4);
        CHECK(op.value(SymMat{2, s * m.xx, s * m.xy, s * m.yy}, Point{}) ==
              doctest::Approx(s * op.value(m, Point{})).epsilon(1e-12));
        // adding a PSD matrix cannot decrease the value
        const Real a = rng.uniform(0, 1), c = rng.uniform(0, 1);
        const Real bb = rng.uniform(-1, 1) * std::sqrt(a * c);
        SymMat mn{2, m.xx + a, m.xy + bb, m.yy + c};
        CHECK(op.value(mn, Point{}) >= op.value(m, Point{}) - 1e-12);
    }
}

TEST_CASE("convexity: midpoint inequality on random pairs") {
    const auto op = pucci_diagonal(2, EllipticityBounds(1.0, 2.0));
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        SymMat m1{2, rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        SymMat m2{2, rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        SymMat mid{2, 0.5 * (m1.xx + m2.xx), 0.5 * (m1.xy + m2.xy), 0.5 * (m1.yy + m2.yy)};
        CHECK(op.value(mid, Point{}) <=
              0.5 * (op.value(m1, Point{}) + op.value(m2, Point{})) + 1e-12);
    }
}

TEST_CASE("obstacle transform: trace with phi = 1 - x^2") {
    const auto g = small_grid_1d();
    const auto op = linear_operator(1, SymMat::diag1(1.0));
    const auto phi = grid::SpatialField::from_function(g, [](Point p) { return 1.0 - p[0] * p[0]; });
    const auto tr = obstacle_transform(op, phi);
    CHECK(tr.c0 == doctest::Approx(2.0));
    for (int i = 0; i < tr.source.nodes(); ++i)
        CHECK(tr.source.v[size_t(i)] == doctest::Approx(-2.0));
    // transformed operator stays the identity: F(m,x) = m
    Point x;
    x[0] = 0.25;
    CHECK(tr.transformed_operator.value(SymMat::diag1(3.0), x) == doctest::Approx(3.0));
    CHECK(tr.transformed_operator.value(SymMat::diag1(0.0), x) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("obstacle transform: constant phi has no uniformly negative source") {
    const auto g = small_grid_1d();
    const auto op = linear_operator(1, SymMat::diag1(1.0));
    const auto phi = grid::SpatialField::from_function(g, [](Point) { return 1.0; });
    CHECK_THROWS_AS(obstacle_transform(op, phi), NonUniformSourceError);
}

TEST_CASE("obstacle transform: 1D Pucci against direct evaluation") {
    const auto g = small_grid_1d();
    const auto op = pucci_diagonal(1, EllipticityBounds(1.0, 2.0));
    const auto phi = grid::SpatialField::from_function(g, [](Point p) { return 1.0 - p[0] * p[0]; });
    const auto tr = obstacle_transform(op, phi);
    // f = M+(-2) = -2 and F(m,x) = M+(m-2) + 2
    CHECK(tr.c0 == doctest::Approx(2.0));
    const EllipticityBounds b(1.0, 2.0);
    Point x;
    x[0] = -0.5;
    for (const Real m : {-3.0, -1.0, 0.0, 1.0, 2.5, 4.0}) {
        const Real expected = pucci_value(b, SymMat::diag1(m - 2.0)) + 2.0;
        CHECK(tr.transformed_operator.value(SymMat::diag1(m), x) == doctest::Approx(expected));
        // transformed operator vanishes on the zero matrix
        CHECK(tr.transformed_operator.value(SymMat::diag1(0.0), x) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("verify_ellipticity: trace operator has unit quotients") {
    const auto op = linear_operator(2, SymMat::identity(2));
    const auto rep = verify_ellipticity(op, 100);
    CHECK(rep.pass);
    CHECK(rep.min_trace_quotient == doctest::Approx(1.0));
    CHECK(rep.max_trace_quotient == doctest::Approx(1.0));
}

TEST_CASE("verify_ellipticity: pucci quotients stay within [lambda, Lambda]") {
    const auto op = pucci_diagonal(2, EllipticityBounds(1.0, 2.0));
    const auto rep = verify_ellipticity(op, 500);
    CHECK(rep.pass);
    CHECK(rep.min_trace_quotient >= 1.0 - 1e-9);
    CHECK(rep.max_trace_quotient <= 2.0 + 1e-9);
}

TEST_CASE("verify_ellipticity: an oversized control is reported, not thrown") {
    std::vector<Control> controls;
    controls.push_back({SymMat::identity(2), nullptr, nullptr});
    SymMat big = SymMat::diag2(3.0, 3.0);
    controls.push_back({big, nullptr, nullptr});
    const BellmanOperator op(2, EllipticityBounds(1.0, 2.0), std::move(controls));
    const auto rep = verify_ellipticity(op, 200);
    CHECK_FALSE(rep.pass);
    CHECK(rep.violations > 0);
    CHECK(rep.max_trace_quotient > 2.0);
}

TEST_SUITE_END();
