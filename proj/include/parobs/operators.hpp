#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "parobs/common.hpp"
#include "parobs/grid.hpp"

namespace parobs::operators {

struct EllipticityBounds {
    Real lambda = 1.0;
    Real Lambda = 1.0;
    EllipticityBounds() = default;
    EllipticityBounds(Real lam, Real Lam);
};

// Symmetric n x n matrix, n = 1 or 2.
struct SymMat {
    int dim = 1;
    Real xx = 0.0, xy = 0.0, yy = 0.0;

    static SymMat diag1(Real a) { return {1, a, 0.0, 0.0}; }
    static SymMat diag2(Real a, Real b) { return {2, a, 0.0, b}; }
    static SymMat identity(int dim) { return dim == 1 ? diag1(1.0) : diag2(1.0, 1.0); }

    Real contract(const SymMat& m) const {
        Real s = xx * m.xx;
        if (dim == 2) s += yy * m.yy + 2.0 * xy * m.xy;
        return s;
    }
    Real trace() const { return dim == 1 ? xx : xx + yy; }
    std::array<Real, 2> eigenvalues() const;
    Real spectral_norm() const;
    bool is_diagonal() const { return dim == 1 || xy == 0.0; }
    Real diag(int axis) const { return axis == 0 ? xx : yy; }
};

// One linear control A^alpha(x) : M + c^alpha(x). The coefficient is either a
// constant matrix or an x-dependent callable; the affine offset appears only
// through the obstacle transform and satisfies max_alpha c^alpha(x) = 0.
struct Control {
    SymMat A;
    std::function<SymMat(const Point&)> coeff;
    std::function<Real(const Point&)> offset;

    SymMat coefficient(const Point& p) const { return coeff ? coeff(p) : A; }
    Real offset_at(const Point& p) const { return offset ? offset(p) : 0.0; }
};

// F(M,x) = max_alpha [ A^alpha(x) : M + c^alpha(x) ].
class BellmanOperator {
public:
    BellmanOperator(int dim, EllipticityBounds bounds, std::vector<Control> controls);

    int dim() const { return dim_; }
    const EllipticityBounds& bounds() const { return bounds_; }
    const std::vector<Control>& controls() const { return controls_; }
    bool x_dependent() const { return x_dependent_; }
    // True when every control is a constant diagonal matrix plus offset;
    // required by the monotone finite-difference solver.
    bool solver_compatible() const { return all_constant_diagonal_; }

    struct Evaluation {
        Real value;
        int active_control;
    };
    Evaluation evaluate(const SymMat& m, const Point& x) const;
    Real value(const SymMat& m, const Point& x) const { return evaluate(m, x).value; }

private:
    int dim_;
    EllipticityBounds bounds_;
    std::vector<Control> controls_;
    bool x_dependent_ = false;
    bool all_constant_diagonal_ = true;
};

BellmanOperator linear_operator(int dim, const SymMat& a);
BellmanOperator linear_operator(int dim, const SymMat& a, EllipticityBounds bounds);
// Finite-control Pucci approximation over diagonal matrices diag(a_1..a_n),
// a_i in {lambda, Lambda}: equals M+ exactly on diagonal Hessians.
BellmanOperator pucci_diagonal(int dim, EllipticityBounds bounds);

// Exact eigenvalue-based M+(M); the oracle for the finite-control form.
Real pucci_value(const EllipticityBounds& bounds, const SymMat& m);

struct ObstacleTransformResult {
    BellmanOperator transformed_operator;
    grid::SpatialField source;   // f(x) = Ftilde(D^2 phi(x)) <= -c0
    grid::SpatialField obstacle; // phi
    Real c0 = 0.0;
};

// F(M,x) := Ftilde(M + D^2 phi(x)) - Ftilde(D^2 phi(x)); solving the
// zero-obstacle problem for u reproduces v = u + phi over the phi-obstacle.
ObstacleTransformResult obstacle_transform(const BellmanOperator& ftilde, const grid::SpatialField& phi);

struct EllipticityReport {
    int samples = 0;
    Real min_trace_quotient = 0.0;
    Real max_trace_quotient = 0.0;
    // Recorded but not judged: the spectral-norm convention fails for Pucci.
    Real min_spectral_quotient = 0.0;
    Real max_spectral_quotient = 0.0;
    int violations = 0;
    bool pass = false;
};

EllipticityReport verify_ellipticity(const BellmanOperator& op, int sample_count, uint64_t seed = 7);

} // namespace parobs::operators
