#pragma once

#include <string>
#include <vector>

#include "parobs/grid.hpp"
#include "parobs/operators.hpp"

namespace parobs::blowup {

// Rescaled family u_r(x,t) = u(x0+rx, t0+r^2 t)/r^2 on a shared reference cylinder.
struct BlowupSequence {
    SpaceTimePoint center;
    std::vector<Real> radii;
    std::vector<grid::GridFunction> fields;
    Real source_h = 0.0;
    bool resolution_warning = false; // smallest radius below 16h
};

grid::Grid default_reference_grid(int dim);

BlowupSequence make_sequence(const grid::GridFunction& u, const SpaceTimePoint& center, Real r0,
                             Real rho, int K, Real contact_tol,
                             const grid::Grid* ref_grid = nullptr);

struct HalfParabolaFit {
    Real a = 0.0;
    std::array<Real, 2> e{{1.0, 0.0}};
    Real residual = 0.0; // relative sup misfit on the t=0 slice
    Real time_oscillation = 0.0;
};

struct QuadraticFit {
    operators::SymMat A;
    Real residual = 0.0;
    Real time_oscillation = 0.0;
    Real negativity = 0.0; // magnitude of the clipped negative eigenvalue
};

// Fits against a(e.x)_+^2 on the t=0 slice of the reference cylinder; the
// direction is searched on a uniform grid then refined by golden section.
HalfParabolaFit fit_half_parabola(const grid::GridFunction& v);
QuadraticFit fit_quadratic(const grid::GridFunction& v, Real fit_tol = 1e-3);

// sup over spatial nodes of the oscillation of v in t.
Real time_independence_check(const grid::GridFunction& v);

enum class Verdict { Regular, Singular, Undetermined };

struct ClassifyThresholds {
    Real class_tol = 0.05;
    Real regular_density_lo = 0.45;
    Real regular_density_hi = 0.55;
    Real singular_density_hi = 0.1;
};

struct Classification {
    Verdict verdict = Verdict::Undetermined;
    std::vector<Real> radii;
    std::vector<Real> half_residuals;
    std::vector<Real> quad_residuals;
    std::vector<Real> densities;
    std::vector<Real> time_oscillations;
    HalfParabolaFit half_fit; // at the smallest radius
    QuadraticFit quad_fit;
    std::string note;
};

Classification classify(const BlowupSequence& seq, const std::vector<Real>& densities,
                        const ClassifyThresholds& thresholds = {});

const char* verdict_name(Verdict v);

} // namespace parobs::blowup
