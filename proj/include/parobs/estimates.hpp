#pragma once

#include <map>
#include <string>
#include <vector>

#include "parobs/freeboundary.hpp"
#include "parobs/grid.hpp"

namespace parobs::estimates {

// One measured estimate: a reproducible table plus fitted constants.
struct EstimateReport {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Real>> rows;
    std::map<std::string, Real> fitted;
    std::map<std::string, Real> params;
    bool pass = true;
    std::vector<std::string> notes;
};

// Least-squares slope of log(y) against log(x); y must be positive.
Real loglog_slope(const std::vector<Real>& x, const std::vector<Real>& y);

// sup over Q_r and Q_r^- per radius with the growth-exponent fit. The
// headline slope is measured on the past cylinders Q_r^-; the full-cylinder
// slope is recorded alongside (see slope_full).
EstimateReport growth_and_nondegeneracy(const grid::GridFunction& u, const SpaceTimePoint& fb_point,
                                        const std::vector<Real>& radii, Real contact_tol);

// sup |dt u| and sup |D^2 u| over a region, one cell away from the free boundary.
EstimateReport regularity_norms(const grid::GridFunction& u, const grid::Cylinder& region,
                                const freeboundary::ContactSet& contact);

enum class EnvelopeQuantity { MinSecondDifference, MaxTimeDerivative };

struct EnvelopeFit {
    Real C_env = 0.0;
    Real eps_env = 0.0;
    bool degenerate = false; // all samples at the noise floor
};

// Fit |m(r)| <= C |log r|^(-eps); used for the semiconvexity and dt u moduli.
EnvelopeFit fit_log_envelope(const std::vector<Real>& radii, const std::vector<Real>& values,
                             Real floor_value);

EstimateReport log_envelope_fit(const grid::GridFunction& u, const SpaceTimePoint& fb_point,
                                EnvelopeQuantity quantity, const std::vector<Real>& radii,
                                const freeboundary::ContactSet& contact,
                                Real regularity_bound = 0.0);

// min over the region of d_sigma u - dt u - u (reported raw).
EstimateReport directional_monotonicity(const grid::GridFunction& u, const std::array<Real, 2>& sigma_x,
                                        Real sigma_t, const grid::Cylinder& region);

enum class DominanceMode { TimeOverGradient, SecondDerivativeOverGradient };

// Largest c >= 0 with quantity - c |grad u| >= -slack on the region (bisection).
EstimateReport gradient_dominance(const grid::GridFunction& u, const grid::Cylinder& region,
                                  DominanceMode mode, const freeboundary::ContactSet& contact,
                                  const std::array<Real, 2>& direction = {{1.0, 0.0}},
                                  Real slack = -1.0);

struct HarnackOptions {
    Real C0 = 0.0;
    Real p = 0.5;
    std::vector<Real> deltas{0.05, 0.1, 0.2};
    int spatial_positions = 5; // per axis, lattice over the admissible set
    int temporal_positions = 3;
};

EstimateReport harnack_ratios(const grid::GridFunction& u, const SpaceTimePoint& center, Real r,
                              const HarnackOptions& opts);

} // namespace parobs::estimates
