#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "parobs/grid.hpp"
#include "parobs/operators.hpp"

namespace parobs::solver {

// Zero-obstacle (u-form) problem: dt_u - F(D^2 u, x) = f(x) chi_{u>0},
// u >= phi with phi identically 0 after the obstacle transform.
struct ProblemSpec {
    operators::BellmanOperator op;
    grid::Grid domain;
    grid::SpatialField source; // f <= -c0 < 0
    Real c0 = 0.0;
    std::function<Real(Point, Real)> boundary;
    std::function<Real(Point)> initial;
    std::optional<grid::SpatialField> obstacle; // empty means phi = 0

    static ProblemSpec make(operators::BellmanOperator op, grid::Grid domain,
                            grid::SpatialField source, Real c0,
                            std::function<Real(Point, Real)> boundary,
                            std::function<Real(Point)> initial,
                            std::optional<grid::SpatialField> obstacle = std::nullopt);

    Real phi_at(int ix, int iy) const {
        return obstacle ? obstacle->at(ix, iy) : 0.0;
    }
};

struct SolverParams {
    Real newton_tol = 1e-10;
    int max_newton = 50;
    int max_policy = 200;
};

struct PenaltySchedule {
    std::vector<Real> epsilons; // strictly decreasing, all >= kappa_eps * h^2
    SolverParams params;
    Real kappa_eps = 1.0;

    void validate(const grid::Grid& g) const;
};

struct SolveReport {
    Real epsilon = 0.0; // 0 for the direct oracle
    int steps = 0;
    long total_policy_iters = 0;
    long total_newton_iters = 0;
    int max_policy_iters = 0;
    int max_newton_iters = 0;
    Real final_residual = 0.0;            // max over steps of the converged residual
    Real effective_tol = 0.0;             // newton_tol or the roundoff floor of the residual
    Real max_h_eps = 0.0;                 // max over nodes/steps of beta_eps(w - phi)
    Real dt_monotonicity_violation = 0.0; // most negative discrete dt_u observed
    Real wall_seconds = 0.0;
};

// One penalized solve dt_w - F(D^2 w, x) - f = beta_eps(w - phi), w = g on the
// parabolic boundary. warm_start, when given, seeds the Newton iterate per level.
std::pair<grid::GridFunction, SolveReport>
solve_penalized(const ProblemSpec& spec, Real epsilon, const SolverParams& params,
                const grid::GridFunction* warm_start = nullptr);

// Discrete complementarity oracle: min(dt-Euler PDE residual, w - phi) = 0
// per time step, solved by policy iteration with projection as an extra control.
grid::GridFunction solve_obstacle_direct(const ProblemSpec& spec, const SolverParams& params,
                                         SolveReport* report = nullptr);

struct ContinuationResult {
    grid::GridFunction u; // last iterate minus phi, clipped at the noise floor
    std::vector<SolveReport> reports;
    std::vector<Real> oracle_gaps; // per-eps sup distance to the direct oracle
    std::optional<grid::GridFunction> direct;
};

ContinuationResult continuation_solve(const ProblemSpec& spec, const PenaltySchedule& schedule,
                                      bool record_oracle_gap = true);

} // namespace parobs::solver
