#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "parobs/expr.hpp"
#include "parobs/operators.hpp"
#include "parobs/solver.hpp"

namespace parobs::config {

struct OperatorConfig {
    std::string kind; // linear | pucci_diagonal | bellman
    Real lambda = 1.0;
    Real Lambda = 1.0;
    std::vector<std::vector<std::vector<Real>>> matrices; // row-major control matrices

    operators::BellmanOperator build(int dim) const;
};

struct ProblemConfig {
    std::string kind = "solve"; // solve | planted
    int dim = 1;
    OperatorConfig op;
    std::vector<std::array<Real, 2>> extent;
    std::array<Real, 2> t_range{{0.0, 1.0}};
    std::optional<expr::Expression> source;       // f(x), mutually exclusive with obstacle_phi
    std::optional<expr::Expression> obstacle_phi; // phi(x): f derived via the transform
    Real c0 = 0.0;
    std::optional<expr::Expression> boundary; // g(x, t)
    std::optional<expr::Expression> initial;  // u(x, t_begin)
    std::optional<expr::Expression> planted;  // planted field u(x, t)
};

struct AnalysisConfig {
    std::string type;
    nlohmann::json params;
};

struct Config {
    std::string name;
    ProblemConfig problem;
    Real h = 0.0;
    Real dt_factor = 1.0;
    Real dt_override = 0.0; // > 0: use directly instead of dt_factor * h^2
    std::vector<Real> epsilons;
    Real newton_tol = 1e-10;
    int max_newton = 50;
    int max_policy = 200;
    bool compare_direct = true;
    int snapshot_count = 33;
    Real kappa_c = 0.5;
    std::vector<AnalysisConfig> analyses;
    std::string output_dir;
    uint64_t seed = 1;
    std::string canonical; // normalized dump used for the manifest hash

    static Config from_json(const nlohmann::json& j);
    static Config from_file(const std::string& path);

    grid::Grid build_grid() const;
    solver::ProblemSpec build_problem(const grid::Grid& g) const;
    solver::PenaltySchedule build_schedule() const;
};

} // namespace parobs::config
