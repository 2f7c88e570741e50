#include "parobs/config.hpp"

#include <fstream>
#include <map>
#include <set>

namespace parobs::config {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw ConfigError("config error at " + where + ": " + what);
}

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed,
                  const std::set<std::string>& required) {
    if (!j.is_object()) bad(where, "expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) bad(where, "unknown key '" + key + "'");
    for (const auto& key : required)
        if (!j.contains(key)) bad(where, "missing key '" + key + "'");
}

Real get_positive(const json& j, const std::string& where, const std::string& key) {
    const Real v = j.at(key).get<Real>();
    if (!(v > 0)) bad(where + "/" + key, "must be positive");
    return v;
}

expr::Expression parse_expr(const json& j, const std::string& where) {
    if (!j.is_string()) bad(where, "expected an expression string");
    try {
        return expr::Expression::parse(j.get<std::string>());
    } catch (const expr::ExprError& e) {
        bad(where, std::string(e.what()) + " (at offset " + std::to_string(e.position) + ")");
    }
}

OperatorConfig parse_operator(const json& j, const std::string& where) {
    OperatorConfig oc;
    require_keys(j, where, {"kind", "lambda", "Lambda", "matrix", "controls"}, {"kind"});
    oc.kind = j.at("kind").get<std::string>();
    if (oc.kind == "linear") {
        require_keys(j, where, {"kind", "matrix"}, {"kind", "matrix"});
        oc.matrices.push_back(j.at("matrix").get<std::vector<std::vector<Real>>>());
    } else if (oc.kind == "pucci_diagonal") {
        require_keys(j, where, {"kind", "lambda", "Lambda"}, {"kind", "lambda", "Lambda"});
        oc.lambda = get_positive(j, where, "lambda");
        oc.Lambda = get_positive(j, where, "Lambda");
    } else if (oc.kind == "bellman") {
        require_keys(j, where, {"kind", "lambda", "Lambda", "controls"},
                     {"kind", "lambda", "Lambda", "controls"});
        oc.lambda = get_positive(j, where, "lambda");
        oc.Lambda = get_positive(j, where, "Lambda");
        for (const auto& m : j.at("controls"))
            oc.matrices.push_back(m.get<std::vector<std::vector<Real>>>());
        if (oc.matrices.empty()) bad(where + "/controls", "control list must be nonempty");
    } else {
        bad(where + "/kind", "must be linear, pucci_diagonal or bellman");
    }
    return oc;
}

operators::SymMat to_symmat(const std::vector<std::vector<Real>>& m, int dim,
                            const std::string& where) {
    if (int(m.size()) != dim) bad(where, "matrix rank must match dim");
    operators::SymMat s;
    s.dim = dim;
    for (const auto& row : m)
        if (int(row.size()) != dim) bad(where, "matrix must be square");
    s.xx = m[0][0];
    if (dim == 2) {
        s.yy = m[1][1];
        s.xy = m[0][1];
        if (std::abs(m[0][1] - m[1][0]) > 1e-12) bad(where, "matrix must be symmetric");
    }
    return s;
}

} // namespace

operators::BellmanOperator OperatorConfig::build(int dim) const {
    if (kind == "linear") {
        return operators::linear_operator(dim, to_symmat(matrices[0], dim, "operator/matrix"));
    }
    if (kind == "pucci_diagonal") {
        return operators::pucci_diagonal(dim, operators::EllipticityBounds(lambda, Lambda));
    }
    std::vector<operators::Control> controls;
    for (const auto& m : matrices)
        controls.push_back({to_symmat(m, dim, "operator/controls"), nullptr, nullptr});
    return operators::BellmanOperator(dim, operators::EllipticityBounds(lambda, Lambda),
                                      std::move(controls));
}

Config Config::from_json(const json& j) {
    require_keys(j, "/",
                 {"name", "problem", "discretization", "penalty", "solver", "contact", "analyses",
                  "output_dir", "seed"},
                 {"name", "problem", "discretization", "analyses", "output_dir"});
    Config cfg;
    cfg.name = j.at("name").get<std::string>();
    cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();

    const json& p = j.at("problem");
    require_keys(p, "/problem",
                 {"kind", "dim", "operator", "domain", "source", "obstacle_phi", "c0", "boundary",
                  "initial", "planted"},
                 {"dim", "operator", "domain"});
    ProblemConfig& pc = cfg.problem;
    if (p.contains("kind")) pc.kind = p.at("kind").get<std::string>();
    if (pc.kind != "solve" && pc.kind != "planted") bad("/problem/kind", "must be solve or planted");
    pc.dim = p.at("dim").get<int>();
    if (pc.dim != 1 && pc.dim != 2) bad("/problem/dim", "must be 1 or 2");
    pc.op = parse_operator(p.at("operator"), "/problem/operator");

    const json& dom = p.at("domain");
    require_keys(dom, "/problem/domain", {"extent", "t_range"}, {"extent", "t_range"});
    const auto ext = dom.at("extent").get<std::vector<std::array<Real, 2>>>();
    if (int(ext.size()) != pc.dim) bad("/problem/domain/extent", "needs one interval per axis");
    for (const auto& iv : ext)
        if (!(iv[1] > iv[0])) bad("/problem/domain/extent", "intervals must be increasing");
    pc.extent = ext;
    pc.t_range = dom.at("t_range").get<std::array<Real, 2>>();
    if (!(pc.t_range[1] > pc.t_range[0])) bad("/problem/domain/t_range", "must be increasing");

    if (pc.kind == "planted") {
        if (!p.contains("planted")) bad("/problem", "planted problems need a 'planted' expression");
        pc.planted = parse_expr(p.at("planted"), "/problem/planted");
    } else {
        if (p.contains("source") == p.contains("obstacle_phi"))
            bad("/problem", "solve problems need exactly one of 'source' and 'obstacle_phi'");
        if (p.contains("source")) pc.source = parse_expr(p.at("source"), "/problem/source");
        if (p.contains("obstacle_phi"))
            pc.obstacle_phi = parse_expr(p.at("obstacle_phi"), "/problem/obstacle_phi");
        if (!p.contains("boundary") || !p.contains("initial"))
            bad("/problem", "solve problems need 'boundary' and 'initial'");
        pc.boundary = parse_expr(p.at("boundary"), "/problem/boundary");
        pc.initial = parse_expr(p.at("initial"), "/problem/initial");
        if (p.contains("c0"))
            pc.c0 = get_positive(p, "/problem", "c0");
        else if (p.contains("source"))
            bad("/problem", "solve problems with an explicit source need 'c0'");
    }

    const json& disc = j.at("discretization");
    require_keys(disc, "/discretization", {"h", "dt_factor", "dt"}, {"h"});
    cfg.h = get_positive(disc, "/discretization", "h");
    if (disc.contains("dt_factor")) cfg.dt_factor = get_positive(disc, "/discretization", "dt_factor");
    if (disc.contains("dt")) cfg.dt_override = get_positive(disc, "/discretization", "dt");

    if (j.contains("penalty")) {
        const json& pen = j.at("penalty");
        require_keys(pen, "/penalty", {"epsilons", "newton_tol", "max_newton", "max_policy"},
                     {"epsilons"});
        cfg.epsilons = pen.at("epsilons").get<std::vector<Real>>();
        if (pen.contains("newton_tol")) cfg.newton_tol = get_positive(pen, "/penalty", "newton_tol");
        if (pen.contains("max_newton")) cfg.max_newton = pen.at("max_newton").get<int>();
        if (pen.contains("max_policy")) cfg.max_policy = pen.at("max_policy").get<int>();
    } else if (pc.kind == "solve") {
        bad("/", "solve problems need a 'penalty' section");
    }

    if (j.contains("solver")) {
        const json& s = j.at("solver");
        require_keys(s, "/solver", {"compare_direct", "snapshot_count"}, {});
        if (s.contains("compare_direct")) cfg.compare_direct = s.at("compare_direct").get<bool>();
        if (s.contains("snapshot_count")) cfg.snapshot_count = s.at("snapshot_count").get<int>();
    }
    if (j.contains("contact")) {
        const json& c = j.at("contact");
        require_keys(c, "/contact", {"kappa_c"}, {"kappa_c"});
        cfg.kappa_c = get_positive(c, "/contact", "kappa_c");
    }

    static const std::map<std::string, std::set<std::string>> analysis_keys = {
        {"exact_error", {"type", "expression", "tol", "min_value_floor"}},
        {"growth", {"type", "center", "radii", "slope_range", "C_range", "c_range", "c_min"}},
        {"density", {"type", "center", "radii", "range", "check_smallest", "max_smallest"}},
        {"blowup",
         {"type", "center", "r0", "rho", "K", "expect", "a_range", "e_target", "e_tol", "A_target",
          "A_tol", "dump_fields"}},
        {"time_graph", {"type", "lipschitz_range", "linear_check"}},
        {"space_graph", {"type", "direction", "window", "center", "normal_target", "normal_tol"}},
        {"gradient_dominance", {"type", "mode", "center", "r", "variant", "direction", "c_range"}},
        {"envelope", {"type", "quantity", "center", "radii", "regularity_bound"}},
        {"regularity", {"type", "center", "r", "variant", "hess_range", "dt_range"}},
        {"directional_monotonicity", {"type", "sigma", "sigma_t", "center", "r", "variant", "min_range"}},
        {"harnack_suite",
         {"type", "seeds", "center", "r", "C0", "p", "deltas", "refine", "stability_tol"}},
        {"cone_test", {"type", "x0", "e0", "theta_deg", "expect", "exclude_radius"}},
        {"verify_ellipticity", {"type", "samples"}},
    };
    for (const auto& a : j.at("analyses")) {
        if (!a.is_object() || !a.contains("type")) bad("/analyses", "each analysis needs a 'type'");
        AnalysisConfig ac;
        ac.type = a.at("type").get<std::string>();
        const auto it = analysis_keys.find(ac.type);
        if (it == analysis_keys.end()) bad("/analyses", "unknown analysis type '" + ac.type + "'");
        require_keys(a, "/analyses/" + ac.type, it->second, {"type"});
        if (a.contains("linear_check"))
            require_keys(a.at("linear_check"), "/analyses/" + ac.type + "/linear_check",
                         {"x_range", "slope", "intercept", "tol"}, {"x_range", "slope", "tol"});
        ac.params = a;
        cfg.analyses.push_back(std::move(ac));
    }

    cfg.canonical = j.dump();
    return cfg;
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        // recover the line number from the byte offset
        std::ifstream again(path);
        std::string text((std::istreambuf_iterator<char>(again)), std::istreambuf_iterator<char>());
        size_t line = 1;
        for (size_t i = 0; i < std::min(text.size(), size_t(e.byte)); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError("config parse error in " + path + " at line " + std::to_string(line) +
                          ": " + e.what());
    }
    return from_json(j);
}

grid::Grid Config::build_grid() const {
    std::array<Real, 2> lo{{0, 0}}, hi{{0, 0}};
    for (size_t d = 0; d < problem.extent.size(); ++d) {
        lo[d] = problem.extent[d][0];
        hi[d] = problem.extent[d][1];
    }
    const Real dt = dt_override > 0 ? dt_override : dt_factor * h * h;
    // snap dt so that (t_end - t_begin) is an integer number of steps
    const Real span = problem.t_range[1] - problem.t_range[0];
    const long steps = std::max(1l, std::lround(span / dt));
    return grid::Grid::make(problem.dim, lo, hi, h, problem.t_range[0], problem.t_range[1],
                            span / Real(steps));
}

solver::ProblemSpec Config::build_problem(const grid::Grid& g) const {
    const ProblemConfig& pc = problem;
    if (pc.kind != "solve") throw ConfigError("planted problems have no solver specification");
    auto op = pc.op.build(pc.dim);

    grid::SpatialField source;
    Real c0 = pc.c0;
    if (pc.obstacle_phi) {
        const auto phi = grid::SpatialField::from_function(
            g, [&](Point p) { return pc.obstacle_phi->eval(p, 0.0); });
        auto tr = operators::obstacle_transform(op, phi);
        op = std::move(tr.transformed_operator);
        source = std::move(tr.source);
        c0 = tr.c0;
    } else {
        source = grid::SpatialField::from_function(g, [&](Point p) { return pc.source->eval(p, 0.0); });
    }
    const auto boundary_expr = *pc.boundary;
    const auto initial_expr = *pc.initial;
    return solver::ProblemSpec::make(
        std::move(op), g, std::move(source), c0,
        [boundary_expr](Point p, Real t) { return boundary_expr.eval(p, t); },
        [initial_expr](Point p) { return initial_expr.eval(p, 0.0); });
}

solver::PenaltySchedule Config::build_schedule() const {
    solver::PenaltySchedule sched;
    sched.epsilons = epsilons;
    sched.params.newton_tol = newton_tol;
    sched.params.max_newton = max_newton;
    sched.params.max_policy = max_policy;
    return sched;
}

} // namespace parobs::config
