#include "parobs/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "parobs/blowup.hpp"
#include "parobs/estimates.hpp"
#include "parobs/freeboundary.hpp"
#include "parobs/io.hpp"
#include "parobs/presets.hpp"

namespace parobs::runner {

namespace fs = std::filesystem;
using config::Config;
using estimates::EstimateReport;
using grid::GridFunction;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

SpaceTimePoint parse_center(const json& arr, int dim) {
    const auto v = arr.get<std::vector<Real>>();
    if (int(v.size()) != dim + 1) throw ConfigError("center needs dim+1 entries (x..., t)");
    SpaceTimePoint p;
    p.x[0] = v[0];
    if (dim == 2) p.x[1] = v[1];
    p.t = v.back();
    return p;
}

grid::CylVariant parse_variant(const std::string& name) {
    if (name == "Q") return grid::CylVariant::Q;
    if (name == "Qplus") return grid::CylVariant::Qplus;
    if (name == "Qminus") return grid::CylVariant::Qminus;
    if (name == "Dplus") return grid::CylVariant::Dplus;
    if (name == "Dminus") return grid::CylVariant::Dminus;
    if (name == "Qtilde") return grid::CylVariant::Qtilde;
    throw ConfigError("unknown cylinder variant '" + name + "'");
}

bool in_range(Real v, const std::array<Real, 2>& range) { return v >= range[0] && v <= range[1]; }

struct Stage {
    std::string name;
    double seconds = 0.0;
};

// Shared state the analysis handlers read from. Derivative- and value-type
// measurements run on the penalized continuation limit; contact-set geometry
// runs on the complementarity oracle, whose zero set is exact (the penalized
// iterate carries an exp(-u/eps) tail of height ~eps inside the contact set,
// which displaces any threshold by several cells).
struct RunState {
    const Config& cfg;
    fs::path dir;
    GridFunction u_value;
    GridFunction u_geom;
    std::optional<freeboundary::ContactSet> contact_value;
    std::optional<freeboundary::ContactSet> contact_geom;
    std::optional<freeboundary::FreeBoundaryCloud> cloud;
    std::vector<solver::SolveReport> solve_reports;
    std::vector<Real> oracle_gaps;
    Real source_max_abs = 1.0;

    const freeboundary::ContactSet& value_contact() const {
        if (!contact_value) throw Error("analysis needs a contact set");
        return *contact_value;
    }
    const freeboundary::ContactSet& geom_contact() const {
        if (!contact_geom) throw Error("analysis needs a contact set");
        return *contact_geom;
    }
    const freeboundary::FreeBoundaryCloud& need_cloud() const {
        if (!cloud) throw Error("analysis needs a free boundary cloud");
        return *cloud;
    }
};

EstimateReport analyze_exact_error(RunState& st, const json& p) {
    const auto e = expr::Expression::parse(p.at("expression").get<std::string>());
    const grid::Grid& g = st.u_value.grid;
    Real err = 0.0, min_u = std::numeric_limits<Real>::infinity();
    for (int m = 0; m < g.nt; ++m) {
        const Real t = g.t(m);
        for (int iy = 0; iy < g.nx[1]; ++iy)
            for (int ix = 0; ix < g.nx[0]; ++ix) {
                const Real v = st.u_value.at(ix, iy, m);
                err = std::max(err, std::abs(v - e.eval(g.point(ix, iy), t)));
                min_u = std::min(min_u, v);
            }
    }
    EstimateReport rep;
    rep.name = "exact_error";
    rep.columns = {"sup_error", "min_value"};
    rep.rows.push_back({err, min_u});
    rep.fitted["sup_error"] = err;
    rep.fitted["min_value"] = min_u;
    rep.params["h"] = g.h;
    rep.pass = err <= p.at("tol").get<Real>();
    if (p.contains("min_value_floor")) rep.pass = rep.pass && min_u >= p.at("min_value_floor").get<Real>();
    return rep;
}

EstimateReport analyze_growth(RunState& st, const json& p) {
    const auto center = parse_center(p.at("center"), st.u_geom.grid.dim);
    const auto radii = p.at("radii").get<std::vector<Real>>();
    auto rep =
        estimates::growth_and_nondegeneracy(st.u_geom, center, radii, st.geom_contact().tol_contact);
    if (p.contains("slope_range"))
        rep.pass = rep.pass && in_range(rep.fitted["slope"], p.at("slope_range").get<std::array<Real, 2>>());
    if (p.contains("C_range"))
        rep.pass = rep.pass && in_range(rep.fitted["C"], p.at("C_range").get<std::array<Real, 2>>());
    if (p.contains("c_range"))
        rep.pass = rep.pass && in_range(rep.fitted["c"], p.at("c_range").get<std::array<Real, 2>>());
    if (p.contains("c_min")) rep.pass = rep.pass && rep.fitted["c"] >= p.at("c_min").get<Real>();
    return rep;
}

EstimateReport analyze_density(RunState& st, const json& p) {
    const auto center = parse_center(p.at("center"), st.u_geom.grid.dim);
    auto radii = p.at("radii").get<std::vector<Real>>();
    std::sort(radii.begin(), radii.end());
    EstimateReport rep;
    rep.name = "density";
    rep.columns = {"r", "density"};
    std::vector<Real> densities;
    for (const Real r : radii) {
        const Real d = freeboundary::density(st.u_geom, st.geom_contact(), center, r);
        densities.push_back(d);
        rep.rows.push_back({r, d});
    }
    rep.params["h"] = st.u_geom.grid.h;
    rep.fitted["density_smallest"] = densities.front();
    rep.fitted["density_largest"] = densities.back();
    if (p.contains("range")) {
        const auto range = p.at("range").get<std::array<Real, 2>>();
        const int k = p.contains("check_smallest") ? p.at("check_smallest").get<int>() : 1;
        for (int i = 0; i < std::min<int>(k, int(densities.size())); ++i)
            rep.pass = rep.pass && in_range(densities[size_t(i)], range);
    }
    if (p.contains("max_smallest"))
        rep.pass = rep.pass && densities.front() <= p.at("max_smallest").get<Real>();
    return rep;
}

EstimateReport analyze_blowup(RunState& st, const json& p) {
    const auto center = parse_center(p.at("center"), st.u_geom.grid.dim);
    const Real r0 = p.at("r0").get<Real>();
    const Real rho = p.at("rho").get<Real>();
    const int K = p.at("K").get<int>();
    const auto& contact = st.geom_contact();

    const auto seq = blowup::make_sequence(st.u_geom, center, r0, rho, K, contact.tol_contact);
    std::vector<Real> densities;
    for (const Real r : seq.radii)
        densities.push_back(freeboundary::density(st.u_geom, contact, center, r));
    const auto cl = blowup::classify(seq, densities);

    EstimateReport rep;
    rep.name = "blowup";
    rep.columns = {"r", "half_residual", "quad_residual", "density", "time_oscillation"};
    for (size_t k = 0; k < seq.radii.size(); ++k)
        rep.rows.push_back({seq.radii[k], cl.half_residuals[k], cl.quad_residuals[k], densities[k],
                            cl.time_oscillations[k]});
    rep.fitted["verdict_regular"] = cl.verdict == blowup::Verdict::Regular ? 1.0 : 0.0;
    rep.fitted["verdict_singular"] = cl.verdict == blowup::Verdict::Singular ? 1.0 : 0.0;
    rep.fitted["a"] = cl.half_fit.a;
    rep.fitted["curvature"] = 2.0 * cl.half_fit.a; // second-derivative convention w'' = 2a
    rep.fitted["e_x"] = cl.half_fit.e[0];
    rep.fitted["e_y"] = cl.half_fit.e[1];
    rep.fitted["A_xx"] = cl.quad_fit.A.xx;
    rep.fitted["A_xy"] = cl.quad_fit.A.xy;
    rep.fitted["A_yy"] = cl.quad_fit.A.yy;
    rep.params["r0"] = r0;
    rep.params["rho"] = rho;
    rep.params["K"] = Real(K);
    rep.params["resolution_warning"] = seq.resolution_warning ? 1.0 : 0.0;
    if (!cl.note.empty()) rep.notes.push_back(cl.note);
    rep.notes.push_back(std::string("verdict: ") + blowup::verdict_name(cl.verdict));

    if (p.contains("expect")) {
        const std::string want = p.at("expect").get<std::string>();
        rep.pass = rep.pass && want == blowup::verdict_name(cl.verdict);
    }
    if (p.contains("a_range"))
        rep.pass = rep.pass && in_range(cl.half_fit.a, p.at("a_range").get<std::array<Real, 2>>());
    if (p.contains("e_target")) {
        const auto et = p.at("e_target").get<std::vector<Real>>();
        const Real tol = p.contains("e_tol") ? p.at("e_tol").get<Real>() : 0.02;
        Real dev = std::abs(cl.half_fit.e[0] - et[0]);
        if (et.size() > 1) dev = std::max(dev, std::abs(cl.half_fit.e[1] - et[1]));
        rep.pass = rep.pass && dev <= tol;
    }
    if (p.contains("dump_fields") && p.at("dump_fields").get<bool>())
        for (size_t k = 0; k < seq.fields.size(); ++k)
            io::write_grid_function(st.dir, st.cfg.name + "_blowup_r" + std::to_string(k),
                                    seq.fields[k], 1);
    if (p.contains("A_target")) {
        const auto at = p.at("A_target").get<std::vector<std::vector<Real>>>();
        const Real tol = p.contains("A_tol") ? p.at("A_tol").get<Real>() : 0.02;
        Real dev = std::abs(cl.quad_fit.A.xx - at[0][0]);
        if (at.size() > 1) {
            dev = std::max(dev, std::abs(cl.quad_fit.A.xy - at[0][1]));
            dev = std::max(dev, std::abs(cl.quad_fit.A.yy - at[1][1]));
        }
        rep.pass = rep.pass && dev <= tol;
    }
    return rep;
}

EstimateReport analyze_time_graph(RunState& st, const json& p) {
    const auto graph = freeboundary::time_graph(st.u_geom, st.geom_contact());
    const grid::Grid& g = st.u_geom.grid;

    EstimateReport rep;
    rep.name = "time_graph";
    rep.columns = {"x", "tau", "flagged"};
    for (int ix = 0; ix < g.nx[0]; ++ix) {
        const Real tau = graph.tau[size_t(ix)];
        rep.rows.push_back({g.x(0, ix), std::isfinite(tau) ? tau : (tau > 0 ? 1e30 : -1e30),
                            Real(graph.flagged[size_t(ix)])});
    }
    rep.fitted["lipschitz"] = graph.lipschitz_estimate;
    rep.fitted["valid_pairs"] = Real(graph.valid_pairs);
    rep.params["h"] = g.h;
    if (p.contains("lipschitz_range"))
        rep.pass = rep.pass &&
                   in_range(graph.lipschitz_estimate, p.at("lipschitz_range").get<std::array<Real, 2>>());
    if (p.contains("linear_check")) {
        const json& lc = p.at("linear_check");
        const auto xr = lc.at("x_range").get<std::array<Real, 2>>();
        const Real slope = lc.at("slope").get<Real>();
        const Real intercept = lc.contains("intercept") ? lc.at("intercept").get<Real>() : 0.0;
        const Real tol = lc.at("tol").get<Real>();
        Real worst = 0.0;
        for (int ix = 0; ix < g.nx[0]; ++ix) {
            const Real x = g.x(0, ix);
            if (x < xr[0] || x > xr[1] || graph.flagged[size_t(ix)]) continue;
            worst = std::max(worst, std::abs(graph.tau[size_t(ix)] - (slope * x + intercept)));
        }
        rep.fitted["linear_dev"] = worst;
        rep.pass = rep.pass && worst <= tol;
    }
    return rep;
}

EstimateReport analyze_space_graph(RunState& st, const json& p) {
    const auto e = p.at("direction").get<std::array<Real, 2>>();
    const Real window = p.at("window").get<Real>();
    Point center;
    if (p.contains("center")) {
        const auto c = p.at("center").get<std::vector<Real>>();
        center[0] = c[0];
        if (c.size() > 1) center[1] = c[1];
    }
    const auto graph = freeboundary::space_graph(st.need_cloud(), e, window, center);
    EstimateReport rep;
    rep.name = "space_graph";
    rep.columns = {"x_prime", "t", "g"};
    for (const auto& s : graph.samples) rep.rows.push_back({s[0], s[1], s[2]});
    rep.fitted["lipschitz"] = graph.lipschitz_estimate;
    rep.fitted["normal_x"] = graph.normal_estimate[0];
    rep.fitted["normal_y"] = graph.normal_estimate[1];
    for (size_t i = 0; i < graph.c1_modulus_table.size(); ++i) {
        rep.fitted["modulus_w" + std::to_string(i)] = graph.c1_modulus_table[i][0];
        rep.fitted["modulus_osc" + std::to_string(i)] = graph.c1_modulus_table[i][1];
    }
    rep.params["window"] = window;
    if (p.contains("normal_target")) {
        const auto nt = p.at("normal_target").get<std::array<Real, 2>>();
        const Real tol = p.contains("normal_tol") ? p.at("normal_tol").get<Real>() : 0.02;
        const Real dev = std::max(std::abs(graph.normal_estimate[0] - nt[0]),
                                  std::abs(graph.normal_estimate[1] - nt[1]));
        rep.fitted["normal_dev"] = dev;
        rep.pass = rep.pass && dev <= tol;
    }
    return rep;
}

EstimateReport analyze_gradient_dominance(RunState& st, const json& p) {
    const auto center = parse_center(p.at("center"), st.u_value.grid.dim);
    const Real r = p.at("r").get<Real>();
    const auto mode = p.at("mode").get<std::string>() == "time_over_gradient"
                          ? estimates::DominanceMode::TimeOverGradient
                          : estimates::DominanceMode::SecondDerivativeOverGradient;
    std::array<Real, 2> dir{1.0, 0.0};
    if (p.contains("direction")) dir = p.at("direction").get<std::array<Real, 2>>();
    const auto variant = p.contains("variant") ? parse_variant(p.at("variant").get<std::string>())
                                               : grid::CylVariant::Q;
    auto rep = estimates::gradient_dominance(st.u_value, grid::Cylinder(center, r, variant), mode,
                                             st.value_contact(), dir);
    if (p.contains("c_range"))
        rep.pass = rep.pass && in_range(rep.fitted["c"], p.at("c_range").get<std::array<Real, 2>>());
    return rep;
}

EstimateReport analyze_envelope(RunState& st, const json& p) {
    const auto center = parse_center(p.at("center"), st.u_value.grid.dim);
    const auto radii = p.at("radii").get<std::vector<Real>>();
    const auto quantity = p.at("quantity").get<std::string>() == "max_dt"
                              ? estimates::EnvelopeQuantity::MaxTimeDerivative
                              : estimates::EnvelopeQuantity::MinSecondDifference;
    Real reg_bound = 0.0;
    if (p.contains("regularity_bound")) reg_bound = p.at("regularity_bound").get<Real>();
    return estimates::log_envelope_fit(st.u_value, center, quantity, radii, st.value_contact(),
                                       reg_bound);
}

EstimateReport analyze_regularity(RunState& st, const json& p) {
    const auto center = parse_center(p.at("center"), st.u_value.grid.dim);
    const Real r = p.at("r").get<Real>();
    const auto variant = p.contains("variant") ? parse_variant(p.at("variant").get<std::string>())
                                               : grid::CylVariant::Q;
    auto rep = estimates::regularity_norms(st.u_value, grid::Cylinder(center, r, variant),
                                           st.value_contact());
    if (p.contains("hess_range"))
        rep.pass = rep.pass &&
                   in_range(rep.fitted["sup_hess"], p.at("hess_range").get<std::array<Real, 2>>());
    if (p.contains("dt_range"))
        rep.pass = rep.pass && in_range(rep.fitted["sup_dt"], p.at("dt_range").get<std::array<Real, 2>>());
    return rep;
}

EstimateReport analyze_directional_monotonicity(RunState& st, const json& p) {
    const auto center = parse_center(p.at("center"), st.u_value.grid.dim);
    const Real r = p.at("r").get<Real>();
    const auto sigma = p.at("sigma").get<std::vector<Real>>();
    std::array<Real, 2> sx{sigma[0], sigma.size() > 1 ? sigma[1] : 0.0};
    const Real st_t = p.contains("sigma_t") ? p.at("sigma_t").get<Real>() : 0.0;
    const auto variant = p.contains("variant") ? parse_variant(p.at("variant").get<std::string>())
                                               : grid::CylVariant::Q;
    auto rep = estimates::directional_monotonicity(st.u_value, sx, st_t,
                                                   grid::Cylinder(center, r, variant));
    if (p.contains("min_range"))
        rep.pass = rep.pass &&
                   in_range(rep.fitted["min_value"], p.at("min_range").get<std::array<Real, 2>>());
    return rep;
}

EstimateReport analyze_cone_test(RunState& st, const json& p) {
    const auto x0v = p.at("x0").get<std::vector<Real>>();
    Point x0;
    x0[0] = x0v[0];
    if (x0v.size() > 1) x0[1] = x0v[1];
    const auto e0 = p.at("e0").get<std::array<Real, 2>>();
    const Real theta = p.at("theta_deg").get<Real>() * M_PI / 180.0;
    const Real excl = p.contains("exclude_radius") ? p.at("exclude_radius").get<Real>()
                                                   : 2.0 * st.u_geom.grid.h;
    std::vector<Point> pts;
    for (const auto& cp : st.need_cloud().points) {
        const Real dx = cp.x[0] - x0[0];
        const Real dy = cp.x[1] - x0[1];
        if (std::sqrt(dx * dx + dy * dy) <= excl) continue;
        pts.push_back(cp.x);
    }
    const bool empty_cone = freeboundary::cone_test(pts, x0, e0, theta);
    EstimateReport rep;
    rep.name = "cone_test";
    rep.columns = {"points", "empty_cone"};
    rep.rows.push_back({Real(pts.size()), empty_cone ? 1.0 : 0.0});
    rep.fitted["empty_cone"] = empty_cone ? 1.0 : 0.0;
    rep.params["theta_deg"] = p.at("theta_deg").get<Real>();
    if (p.contains("expect")) rep.pass = empty_cone == p.at("expect").get<bool>();
    return rep;
}

EstimateReport analyze_verify_ellipticity(RunState& st, const json& p) {
    const int samples = p.contains("samples") ? p.at("samples").get<int>() : 100;
    const auto op = st.cfg.problem.op.build(st.cfg.problem.dim);
    const auto ver = operators::verify_ellipticity(op, samples, st.cfg.seed);
    EstimateReport rep;
    rep.name = "verify_ellipticity";
    rep.columns = {"min_trace_quotient", "max_trace_quotient", "min_spectral_quotient",
                   "max_spectral_quotient", "violations"};
    rep.rows.push_back({ver.min_trace_quotient, ver.max_trace_quotient, ver.min_spectral_quotient,
                        ver.max_spectral_quotient, Real(ver.violations)});
    rep.fitted["violations"] = Real(ver.violations);
    rep.params["samples"] = Real(samples);
    rep.pass = ver.pass;
    return rep;
}

EstimateReport analyze_harnack_suite(RunState& st, const json& p) {
    const int seeds = p.at("seeds").get<int>();
    const auto center = parse_center(p.at("center"), st.cfg.problem.dim);
    const Real r = p.at("r").get<Real>();
    estimates::HarnackOptions opts;
    opts.C0 = p.contains("C0") ? p.at("C0").get<Real>() : st.source_max_abs;
    if (p.contains("p")) opts.p = p.at("p").get<Real>();
    if (p.contains("deltas")) opts.deltas = p.at("deltas").get<std::vector<Real>>();
    const bool refine = p.contains("refine") && p.at("refine").get<bool>();
    const Real stability_tol = p.contains("stability_tol") ? p.at("stability_tol").get<Real>() : 0.2;

    EstimateReport rep;
    rep.name = "harnack_suite";
    rep.columns = {"seed", "ratio1", "ratio2", "m", "m_refined"};
    Real m_sum = 0.0, m_sum_ref = 0.0;
    bool all_ok = true;
    solver::SolverParams params;
    params.newton_tol = st.cfg.newton_tol;
    for (int s = 0; s < seeds; ++s) {
        const uint64_t seed = st.cfg.seed + uint64_t(s);
        const auto spec = harnack_seed_problem(st.cfg, seed, st.cfg.h);
        const auto u = solver::solve_obstacle_direct(spec, params);
        const auto hr = estimates::harnack_ratios(u, center, r, opts);
        auto m_of = [](const EstimateReport& h) {
            const auto it = h.fitted.find("m");
            return it == h.fitted.end() ? 0.0 : it->second;
        };
        Real m_ref = 0.0;
        if (refine) {
            const auto spec2 = harnack_seed_problem(st.cfg, seed, st.cfg.h / 2);
            const auto u2 = solver::solve_obstacle_direct(spec2, params);
            m_ref = m_of(estimates::harnack_ratios(u2, center, r, opts));
        }
        const Real m = m_of(hr);
        rep.rows.push_back({Real(s), hr.fitted.at("ratio1"), hr.fitted.at("ratio2"), m, m_ref});
        m_sum += m;
        m_sum_ref += m_ref;
        all_ok = all_ok && hr.pass && std::isfinite(hr.fitted.at("ratio1"));
    }
    const Real m_mean = m_sum / seeds;
    rep.fitted["m_mean"] = m_mean;
    rep.params["seeds"] = Real(seeds);
    rep.params["r"] = r;
    rep.params["C0"] = opts.C0;
    rep.params["p"] = opts.p;
    rep.pass = all_ok;
    if (refine) {
        const Real m_mean_ref = m_sum_ref / seeds;
        rep.fitted["m_mean_refined"] = m_mean_ref;
        const Real rel = std::abs(m_mean - m_mean_ref) / std::max(std::abs(m_mean), std::abs(m_mean_ref));
        rep.fitted["m_relative_change"] = rel;
        rep.pass = rep.pass && rel <= stability_tol;
    }
    return rep;
}

EstimateReport dispatch(RunState& st, const config::AnalysisConfig& a) {
    if (a.type == "exact_error") return analyze_exact_error(st, a.params);
    if (a.type == "growth") return analyze_growth(st, a.params);
    if (a.type == "density") return analyze_density(st, a.params);
    if (a.type == "blowup") return analyze_blowup(st, a.params);
    if (a.type == "time_graph") return analyze_time_graph(st, a.params);
    if (a.type == "space_graph") return analyze_space_graph(st, a.params);
    if (a.type == "gradient_dominance") return analyze_gradient_dominance(st, a.params);
    if (a.type == "envelope") return analyze_envelope(st, a.params);
    if (a.type == "regularity") return analyze_regularity(st, a.params);
    if (a.type == "directional_monotonicity") return analyze_directional_monotonicity(st, a.params);
    if (a.type == "cone_test") return analyze_cone_test(st, a.params);
    if (a.type == "verify_ellipticity") return analyze_verify_ellipticity(st, a.params);
    if (a.type == "harnack_suite") return analyze_harnack_suite(st, a.params);
    throw ConfigError("unknown analysis type " + a.type);
}

} // namespace

fs::path resolve_output_dir(const std::string& configured) {
    fs::path p(configured);
    if (const char* root = std::getenv("PAROBS_OUTPUT_ROOT"); root && *root)
        return fs::path(root) / p;
    return p;
}

HarnackSeedData harnack_seed_data(uint64_t seed) {
    Rng rng(0x9a7b3c5d ^ (seed * 0x100000001b3ull));
    HarnackSeedData d;
    d.left_base = rng.uniform(1.0, 2.0);
    d.left_amp = rng.uniform(0.1, 0.5);
    d.left_freq = rng.uniform(1.0, 6.0);
    d.left_phase = rng.uniform(0.0, 2.0 * M_PI);
    d.right_base = rng.uniform(1.0, 2.0);
    d.right_amp = rng.uniform(0.1, 0.5);
    d.right_freq = rng.uniform(1.0, 6.0);
    d.right_phase = rng.uniform(0.0, 2.0 * M_PI);
    return d;
}

solver::ProblemSpec harnack_seed_problem(const Config& cfg, uint64_t seed, Real h) {
    if (cfg.problem.dim != 1) throw ConfigError("harnack_suite supports dim 1");
    const auto d = harnack_seed_data(seed);
    std::array<Real, 2> lo{cfg.problem.extent[0][0], 0.0};
    std::array<Real, 2> hi{cfg.problem.extent[0][1], 0.0};
    const Real dt = cfg.dt_factor * h * h;
    const Real span = cfg.problem.t_range[1] - cfg.problem.t_range[0];
    const long steps = std::max(1l, std::lround(span / dt));
    const auto g = grid::Grid::make(1, lo, hi, h, cfg.problem.t_range[0], cfg.problem.t_range[1],
                                    span / Real(steps));
    auto op = cfg.problem.op.build(1);
    auto source = grid::SpatialField::from_function(
        g, [&](Point p) { return cfg.problem.source ? cfg.problem.source->eval(p, 0.0) : -1.0; });
    const Real mid = 0.5 * (lo[0] + hi[0]);
    const Real half = 0.5 * (hi[0] - lo[0]);
    auto boundary = [d, mid](Point p, Real t) {
        if (p[0] < mid) return d.left_base + d.left_amp * std::sin(d.left_freq * t + d.left_phase);
        return d.right_base + d.right_amp * std::sin(d.right_freq * t + d.right_phase);
    };
    auto initial = [d, boundary, lo, hi, half](Point p) {
        const Real xi = (p[0] - lo[0]) / (2.0 * half);
        Point l, r;
        l[0] = lo[0];
        r[0] = hi[0];
        return (1.0 - xi) * boundary(l, 0.0) + xi * boundary(r, 0.0);
    };
    return solver::ProblemSpec::make(std::move(op), g, std::move(source), cfg.problem.c0, boundary,
                                     initial);
}

RunResult run(const Config& cfg, std::ostream& log) {
    RunResult result;
    result.out_dir = resolve_output_dir(cfg.output_dir);
    fs::create_directories(result.out_dir);

    std::vector<Stage> stages;
    auto timed = [&](const std::string& name, auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        stages.push_back(
            {name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
    };

    RunState st{cfg,          result.out_dir, GridFunction{}, GridFunction{}, std::nullopt,
                std::nullopt, std::nullopt,   {},             {},             1.0};
    const grid::Grid g = cfg.build_grid();

    timed("solve", [&] {
        if (cfg.problem.kind == "planted") {
            const auto& e = *cfg.problem.planted;
            st.u_value = GridFunction::from_function(g, [&](Point p, Real t) { return e.eval(p, t); });
            st.u_geom = st.u_value;
            log << "planted field " << cfg.name << " on " << g.nodes() << " nodes x " << g.nt
                << " levels\n";
            return;
        }
        const auto spec = cfg.build_problem(g);
        st.source_max_abs = std::max(std::abs(spec.source.min_value()), std::abs(spec.source.max_value()));
        auto schedule = cfg.build_schedule();
        auto res = solver::continuation_solve(spec, schedule, cfg.compare_direct);
        st.u_value = std::move(res.u);
        st.u_geom = res.direct ? std::move(*res.direct) : st.u_value;
        st.solve_reports = std::move(res.reports);
        st.oracle_gaps = std::move(res.oracle_gaps);
        log << "solved " << cfg.name << ": " << schedule.epsilons.size() << " penalty stages, "
            << g.nt - 1 << " steps\n";
    });

    // solve report: per-epsilon iteration counts and the uniform penalty bound
    if (cfg.problem.kind == "solve") {
        json sj;
        sj["epsilons"] = json::array();
        Real max_h_eps = 0.0;
        for (const auto& r : st.solve_reports) {
            json e;
            e["epsilon"] = r.epsilon;
            e["steps"] = r.steps;
            e["total_policy_iters"] = r.total_policy_iters;
            e["total_newton_iters"] = r.total_newton_iters;
            e["max_policy_iters"] = r.max_policy_iters;
            e["max_newton_iters"] = r.max_newton_iters;
            e["final_residual"] = r.final_residual;
            e["max_h_eps"] = r.max_h_eps;
            e["dt_monotonicity_violation"] = r.dt_monotonicity_violation;
            sj["epsilons"].push_back(e);
            max_h_eps = std::max(max_h_eps, r.max_h_eps);
        }
        const Real bound = std::max(1.0, st.source_max_abs) + 1e-8;
        sj["max_h_eps"] = max_h_eps;
        sj["penalty_bound"] = bound;
        sj["penalty_bound_ok"] = max_h_eps <= bound;
        if (!st.oracle_gaps.empty()) {
            sj["oracle_gaps"] = st.oracle_gaps;
            bool decreasing = true;
            for (size_t i = 1; i < st.oracle_gaps.size(); ++i)
                decreasing = decreasing && st.oracle_gaps[i] < st.oracle_gaps[i - 1];
            sj["oracle_gaps_decreasing"] = decreasing;
            result.checks.push_back({"oracle_gaps_decreasing", decreasing});
        }
        result.checks.push_back({"penalty_bound", max_h_eps <= bound});
        io::write_json(result.out_dir / (cfg.name + "_solve_report.json"), sj);
        result.files.push_back(cfg.name + "_solve_report.json");
    }

    timed("freeboundary", [&] {
        st.contact_value = freeboundary::extract_contact_set(st.u_value, cfg.kappa_c);
        st.contact_geom = freeboundary::extract_contact_set(st.u_geom, cfg.kappa_c);
        if (!st.contact_geom->empty() && !st.contact_geom->full()) {
            st.cloud = freeboundary::extract_free_boundary(st.u_geom, *st.contact_geom);
            std::ostringstream csv;
            csv << (g.dim == 2 ? "x1,x2,t,edge\n" : "x,t,edge\n");
            for (const auto& p : st.cloud->points) {
                csv << io::fmt_real(p.x[0]) << ',';
                if (g.dim == 2) csv << io::fmt_real(p.x[1]) << ',';
                csv << io::fmt_real(p.t) << ',' << p.edge_axis << '\n';
            }
            io::write_text(result.out_dir / (cfg.name + "_cloud.csv"), csv.str());
            result.files.push_back(cfg.name + "_cloud.csv");
        } else {
            log << "contact set is empty or full; boundary extraction skipped\n";
        }
    });

    timed("analyses", [&] {
        for (const auto& a : cfg.analyses) {
            auto rep = dispatch(st, a);
            const auto files = io::write_estimate_report(result.out_dir, cfg.name, rep);
            result.files.insert(result.files.end(), files.begin(), files.end());
            result.checks.push_back({rep.name, rep.pass});
            result.all_pass = result.all_pass && rep.pass;
            log << (rep.pass ? "  pass  " : "  FAIL  ") << rep.name << "\n";
        }
    });

    timed("snapshot", [&] {
        const int stride = std::max(1, (g.nt - 1) / std::max(1, cfg.snapshot_count - 1));
        const auto files =
            io::write_grid_function(result.out_dir, cfg.name + "_field", st.u_value, stride);
        result.files.push_back(files.header);
        result.files.push_back(files.csv);
    });

    for (const auto& [label, ok] : result.checks) result.all_pass = result.all_pass && ok;

    json manifest;
    manifest["config_hash"] = io::fnv1a_hash(cfg.canonical);
    manifest["artifact_version"] = kVersion;
    manifest["name"] = cfg.name;
    manifest["all_pass"] = result.all_pass;
    manifest["files"] = result.files;
    manifest["stages"] = json::array();
    for (const auto& s : stages) manifest["stages"].push_back({{"name", s.name}, {"seconds", s.seconds}});
    json checks = json::array();
    for (const auto& [label, ok] : result.checks) checks.push_back({{"name", label}, {"pass", ok}});
    manifest["checks"] = checks;
    io::write_json(result.out_dir / "manifest.json", manifest);

    log << (result.all_pass ? "all checks passed\n" : "some checks FAILED\n");
    return result;
}

std::string report(const fs::path& run_dir) {
    const fs::path manifest_path = run_dir / "manifest.json";
    if (!fs::exists(manifest_path)) throw Error("missing manifest.json in " + run_dir.string());
    std::ifstream in(manifest_path);
    const json manifest = json::parse(in);

    std::vector<std::string> missing;
    for (const auto& f : manifest.at("files"))
        if (!fs::exists(run_dir / f.get<std::string>())) missing.push_back(f.get<std::string>());
    if (!missing.empty()) {
        std::string msg = "missing files:";
        for (const auto& f : missing) msg += " " + f;
        throw Error(msg);
    }

    std::ostringstream md;
    md << "# Run summary: " << manifest.at("name").get<std::string>() << "\n\n";
    md << "- artifact version: " << manifest.at("artifact_version").get<std::string>() << "\n";
    md << "- config hash: " << manifest.at("config_hash") << "\n";
    md << "- overall: " << (manifest.at("all_pass").get<bool>() ? "PASS" : "FAIL") << "\n\n";

    const std::string name = manifest.at("name").get<std::string>();
    const fs::path solve_path = run_dir / (name + "_solve_report.json");
    if (fs::exists(solve_path)) {
        std::ifstream sin(solve_path);
        const json sj = json::parse(sin);
        md << "## Solver\n\n";
        md << "- max beta over all stages: " << sj.at("max_h_eps").get<Real>() << " (bound "
           << sj.at("penalty_bound").get<Real>() << ", "
           << (sj.at("penalty_bound_ok").get<bool>() ? "ok" : "violated") << ")\n";
        if (sj.contains("oracle_gaps")) {
            md << "- oracle gaps:";
            for (const auto& v : sj.at("oracle_gaps")) md << " " << v.get<Real>();
            md << (sj.at("oracle_gaps_decreasing").get<bool>() ? " (decreasing)" : " (NOT decreasing)")
               << "\n";
        }
        md << "\n";
    }

    md << "## Measurements\n\n";
    md << "| report | fitted constants | pass |\n|---|---|---|\n";
    for (const auto& f : manifest.at("files")) {
        const std::string fname = f.get<std::string>();
        if (fname.size() < 6 || fname.substr(fname.size() - 5) != ".json") continue;
        if (fname == name + "_solve_report.json" || fname == name + "_field.json") continue;
        std::ifstream rin(run_dir / fname);
        const json rj = json::parse(rin);
        if (!rj.contains("fitted")) continue;
        md << "| " << rj.at("name").get<std::string>() << " | ";
        bool first = true;
        for (const auto& [key, value] : rj.at("fitted").items()) {
            if (!first) md << ", ";
            md << key << "=" << value;
            first = false;
        }
        md << " | " << (rj.at("pass").get<bool>() ? "pass" : "FAIL") << " |\n";
    }
    md << "\n";
    return md.str();
}

} // namespace parobs::runner
