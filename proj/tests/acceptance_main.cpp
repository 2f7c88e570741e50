// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
//
//  1  stationary exactness (sup error, boundary location, runtime)
//  2  travelling wave exactness (sup error, tau graph, Lipschitz, runtime)
//  3  optimal growth exponent at the wave boundary point
//  4  non-degeneracy constant >= 1/3 - 0.05
//  5  uniform penalty bound across every run and epsilon
//  6  penalized-vs-direct gaps strictly decreasing, final <= 1e-3
//  7  regular classification at the wave boundary point
//  8  singular classification of the planted 2D profile
//  9  density 1/2 at the regular point
// 10  gradient dominance dt u >= c |grad u| with c near 1
// 11  Harnack suite over 20 seeded positive solves
// 12  log-envelope domination of semiconvexity and dt moduli
// 13  convergence order: halving h cuts the sup error by >= 3
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "parobs/blowup.hpp"
#include "parobs/config.hpp"
#include "parobs/estimates.hpp"
#include "parobs/freeboundary.hpp"
#include "parobs/presets.hpp"
#include "parobs/runner.hpp"
#include "parobs/solver.hpp"

using namespace parobs;
using grid::Grid;
using grid::GridFunction;
using operators::SymMat;

namespace {

int g_failures = 0;

void criterion(int id, const std::string& label, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, label.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

Real wave(Real s) {
    const Real sp = std::max(s, 0.0);
    return std::exp(sp) - 1.0 - sp;
}

Real half_parabola(Real x) { return 0.5 * std::max(x, 0.0) * std::max(x, 0.0); }

struct Run {
    solver::ContinuationResult res;
    Grid grid;
    double seconds = 0.0;
};

// Criterion 1 spec: F = trace, f = -1 on (-1,1), boundary 0.5*x_+^2.
Run run_stationary(Real h, Real eps_scale, bool oracle) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = Grid::make(1, {-1.0, 0.0}, {1.0, 0.0}, h, 0.0, 0.0625, h * h);
    auto source = grid::SpatialField::from_function(g, [](Point) { return -1.0; });
    auto spec = solver::ProblemSpec::make(
        operators::linear_operator(1, SymMat::diag1(1.0)), g, std::move(source), 1.0,
        [](Point p, Real) { return half_parabola(p[0]); },
        [](Point p) { return half_parabola(p[0]); });
    solver::PenaltySchedule sched;
    sched.epsilons = {1e-2 * eps_scale, 1e-3 * eps_scale, 1e-4 * eps_scale};
    Run out{solver::continuation_solve(spec, sched, oracle), g, 0.0};
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// Criterion 2 spec: the exact wave w(x+t) on (-2,2) x (0,1).
Run run_wave(Real h, Real eps_scale, bool oracle) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = Grid::make(1, {-2.0, 0.0}, {2.0, 0.0}, h, 0.0, 1.0, 2.0 * h * h);
    auto source = grid::SpatialField::from_function(g, [](Point) { return -1.0; });
    auto spec = solver::ProblemSpec::make(
        operators::linear_operator(1, SymMat::diag1(1.0)), g, std::move(source), 1.0,
        [](Point p, Real t) { return wave(p[0] + t); }, [](Point p) { return wave(p[0]); });
    solver::PenaltySchedule sched;
    sched.epsilons = {1e-2 * eps_scale, 1e-3 * eps_scale, 4.0 * h * h * eps_scale};
    Run out{solver::continuation_solve(spec, sched, oracle), g, 0.0};
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

Real sup_error(const GridFunction& u, const std::function<Real(Real, Real)>& exact) {
    const Grid& g = u.grid;
    Real err = 0.0;
    for (int m = 0; m < g.nt; ++m)
        for (int ix = 0; ix < g.nx[0]; ++ix)
            err = std::max(err, std::abs(u.at(ix, 0, m) - exact(g.x(0, ix), g.t(m))));
    return err;
}

SpaceTimePoint pt(Real x, Real t) {
    SpaceTimePoint p;
    p.x[0] = x;
    p.t = t;
    return p;
}

} // namespace

int main() {
    const auto suite_start = std::chrono::steady_clock::now();
    std::printf("acceptance suite (13 criteria)\n");

    Real max_h_eps_all = 0.0; // criterion 5 collects over every run
    const Real source_bound = 1.0;

    // ---- criteria 1, 6: stationary spec at h = 1/256 ----
    const Real h1 = 1.0 / 256.0;
    auto s1 = run_stationary(h1, 1.0, true);
    for (const auto& r : s1.res.reports) max_h_eps_all = std::max(max_h_eps_all, r.max_h_eps);
    const Real stationary_err_h =
        sup_error(s1.res.u, [](Real x, Real) { return half_parabola(x); });
    {
        const auto contact = freeboundary::extract_contact_set(*s1.res.direct);
        const auto cloud = freeboundary::extract_free_boundary(*s1.res.direct, contact);
        Real fb_dev = 0.0;
        for (const auto& p : cloud.points) fb_dev = std::max(fb_dev, std::abs(p.x[0]));
        const Real min_u = s1.res.u.min_value();
        const bool pass = stationary_err_h <= 2e-3 && fb_dev <= 2 * h1 && s1.seconds < 60.0 &&
                          min_u >= -1e-8;
        criterion(1, "stationary exactness", pass,
                  fmt("sup err %.3e <= 2e-3, boundary dev %.4f <= %.4f, min u %.1e, %.1f s",
                      stationary_err_h, fb_dev, 2 * h1, min_u, s1.seconds));

        bool decreasing = s1.res.oracle_gaps.size() == 3;
        for (size_t i = 1; i < s1.res.oracle_gaps.size(); ++i)
            decreasing = decreasing && s1.res.oracle_gaps[i] < s1.res.oracle_gaps[i - 1];
        const Real final_gap = s1.res.oracle_gaps.back();
        criterion(6, "oracle agreement", decreasing && final_gap <= 1e-3,
                  fmt("gaps %.2e > %.2e > %.2e, final <= 1e-3", s1.res.oracle_gaps[0],
                      s1.res.oracle_gaps[1], s1.res.oracle_gaps[2]));
    }
    const auto s1_contact = freeboundary::extract_contact_set(s1.res.u);
    const GridFunction s1_field = std::move(s1.res.u);
    s1.res.direct.reset();


    // ---- criteria 2, 3, 4, 7, 9, 10: travelling wave at h = 1/128 ----
    const Real h2 = 1.0 / 128.0;
    auto w1 = run_wave(h2, 1.0, true);
    for (const auto& r : w1.res.reports) max_h_eps_all = std::max(max_h_eps_all, r.max_h_eps);
    const GridFunction& uw = w1.res.u;            // penalized limit: values, derivatives
    const GridFunction& uw_geom = *w1.res.direct; // complementarity oracle: contact geometry
    const auto w_contact = freeboundary::extract_contact_set(uw);
    const auto w_geom_contact = freeboundary::extract_contact_set(uw_geom);
    {
        const Real err = sup_error(uw, [](Real x, Real t) { return wave(x + t); });
        const auto graph = freeboundary::time_graph(uw_geom, w_geom_contact);
        Real tau_dev = 0.0;
        for (int ix = 0; ix < w1.grid.nx[0]; ++ix) {
            const Real x = w1.grid.x(0, ix);
            if (x < -0.9 || x > -0.1 || graph.flagged[size_t(ix)]) continue;
            tau_dev = std::max(tau_dev, std::abs(graph.tau[size_t(ix)] - (-x)));
        }
        const bool lip_ok = graph.lipschitz_estimate >= 0.85 && graph.lipschitz_estimate <= 1.15;
        const bool pass = err <= 5e-3 && tau_dev <= 2 * h2 && lip_ok && w1.seconds < 120.0 &&
                          uw.min_value() >= -1e-8;
        criterion(2, "travelling wave exactness", pass,
                  fmt("sup err %.3e <= 5e-3, tau dev %.4f <= %.4f, Lip %.3f in [0.85,1.15], %.1f s",
                      err, tau_dev, 2 * h2, graph.lipschitz_estimate, w1.seconds));
    }

    const SpaceTimePoint wave_pt = pt(-0.5, 0.5);
    {
        const auto rep = estimates::growth_and_nondegeneracy(uw_geom, wave_pt, {0.0625, 0.125, 0.25},
                                                             w_geom_contact.tol_contact);
        const Real slope = rep.fitted.at("slope");
        criterion(3, "optimal growth exponent", slope >= 1.9 && slope <= 2.1,
                  fmt("log-log slope %.3f in [1.9, 2.1] over r in [8h, 0.25] (full cylinder %.3f)",
                      slope, rep.fitted.at("slope_full")));
        const Real c = rep.fitted.at("c");
        criterion(4, "non-degeneracy constant", c >= 1.0 / 3.0 - 0.05,
                  fmt("c = min sup/r^2 = %.3f >= 1/3 - 0.05 = %.3f", c, 1.0 / 3.0 - 0.05));
    }

    {
        const auto seq =
            blowup::make_sequence(uw_geom, wave_pt, 0.5, 0.5, 3, w_geom_contact.tol_contact);
        std::vector<Real> dens;
        for (const Real r : seq.radii)
            dens.push_back(freeboundary::density(uw_geom, w_geom_contact, wave_pt, r));
        const auto cl = blowup::classify(seq, dens);
        const bool pass = cl.verdict == blowup::Verdict::Regular && cl.half_fit.a >= 0.45 &&
                          cl.half_fit.a <= 0.55 && std::abs(cl.half_fit.e[0] - 1.0) <= 0.02;
        criterion(7, "regular classification", pass,
                  fmt("verdict %s, a = %.3f in [0.45, 0.55], e = %+.3f within 0.02 of +x",
                      blowup::verdict_name(cl.verdict), cl.half_fit.a, cl.half_fit.e[0]));
        const bool dens_ok = dens[1] >= 0.45 && dens[1] <= 0.55 && dens[2] >= 0.45 && dens[2] <= 0.55;
        criterion(9, "density at the regular point", dens_ok,
                  fmt("density %.3f (r=%.4f) and %.3f (r=%.4f) in [0.45, 0.55]", dens[1],
                      seq.radii[1], dens[2], seq.radii[2]));
    }

    {
        const auto rep = estimates::gradient_dominance(uw, grid::Cylinder(wave_pt, 0.25),
                                                       estimates::DominanceMode::TimeOverGradient,
                                                       w_contact);
        const Real c = rep.fitted.at("c");
        criterion(10, "gradient dominance", c >= 0.9 && c <= 1.1,
                  fmt("largest c with dt u >= c|grad u|: %.3f in [0.9, 1.1]", c));
    }

    // ---- criterion 8: planted 2D singular profile ----
    {
        const Real h = 1.0 / 256.0;
        const auto g = Grid::make(2, {-1.0, -1.0}, {1.0, 1.0}, h, -1.0, 1.0, 0.25);
        const auto u =
            GridFunction::from_function(g, [](Point p, Real) { return 0.5 * p[0] * p[0]; });
        const auto contact = freeboundary::extract_contact_set(u);
        const auto seq =
            blowup::make_sequence(u, SpaceTimePoint{}, 0.5, 0.5, 3, contact.tol_contact);
        std::vector<Real> dens;
        for (const Real r : seq.radii)
            dens.push_back(freeboundary::density(u, contact, SpaceTimePoint{}, r));
        const auto cl = blowup::classify(seq, dens);
        const Real a_dev = std::max({std::abs(cl.quad_fit.A.xx - 0.5), std::abs(cl.quad_fit.A.xy),
                                     std::abs(cl.quad_fit.A.yy)});
        const bool pass =
            cl.verdict == blowup::Verdict::Singular && a_dev <= 0.02 && dens.back() <= 0.1;
        criterion(8, "singular classification", pass,
                  fmt("verdict %s, |A - diag(0.5,0)| = %.4f <= 0.02, density %.3f <= 0.1",
                      blowup::verdict_name(cl.verdict), a_dev, dens.back()));
    }

    // ---- criterion 11: Harnack suite over 20 seeded positive solves ----
    {
        const auto cfg = config::Config::from_json(presets::config_json("harnack_family"));
        estimates::HarnackOptions opts;
        opts.C0 = 1.0;
        solver::SolverParams params;
        const SpaceTimePoint center = pt(0.0, 0.5);
        bool all_finite = true, all_consistent = true;
        Real m_sum = 0.0, m_sum_ref = 0.0;
        const int seeds = 20;
        for (int s = 0; s < seeds; ++s) {
            const auto spec = runner::harnack_seed_problem(cfg, uint64_t(s) + 1, cfg.h);
            const auto u = solver::solve_obstacle_direct(spec, params);
            const auto rep = estimates::harnack_ratios(u, center, 0.4, opts);
            all_finite = all_finite && std::isfinite(rep.fitted.at("ratio1"));
            all_consistent = all_consistent && rep.fitted.at("pavg_numerator") <=
                                                   rep.fitted.at("sup_numerator") + 1e-12;
            m_sum += rep.fitted.at("m");
            const auto spec2 = runner::harnack_seed_problem(cfg, uint64_t(s) + 1, cfg.h / 2);
            const auto u2 = solver::solve_obstacle_direct(spec2, params);
            m_sum_ref += estimates::harnack_ratios(u2, center, 0.4, opts).fitted.at("m");
        }
        const Real m_h = m_sum / seeds;
        const Real m_h2 = m_sum_ref / seeds;
        const Real rel = std::abs(m_h - m_h2) / std::max(std::abs(m_h), std::abs(m_h2));
        const bool pass = all_finite && all_consistent && rel <= 0.2;
        criterion(
            11, "Harnack suite", pass,
            fmt("20 seeds: ratios finite %s, p-average consistent %s, m %.3f vs %.3f (rel %.1f%%)",
                all_finite ? "yes" : "NO", all_consistent ? "yes" : "NO", m_h, m_h2, 100.0 * rel));
    }

    // ---- criterion 12: log envelopes on the solved acceptance fields ----
    {
        bool pass = true;
        std::string detail;
        const auto wave_reg = estimates::regularity_norms(
            uw, grid::Cylinder(pt(0.0, 0.5), 0.5, grid::CylVariant::Qminus), w_contact);
        const Real wave_bound = wave_reg.fitted.at("bound");
        const std::vector<Real> wave_radii{0.0625, 0.125, 0.25, 0.5};
        for (const auto q : {estimates::EnvelopeQuantity::MinSecondDifference,
                             estimates::EnvelopeQuantity::MaxTimeDerivative}) {
            const auto rep =
                estimates::log_envelope_fit(uw, wave_pt, q, wave_radii, w_contact, wave_bound);
            pass = pass && rep.pass;
            detail += fmt("wave %s: C=%.3f eps=%.2f; ", rep.name.c_str(), rep.fitted.at("C_env"),
                          rep.fitted.at("eps_env"));
        }
        const auto st_reg = estimates::regularity_norms(
            s1_field, grid::Cylinder(pt(0.0, 0.046875), 0.125, grid::CylVariant::Qminus),
            s1_contact);
        const std::vector<Real> st_radii{0.015625, 0.03125, 0.0625, 0.125};
        for (const auto q : {estimates::EnvelopeQuantity::MinSecondDifference,
                             estimates::EnvelopeQuantity::MaxTimeDerivative}) {
            const auto rep = estimates::log_envelope_fit(s1_field, pt(0.0, 0.046875), q, st_radii,
                                                         s1_contact, st_reg.fitted.at("bound"));
            pass = pass && rep.pass;
        }
        criterion(12, "semiconvexity/time-log envelopes", pass, detail + "stationary both pass");
    }

    // ---- criterion 13: convergence order under h -> h/2 (eps ~ h^2) ----
    {
        auto s2 = run_stationary(h1 / 2, 0.25, false);
        for (const auto& r : s2.res.reports) max_h_eps_all = std::max(max_h_eps_all, r.max_h_eps);
        const Real stat_err_h2 =
            sup_error(s2.res.u, [](Real x, Real) { return half_parabola(x); });
        s2.res.u = GridFunction{};

        const Real wave_err_h = sup_error(uw, [](Real x, Real t) { return wave(x + t); });
        auto w2 = run_wave(h2 / 2, 0.25, false);
        for (const auto& r : w2.res.reports) max_h_eps_all = std::max(max_h_eps_all, r.max_h_eps);
        const Real wave_err_h2 = sup_error(w2.res.u, [](Real x, Real t) { return wave(x + t); });
        w2.res.u = GridFunction{};

        const Real r_stat = stationary_err_h / stat_err_h2;
        const Real r_wave = wave_err_h / wave_err_h2;
        criterion(13, "convergence order", r_stat >= 3.0 && r_wave >= 3.0,
                  fmt("stationary %.2e/%.2e = %.2f, wave %.2e/%.2e = %.2f, both >= 3",
                      stationary_err_h, stat_err_h2, r_stat, wave_err_h, wave_err_h2, r_wave));
    }

    // ---- criterion 5: uniform penalty bound across every run and epsilon ----
    {
        const Real bound = std::max(1.0, source_bound) + 1e-8;
        criterion(5, "uniform penalty bound", max_h_eps_all <= bound,
                  fmt("max beta over all runs and eps: %.10f <= %.10f", max_h_eps_all, bound));
    }

    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();
    std::printf("%d/13 criteria passed in %.1f s\n", 13 - g_failures, total);
    return g_failures == 0 ? 0 : 1;
}
