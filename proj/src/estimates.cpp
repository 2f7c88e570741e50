#include "parobs/estimates.hpp"

#include <algorithm>
#include <cmath>

namespace parobs::estimates {

using grid::Cylinder;
using grid::Grid;
using grid::GridFunction;

Real loglog_slope(const std::vector<Real>& x, const std::vector<Real>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope fit needs >= 2 samples");
    Real sx = 0, sy = 0, sxx = 0, sxy = 0;
    const Real n = Real(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw ConfigError("slope fit needs positive samples");
        const Real lx = std::log(x[i]);
        const Real ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

void check_on_boundary(const GridFunction& u, const SpaceTimePoint& p, Real contact_tol) {
    const Real h = u.grid.h;
    if (u.interp(p.x, p.t) > contact_tol)
        throw Error("estimate point is not on the free boundary");
    const auto stats = grid::cylinder_stats(u, Cylinder(p, 4 * h), contact_tol);
    if (stats.sup <= contact_tol) throw Error("estimate point is interior to the contact set");
}

} // namespace

EstimateReport growth_and_nondegeneracy(const GridFunction& u, const SpaceTimePoint& fb_point,
                                        const std::vector<Real>& radii, Real contact_tol) {
    const Real h = u.grid.h;
    for (const Real r : radii)
        if (r < 4 * h) throw ConfigError("growth radii must satisfy r >= 4h");
    check_on_boundary(u, fb_point, contact_tol);

    EstimateReport rep;
    rep.name = "growth_and_nondegeneracy";
    rep.columns = {"r", "sup_Q", "sup_Qminus", "sup_Q_over_r2", "sup_Qminus_over_r2"};
    std::vector<Real> sup_q, sup_qm;
    Real C = 0.0, c = std::numeric_limits<Real>::infinity();
    for (const Real r : radii) {
        const auto sq = grid::cylinder_stats(u, Cylinder(fb_point, r, grid::CylVariant::Q), contact_tol);
        const auto sm = grid::cylinder_stats(u, Cylinder(fb_point, r, grid::CylVariant::Qminus), contact_tol);
        sup_q.push_back(sq.sup);
        sup_qm.push_back(sm.sup);
        C = std::max(C, sq.sup / (r * r));
        c = std::min(c, sm.sup / (r * r));
        rep.rows.push_back({r, sq.sup, sm.sup, sq.sup / (r * r), sm.sup / (r * r)});
    }
    rep.fitted["slope"] = loglog_slope(radii, sup_qm);
    rep.fitted["slope_full"] = loglog_slope(radii, sup_q);
    rep.fitted["C"] = C;
    rep.fitted["c"] = c;
    rep.params["h"] = h;
    rep.params["contact_tol"] = contact_tol;
    return rep;
}

EstimateReport regularity_norms(const GridFunction& u, const Cylinder& region,
                                const freeboundary::ContactSet& contact) {
    const Grid& g = u.grid;
    const auto near_fb = freeboundary::near_boundary_mask(contact);
    EstimateReport rep;
    rep.name = "regularity_norms";
    rep.columns = {"sup_dt", "sup_hess"};
    Real sup_dt = 0.0, sup_hess = 0.0;
    long counted = 0;
    grid::for_each_node(g, region, [&](int ix, int iy, int m) {
        const size_t k = size_t(m) * size_t(g.nodes()) + size_t(g.index(ix, iy));
        if (near_fb[k]) return;
        sup_dt = std::max(sup_dt, std::abs(grid::diff_t(u, ix, iy, m)));
        sup_hess = std::max(sup_hess, std::abs(grid::diff_second(u, 0, ix, iy, m)));
        if (g.dim == 2) {
            sup_hess = std::max(sup_hess, std::abs(grid::diff_second(u, 1, ix, iy, m)));
            sup_hess = std::max(sup_hess, std::abs(grid::diff_cross(u, ix, iy, m)));
        }
        ++counted;
    });
    if (counted == 0) throw EmptyRegionError("regularity region has no usable nodes");
    rep.rows.push_back({sup_dt, sup_hess});
    rep.fitted["sup_dt"] = sup_dt;
    rep.fitted["sup_hess"] = sup_hess;
    rep.fitted["bound"] = sup_dt + sup_hess;
    rep.params["h"] = g.h;
    rep.params["nodes"] = Real(counted);
    return rep;
}

EnvelopeFit fit_log_envelope(const std::vector<Real>& radii, const std::vector<Real>& values,
                             Real floor_value) {
    if (radii.size() != values.size() || radii.empty())
        throw ConfigError("envelope fit needs matching radii and values");
    EnvelopeFit fit;
    std::vector<Real> lx, ly;
    for (size_t i = 0; i < radii.size(); ++i) {
        const Real m = std::abs(values[i]);
        if (m <= floor_value) continue;
        lx.push_back(std::log(std::abs(std::log(radii[i]))));
        ly.push_back(std::log(m));
    }
    if (lx.size() < 2) {
        // everything at the noise floor: any positive exponent dominates
        fit.degenerate = true;
        fit.eps_env = 1.0;
        Real c = 0.0;
        for (size_t i = 0; i < radii.size(); ++i)
            c = std::max(c, std::abs(values[i]) * std::abs(std::log(radii[i])));
        fit.C_env = c;
        return fit;
    }
    Real sx = 0, sy = 0, sxx = 0, sxy = 0;
    const Real n = Real(lx.size());
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const Real slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.eps_env = -slope;
    // scale C upward so the envelope dominates every sample
    Real c = 0.0;
    for (size_t i = 0; i < radii.size(); ++i)
        c = std::max(c, std::abs(values[i]) * std::pow(std::abs(std::log(radii[i])), fit.eps_env));
    fit.C_env = c;
    return fit;
}

EstimateReport log_envelope_fit(const GridFunction& u, const SpaceTimePoint& fb_point,
                                EnvelopeQuantity quantity, const std::vector<Real>& radii,
                                const freeboundary::ContactSet& contact, Real regularity_bound) {
    if (radii.size() < 2) throw ConfigError("envelope needs >= 2 radii");
    const Real r_max = *std::max_element(radii.begin(), radii.end());
    const Real r_min = *std::min_element(radii.begin(), radii.end());
    if (r_max / r_min < 7.9) throw ConfigError("envelope radii must span >= 3 octaves");

    const Grid& g = u.grid;
    const auto near_fb = freeboundary::near_boundary_mask(contact);
    const int n_dir = g.dim == 2 ? 32 : 1;

    EstimateReport rep;
    rep.name = quantity == EnvelopeQuantity::MinSecondDifference ? "envelope_min_second_diff"
                                                                 : "envelope_max_dt";
    rep.columns = {"r", "m"};
    std::vector<Real> ms;
    for (const Real r : radii) {
        Real m_r = quantity == EnvelopeQuantity::MinSecondDifference
                       ? std::numeric_limits<Real>::infinity()
                       : -std::numeric_limits<Real>::infinity();
        grid::for_each_node(g, Cylinder(fb_point, r), [&](int ix, int iy, int m) {
            const size_t k = size_t(m) * size_t(g.nodes()) + size_t(g.index(ix, iy));
            if (near_fb[k]) return;
            if (quantity == EnvelopeQuantity::MinSecondDifference) {
                for (int d = 0; d < n_dir; ++d) {
                    const Real ang = M_PI * Real(d) / n_dir;
                    const Real e[2] = {std::cos(ang), std::sin(ang)};
                    m_r = std::min(m_r, grid::diff_dir_second(u, e, ix, iy, m));
                }
            } else {
                m_r = std::max(m_r, grid::diff_t(u, ix, iy, m));
            }
        });
        if (!std::isfinite(m_r)) m_r = 0.0;
        ms.push_back(m_r);
        rep.rows.push_back({r, m_r});
    }

    // For the lower envelope only negative excursions matter; for dt u only
    // positive ones. Everything else counts as zero signal.
    std::vector<Real> magnitudes;
    for (const Real m : ms)
        magnitudes.push_back(quantity == EnvelopeQuantity::MinSecondDifference ? std::max(-m, 0.0)
                                                                               : std::max(m, 0.0));
    const Real floor_value = std::max(10.0 * g.h * g.h, 1e-10);
    const auto fit = fit_log_envelope(radii, magnitudes, floor_value);
    rep.fitted["C_env"] = fit.C_env;
    rep.fitted["eps_env"] = fit.eps_env;
    rep.fitted["degenerate"] = fit.degenerate ? 1.0 : 0.0;
    rep.params["floor"] = floor_value;
    rep.params["h"] = g.h;
    bool pass = fit.degenerate || fit.eps_env > 0.0;
    if (regularity_bound > 0.0) {
        rep.params["regularity_bound"] = regularity_bound;
        pass = pass && fit.C_env <= 10.0 * regularity_bound;
    }
    rep.pass = pass;
    return rep;
}

EstimateReport directional_monotonicity(const GridFunction& u, const std::array<Real, 2>& sigma_x,
                                        Real sigma_t, const Cylinder& region) {
    const Grid& g = u.grid;
    const Real sn = std::sqrt(sigma_x[0] * sigma_x[0] + sigma_x[1] * sigma_x[1]);
    if (std::abs(sn - 1.0) > 1e-9) throw ConfigError("sigma must have unit spatial part");
    Real min_val = std::numeric_limits<Real>::infinity();
    long count = 0;
    grid::for_each_node(g, region, [&](int ix, int iy, int m) {
        Real dsig = sigma_x[0] * grid::diff_grad(u, 0, ix, iy, m);
        if (g.dim == 2) dsig += sigma_x[1] * grid::diff_grad(u, 1, ix, iy, m);
        const Real dt_u = grid::diff_t(u, ix, iy, m);
        dsig += sigma_t * dt_u;
        min_val = std::min(min_val, dsig - dt_u - u.at(ix, iy, m));
        ++count;
    });
    if (count == 0) throw EmptyRegionError("empty monotonicity region");
    EstimateReport rep;
    rep.name = "directional_monotonicity";
    rep.columns = {"min_value"};
    rep.rows.push_back({min_val});
    rep.fitted["min_value"] = min_val;
    rep.params["sigma_x0"] = sigma_x[0];
    rep.params["sigma_x1"] = sigma_x[1];
    rep.params["sigma_t"] = sigma_t;
    return rep;
}

EstimateReport gradient_dominance(const GridFunction& u, const Cylinder& region, DominanceMode mode,
                                  const freeboundary::ContactSet& contact,
                                  const std::array<Real, 2>& direction, Real slack) {
    const Grid& g = u.grid;
    if (slack < 0) slack = 10.0 * g.h * g.h;
    const auto near_fb = freeboundary::near_boundary_mask(contact);

    std::vector<Real> quantity, gradn;
    grid::for_each_node(g, region, [&](int ix, int iy, int m) {
        const size_t k = size_t(m) * size_t(g.nodes()) + size_t(g.index(ix, iy));
        if (near_fb[k]) return;
        Real q;
        if (mode == DominanceMode::TimeOverGradient) {
            q = grid::diff_t(u, ix, iy, m);
        } else {
            const Real e[2] = {direction[0], direction[1]};
            q = grid::diff_dir_second(u, e, ix, iy, m);
        }
        quantity.push_back(q);
        gradn.push_back(grid::grad_norm(u, ix, iy, m));
    });
    if (quantity.empty()) throw EmptyRegionError("empty dominance region");

    EstimateReport rep;
    rep.name = mode == DominanceMode::TimeOverGradient ? "gradient_dominance_time"
                                                       : "gradient_dominance_second_derivative";
    rep.columns = {"c", "min_slack"};
    rep.params["slack"] = slack;
    rep.params["nodes"] = Real(quantity.size());

    Real q_max = 0.0;
    for (const Real q : quantity) q_max = std::max(q_max, std::abs(q));
    if (q_max == 0.0) {
        rep.fitted["c"] = 0.0;
        rep.rows.push_back({0.0, 0.0});
        return rep;
    }

    auto min_at = [&](Real c) {
        Real lo = std::numeric_limits<Real>::infinity();
        for (size_t i = 0; i < quantity.size(); ++i)
            lo = std::min(lo, quantity[i] - c * gradn[i]);
        return lo;
    };
    auto feasible = [&](Real c) { return min_at(c) >= -slack; };

    if (!feasible(0.0)) {
        rep.fitted["c"] = 0.0;
        rep.pass = false;
        rep.notes.push_back("quantity dips below -slack even at c = 0");
        rep.rows.push_back({0.0, min_at(0.0)});
        return rep;
    }
    Real lo = 0.0, hi = 1.0;
    while (feasible(hi) && hi < 1e9) {
        lo = hi;
        hi *= 2;
    }
    if (hi >= 1e9) {
        rep.fitted["c"] = lo;
        rep.notes.push_back("constant is unbounded on this region (gradient vanishes)");
        rep.rows.push_back({lo, min_at(lo)});
        return rep;
    }
    while (hi - lo > 1e-3) {
        const Real mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    rep.fitted["c"] = lo;
    rep.rows.push_back({lo, min_at(lo)});
    return rep;
}

EstimateReport harnack_ratios(const GridFunction& u, const SpaceTimePoint& center, Real r,
                              const HarnackOptions& opts) {
    const Grid& g = u.grid;
    if (u.min_value() < -1e-12) throw Error("harnack_ratios requires a nonnegative field");
    if (!(opts.p > 0 && opts.p < 1)) throw ConfigError("harnack p must lie in (0,1)");

    const Cylinder dminus(center, r / 2, grid::CylVariant::Dminus);
    const Cylinder dplus(center, r / 2, grid::CylVariant::Dplus);
    const auto sm = grid::cylinder_stats(u, dminus, 0.0);
    const auto sp = grid::cylinder_stats(u, dplus, 0.0);
    const Real denom = sp.inf + r * r * opts.C0;

    // p-average over the realized D^- nodes (serial sum, deterministic)
    Real psum = 0.0;
    long pcount = 0;
    grid::for_each_node(g, dminus, [&](int ix, int iy, int m) {
        psum += std::pow(std::max(u.at(ix, iy, m), 0.0), opts.p);
        ++pcount;
    });
    const Real pavg = std::pow(psum / Real(pcount), 1.0 / opts.p);

    EstimateReport rep;
    rep.name = "harnack_ratios";
    rep.columns = {"delta", "worst_ratio", "positions"};
    rep.fitted["ratio1"] = sm.sup / denom;
    rep.fitted["ratio2"] = pavg / denom;
    rep.fitted["sup_numerator"] = sm.sup;
    rep.fitted["pavg_numerator"] = pavg;
    rep.params["r"] = r;
    rep.params["C0"] = opts.C0;
    rep.params["p"] = opts.p;
    rep.params["spatial_positions"] = Real(opts.spatial_positions);
    rep.params["temporal_positions"] = Real(opts.temporal_positions);

    // Lemma-style shifted averages: denominator uses inf over Q^+_{r/2}(x0,t0).
    const auto qplus = grid::cylinder_stats(u, Cylinder(center, r / 2, grid::CylVariant::Qplus), 0.0);
    const Real denom_lemma = qplus.inf + r * r * opts.C0;
    std::vector<Real> worst;
    for (const Real delta : opts.deltas) {
        if (!(delta > 0 && delta < 0.25)) throw ConfigError("harnack delta must lie in (0, 1/4)");
        Real w = 0.0;
        long used = 0;
        const Real sp_lo = -(1 - 2 * delta) * r;
        const Real sp_hi = (1 - 2 * delta) * r;
        const Real t_lo = center.t - (1 - 4 * delta * delta) * r * r;
        const Real t_hi = center.t - 0.75 * r * r;
        for (int it = 0; it < opts.temporal_positions; ++it) {
            const Real t = t_lo + (t_hi - t_lo) * (it + 0.5) / opts.temporal_positions;
            for (int jy = 0; jy < (g.dim == 2 ? opts.spatial_positions : 1); ++jy)
                for (int jx = 0; jx < opts.spatial_positions; ++jx) {
                    SpaceTimePoint q;
                    q.x[0] = center.x[0] + sp_lo + (sp_hi - sp_lo) * (jx + 0.5) / opts.spatial_positions;
                    if (g.dim == 2)
                        q.x[1] = center.x[1] + sp_lo + (sp_hi - sp_lo) * (jy + 0.5) / opts.spatial_positions;
                    q.t = t;
                    Real lsum = 0.0;
                    long lcount = 0;
                    try {
                        grid::for_each_node(g, Cylinder(q, delta * r), [&](int ix, int iy, int m) {
                            lsum += std::pow(std::max(u.at(ix, iy, m), 0.0), opts.p);
                            ++lcount;
                        });
                    } catch (const EmptyRegionError&) {
                        continue;
                    }
                    if (lcount == 0) continue;
                    const Real local = std::pow(lsum / Real(lcount), 1.0 / opts.p);
                    w = std::max(w, local / denom_lemma);
                    ++used;
                }
        }
        if (used == 0) throw EmptyRegionError("no admissible harnack positions realized");
        worst.push_back(w);
        rep.rows.push_back({delta, w, Real(used)});
    }
    if (worst.size() >= 2) {
        std::vector<Real> inv_delta;
        for (const Real d : opts.deltas) inv_delta.push_back(1.0 / d);
        rep.fitted["m"] = loglog_slope(inv_delta, worst);
    }
    rep.pass = std::isfinite(rep.fitted["ratio1"]) && rep.fitted["pavg_numerator"] <= rep.fitted["sup_numerator"] + 1e-12;
    return rep;
}

} // namespace parobs::estimates
