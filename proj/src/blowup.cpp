#include "parobs/blowup.hpp"

#include <algorithm>
#include <cmath>

#include "parobs/kernels.hpp"

namespace parobs::blowup {

using grid::Grid;
using grid::GridFunction;

grid::Grid default_reference_grid(int dim) {
    return Grid::make(dim, {-1.0, -1.0}, {1.0, 1.0}, 1.0 / 32.0, -1.0, 1.0, 0.125);
}

BlowupSequence make_sequence(const GridFunction& u, const SpaceTimePoint& center, Real r0,
                             Real rho, int K, Real contact_tol, const Grid* ref_grid_in) {
    if (!(rho > 0 && rho < 1)) throw ConfigError("make_sequence needs rho in (0,1)");
    if (K < 1) throw ConfigError("make_sequence needs K >= 1");
    const Real h = u.grid.h;
    const Real r_min = r0 * std::pow(rho, K - 1);
    if (r_min < 8 * h - 1e-12)
        throw RadiusUnderresolvedError("smallest blow-up radius resolves fewer than 8 cells");

    // The center must sit on the free boundary: contact value with positive
    // values nearby.
    const Real uc = u.interp(center.x, center.t);
    if (uc > contact_tol)
        throw Error("blow-up center is not on the free boundary (u(center) above tolerance)");
    const auto stats = grid::cylinder_stats(u, grid::Cylinder(center, 4 * h), contact_tol);
    if (stats.sup <= contact_tol)
        throw Error("blow-up center is interior to the contact set");

    const Grid ref = ref_grid_in ? *ref_grid_in : default_reference_grid(u.grid.dim);
    BlowupSequence seq;
    seq.center = center;
    seq.source_h = h;
    seq.resolution_warning = r_min < 16 * h;
    for (int k = 0; k < K; ++k) {
        const Real r = r0 * std::pow(rho, k);
        seq.radii.push_back(r);
        seq.fields.push_back(grid::rescale(u, center, r, ref));
    }
    return seq;
}

namespace {

struct Slice {
    const GridFunction* v;
    int m0;                // time level closest to t = 0
    std::vector<int> node; // nodes with |x| <= 1
    Real sup_abs;
};

Slice make_slice(const GridFunction& v) {
    const Grid& g = v.grid;
    Slice s{&v, 0, {}, 0.0};
    s.m0 = int(std::lround((0.0 - g.t_begin) / g.dt));
    s.m0 = std::clamp(s.m0, 0, g.nt - 1);
    for (int iy = 0; iy < g.nx[1]; ++iy)
        for (int ix = 0; ix < g.nx[0]; ++ix) {
            const Point p = g.point(ix, iy);
            if (p[0] * p[0] + p[1] * p[1] <= 1.0 + 1e-12) s.node.push_back(g.index(ix, iy));
        }
    for (const int n : s.node)
        s.sup_abs = std::max(s.sup_abs, std::abs(v.v[size_t(s.m0) * size_t(g.nodes()) + size_t(n)]));
    return s;
}

Real slice_value(const Slice& s, int node) {
    return s.v->v[size_t(s.m0) * size_t(s.v->grid.nodes()) + size_t(node)];
}

// Closed-form least squares of v against (e.x)_+^2 on the slice, then the
// relative sup misfit.
std::pair<Real, Real> half_parabola_at(const Slice& s, const std::array<Real, 2>& e) {
    const Grid& g = s.v->grid;
    Real num = 0.0, den = 0.0;
    for (const int n : s.node) {
        const int ix = n % g.nx[0];
        const int iy = n / g.nx[0];
        const Point p = g.point(ix, iy);
        const Real proj = std::max(e[0] * p[0] + e[1] * p[1], 0.0);
        const Real feat = proj * proj;
        num += slice_value(s, n) * feat;
        den += feat * feat;
    }
    const Real a = den > 0 ? num / den : 0.0;
    Real mis = 0.0;
    for (const int n : s.node) {
        const int ix = n % g.nx[0];
        const int iy = n / g.nx[0];
        const Point p = g.point(ix, iy);
        const Real proj = std::max(e[0] * p[0] + e[1] * p[1], 0.0);
        mis = std::max(mis, std::abs(slice_value(s, n) - a * proj * proj));
    }
    return {a, mis / s.sup_abs};
}

} // namespace

Real time_independence_check(const GridFunction& v) {
    const Grid& g = v.grid;
    const int nn = g.nodes();
    return par::max_of(nn, [&](std::ptrdiff_t n) {
        Real lo = v.v[size_t(n)], hi = lo;
        for (int m = 1; m < g.nt; ++m) {
            const Real val = v.v[size_t(m) * size_t(nn) + size_t(n)];
            lo = std::min(lo, val);
            hi = std::max(hi, val);
        }
        return hi - lo;
    });
}

HalfParabolaFit fit_half_parabola(const GridFunction& v) {
    const Slice s = make_slice(v);
    if (s.sup_abs == 0.0) throw DegenerateFieldError("field vanishes on the fit slice");

    HalfParabolaFit best;
    best.residual = std::numeric_limits<Real>::infinity();
    if (v.grid.dim == 1) {
        for (const Real ex : {1.0, -1.0}) {
            const auto [a, res] = half_parabola_at(s, {ex, 0.0});
            if (res < best.residual) best = {a, {ex, 0.0}, res, 0.0};
        }
    } else {
        const int n_dir = 4096;
        std::vector<Real> residuals(n_dir);
        std::vector<Real> coeffs(n_dir);
        par::for_each(n_dir, [&](std::ptrdiff_t k) {
            const Real ang = 2.0 * M_PI * Real(k) / n_dir;
            const auto [a, res] = half_parabola_at(s, {std::cos(ang), std::sin(ang)});
            residuals[size_t(k)] = res;
            coeffs[size_t(k)] = a;
        });
        int kbest = 0;
        for (int k = 1; k < n_dir; ++k)
            if (residuals[size_t(k)] < residuals[size_t(kbest)]) kbest = k;
        // golden-section refinement around the best direction
        const Real step = 2.0 * M_PI / n_dir;
        Real lo = step * (kbest - 1), hi = step * (kbest + 1);
        const Real gr = (std::sqrt(5.0) - 1.0) / 2.0;
        Real c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
        auto res_at = [&](Real ang) { return half_parabola_at(s, {std::cos(ang), std::sin(ang)}).second; };
        Real fc = res_at(c), fd = res_at(d);
        for (int it = 0; it < 48; ++it) {
            if (fc < fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - gr * (hi - lo);
                fc = res_at(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + gr * (hi - lo);
                fd = res_at(d);
            }
        }
        const Real ang = 0.5 * (lo + hi);
        const std::array<Real, 2> e{std::cos(ang), std::sin(ang)};
        const auto [a, res] = half_parabola_at(s, e);
        best = {a, e, res, 0.0};
        if (residuals[size_t(kbest)] < best.residual) {
            const Real ang0 = step * kbest;
            best = {coeffs[size_t(kbest)], {std::cos(ang0), std::sin(ang0)}, residuals[size_t(kbest)], 0.0};
        }
    }
    best.time_oscillation = time_independence_check(v);
    return best;
}

QuadraticFit fit_quadratic(const GridFunction& v, Real fit_tol) {
    const Slice s = make_slice(v);
    if (s.sup_abs == 0.0) throw DegenerateFieldError("field vanishes on the fit slice");
    const Grid& g = v.grid;

    QuadraticFit fit;
    fit.A.dim = g.dim;
    if (g.dim == 1) {
        Real num = 0.0, den = 0.0;
        for (const int n : s.node) {
            const Real x = g.x(0, n % g.nx[0]);
            num += slice_value(s, n) * x * x;
            den += x * x * x * x;
        }
        fit.A.xx = num / den;
    } else {
        // normal equations for features (x^2, 2xy, y^2)
        Real M[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        Real b[3] = {0, 0, 0};
        for (const int n : s.node) {
            const int ix = n % g.nx[0];
            const int iy = n / g.nx[0];
            const Point p = g.point(ix, iy);
            const Real f[3] = {p[0] * p[0], 2 * p[0] * p[1], p[1] * p[1]};
            const Real val = slice_value(s, n);
            for (int i = 0; i < 3; ++i) {
                b[i] += val * f[i];
                for (int j = 0; j < 3; ++j) M[i][j] += f[i] * f[j];
            }
        }
        // Gaussian elimination with partial pivoting on the 3x3 system
        int piv[3] = {0, 1, 2};
        for (int col = 0; col < 3; ++col) {
            int pr = col;
            for (int r = col + 1; r < 3; ++r)
                if (std::abs(M[piv[r]][col]) > std::abs(M[piv[pr]][col])) pr = r;
            std::swap(piv[col], piv[pr]);
            const Real d = M[piv[col]][col];
            if (std::abs(d) < 1e-14) throw DegenerateFieldError("quadratic fit normal equations singular");
            for (int r = col + 1; r < 3; ++r) {
                const Real fct = M[piv[r]][col] / d;
                for (int cc = col; cc < 3; ++cc) M[piv[r]][cc] -= fct * M[piv[col]][cc];
                b[piv[r]] -= fct * b[piv[col]];
            }
        }
        Real sol[3];
        for (int col = 2; col >= 0; --col) {
            Real s2 = b[piv[col]];
            for (int cc = col + 1; cc < 3; ++cc) s2 -= M[piv[col]][cc] * sol[cc];
            sol[col] = s2 / M[piv[col]][col];
        }
        fit.A.xx = sol[0];
        fit.A.xy = sol[1];
        fit.A.yy = sol[2];
    }

    // project negative eigenvalues to zero; large negativity shows up as misfit
    const auto ev = fit.A.eigenvalues();
    const Real ev_min = g.dim == 1 ? fit.A.xx : std::min(ev[0], ev[1]);
    if (ev_min < 0) {
        fit.negativity = -ev_min;
        if (g.dim == 1) {
            fit.A.xx = std::max(fit.A.xx, 0.0);
        } else {
            // eigen-decompose and clip
            const Real mean = 0.5 * (fit.A.xx + fit.A.yy);
            const Real dd = 0.5 * (fit.A.xx - fit.A.yy);
            const Real rad = std::sqrt(dd * dd + fit.A.xy * fit.A.xy);
            const Real l1 = mean - rad, l2 = mean + rad;
            Real vx, vy; // eigenvector of l1
            if (std::abs(fit.A.xy) > 1e-15) {
                vx = l1 - fit.A.yy;
                vy = fit.A.xy;
            } else {
                vx = fit.A.xx <= fit.A.yy ? 1.0 : 0.0;
                vy = fit.A.xx <= fit.A.yy ? 0.0 : 1.0;
            }
            const Real nv = std::sqrt(vx * vx + vy * vy);
            vx /= nv;
            vy /= nv;
            const Real c1 = std::max(l1, 0.0), c2 = std::max(l2, 0.0);
            // A = c1 v v^T + c2 w w^T with w perpendicular to v
            fit.A.xx = c1 * vx * vx + c2 * vy * vy;
            fit.A.xy = c1 * vx * vy - c2 * vx * vy;
            fit.A.yy = c1 * vy * vy + c2 * vx * vx;
        }
        (void)fit_tol; // negativity below fit_tol is clipped silently, larger shows in the residual
    }

    Real mis = 0.0;
    for (const int n : s.node) {
        const int ix = n % g.nx[0];
        const int iy = n / g.nx[0];
        const Point p = g.point(ix, iy);
        Real q = fit.A.xx * p[0] * p[0];
        if (g.dim == 2) q += 2 * fit.A.xy * p[0] * p[1] + fit.A.yy * p[1] * p[1];
        mis = std::max(mis, std::abs(slice_value(s, n) - q));
    }
    fit.residual = mis / s.sup_abs;
    fit.time_oscillation = time_independence_check(v);
    return fit;
}

Classification classify(const BlowupSequence& seq, const std::vector<Real>& densities,
                        const ClassifyThresholds& thr) {
    const int K = int(seq.fields.size());
    if (K < 3) throw ConfigError("classification needs K >= 3 radii");
    if (densities.size() != size_t(K)) throw ConfigError("densities must match the radii");

    Classification cl;
    cl.radii = seq.radii;
    cl.densities = densities;
    for (int k = 0; k < K; ++k) {
        try {
            const auto hf = fit_half_parabola(seq.fields[size_t(k)]);
            cl.half_residuals.push_back(hf.residual);
            if (k == K - 1) cl.half_fit = hf;
        } catch (const DegenerateFieldError&) {
            cl.half_residuals.push_back(std::numeric_limits<Real>::infinity());
        }
        try {
            const auto qf = fit_quadratic(seq.fields[size_t(k)]);
            cl.quad_residuals.push_back(qf.residual);
            if (k == K - 1) cl.quad_fit = qf;
        } catch (const DegenerateFieldError&) {
            cl.quad_residuals.push_back(std::numeric_limits<Real>::infinity());
        }
        cl.time_oscillations.push_back(time_independence_check(seq.fields[size_t(k)]));
    }

    const bool reg_fit = cl.half_residuals[size_t(K - 1)] <= thr.class_tol &&
                         cl.half_residuals[size_t(K - 2)] <= thr.class_tol;
    const bool sing_fit = cl.quad_residuals[size_t(K - 1)] <= thr.class_tol &&
                          cl.quad_residuals[size_t(K - 2)] <= thr.class_tol;
    const Real d_last = densities.back();
    const bool reg_density = d_last >= thr.regular_density_lo && d_last <= thr.regular_density_hi;
    const bool sing_density = d_last <= thr.singular_density_hi;

    const bool regular_ok = reg_fit && reg_density;
    const bool singular_ok = sing_fit && sing_density;
    if (regular_ok && !singular_ok)
        cl.verdict = Verdict::Regular;
    else if (singular_ok && !regular_ok)
        cl.verdict = Verdict::Singular;
    else {
        cl.verdict = Verdict::Undetermined;
        if (regular_ok && singular_ok) cl.note = "conflicting evidence";
        else if (reg_fit && !reg_density) cl.note = "half-parabola fit without density 1/2";
        else if (sing_fit && !sing_density) cl.note = "quadratic fit without vanishing density";
        else cl.note = "no profile fits within tolerance";
    }
    return cl;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Regular: return "Regular";
        case Verdict::Singular: return "Singular";
        case Verdict::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

} // namespace parobs::blowup
