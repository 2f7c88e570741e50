#include "parobs/operators.hpp"

#include <algorithm>
#include <cmath>

namespace parobs::operators {

EllipticityBounds::EllipticityBounds(Real lam, Real Lam) : lambda(lam), Lambda(Lam) {
    if (!(0 < lambda && lambda <= Lambda))
        throw ConfigError("ellipticity bounds require 0 < lambda <= Lambda");
}

std::array<Real, 2> SymMat::eigenvalues() const {
    if (dim == 1) return {xx, 0.0};
    const Real mean = 0.5 * (xx + yy);
    const Real d = 0.5 * (xx - yy);
    const Real rad = std::sqrt(d * d + xy * xy);
    return {mean - rad, mean + rad};
}

Real SymMat::spectral_norm() const {
    const auto ev = eigenvalues();
    return dim == 1 ? std::abs(xx) : std::max(std::abs(ev[0]), std::abs(ev[1]));
}

BellmanOperator::BellmanOperator(int dim, EllipticityBounds bounds, std::vector<Control> controls)
    : dim_(dim), bounds_(bounds), controls_(std::move(controls)) {
    if (controls_.empty()) throw ConfigError("Bellman operator needs at least one control");
    for (const auto& c : controls_) {
        if (c.coeff || c.offset) x_dependent_ = true;
        if (c.coeff || !c.A.is_diagonal()) all_constant_diagonal_ = false;
    }
}

BellmanOperator::Evaluation BellmanOperator::evaluate(const SymMat& m, const Point& x) const {
    Real best = -std::numeric_limits<Real>::infinity();
    int arg = 0;
    for (size_t a = 0; a < controls_.size(); ++a) {
        const Real v = controls_[a].coefficient(x).contract(m) + controls_[a].offset_at(x);
        if (v > best) {
            best = v;
            arg = int(a);
        }
    }
    return {best, arg};
}

BellmanOperator linear_operator(int dim, const SymMat& a) {
    const auto ev = a.eigenvalues();
    const Real lo = dim == 1 ? a.xx : std::min(ev[0], ev[1]);
    const Real hi = dim == 1 ? a.xx : std::max(ev[0], ev[1]);
    return linear_operator(dim, a, EllipticityBounds(lo, hi));
}

BellmanOperator linear_operator(int dim, const SymMat& a, EllipticityBounds bounds) {
    Control c;
    c.A = a;
    return BellmanOperator(dim, bounds, {c});
}

BellmanOperator pucci_diagonal(int dim, EllipticityBounds bounds) {
    std::vector<Control> controls;
    if (dim == 1) {
        controls.push_back({SymMat::diag1(bounds.lambda), nullptr, nullptr});
        controls.push_back({SymMat::diag1(bounds.Lambda), nullptr, nullptr});
    } else {
        for (const Real a : {bounds.lambda, bounds.Lambda})
            for (const Real b : {bounds.lambda, bounds.Lambda})
                controls.push_back({SymMat::diag2(a, b), nullptr, nullptr});
    }
    return BellmanOperator(dim, bounds, std::move(controls));
}

Real pucci_value(const EllipticityBounds& bounds, const SymMat& m) {
    Real s = 0.0;
    const auto ev = m.eigenvalues();
    const int n = m.dim;
    for (int i = 0; i < n; ++i) {
        const Real e = n == 1 ? m.xx : ev[size_t(i)];
        s += e >= 0 ? bounds.Lambda * e : bounds.lambda * e;
    }
    return s;
}

ObstacleTransformResult obstacle_transform(const BellmanOperator& ftilde, const grid::SpatialField& phi) {
    if (ftilde.x_dependent())
        throw ConfigError("obstacle transform expects an x-independent operator");
    const int dim = ftilde.dim();

    auto source = phi; // same layout
    for (int iy = 0; iy < phi.nx[1]; ++iy)
        for (int ix = 0; ix < phi.nx[0]; ++ix) {
            const auto hess = phi.hessian(ix, iy);
            SymMat d2{dim, hess[0], hess[1], hess[2]};
            source.v[size_t(phi.index(ix, iy))] = ftilde.value(d2, phi.point(ix, iy));
        }
    const Real fmax = source.max_value();
    if (fmax >= 0.0)
        throw NonUniformSourceError("transform source is not uniformly negative (c0 <= 0)");
    const Real c0 = -fmax;

    // Per-control offsets c_a(x) = A_a : D^2phi(x) - f(x); max_a c_a = 0.
    std::vector<Control> controls;
    auto src = std::make_shared<grid::SpatialField>(source);
    auto ph = std::make_shared<grid::SpatialField>(phi);
    for (const auto& base : ftilde.controls()) {
        Control c;
        c.A = base.A;
        const SymMat a = base.A;
        c.offset = [a, src, ph, dim](const Point& p) {
            // Nearest node; offsets are smooth fields sampled at solver nodes.
            const int ix = std::clamp(int(std::round((p[0] - ph->lo[0]) / ph->h)), 0, ph->nx[0] - 1);
            const int iy = dim == 2 ? std::clamp(int(std::round((p[1] - ph->lo[1]) / ph->h)), 0, ph->nx[1] - 1)
                                    : 0;
            const auto hess = ph->hessian(ix, iy);
            SymMat d2{dim, hess[0], hess[1], hess[2]};
            return a.contract(d2) - src->at(ix, iy);
        };
        controls.push_back(std::move(c));
    }
    BellmanOperator transformed(dim, ftilde.bounds(), std::move(controls));
    return ObstacleTransformResult{std::move(transformed), std::move(source), phi, c0};
}

EllipticityReport verify_ellipticity(const BellmanOperator& op, int sample_count, uint64_t seed) {
    if (sample_count < 1) throw ConfigError("verify_ellipticity needs sample_count >= 1");
    Rng rng(seed);
    const int dim = op.dim();
    EllipticityReport rep;
    rep.samples = sample_count;
    rep.min_trace_quotient = std::numeric_limits<Real>::infinity();
    rep.max_trace_quotient = -std::numeric_limits<Real>::infinity();
    rep.min_spectral_quotient = std::numeric_limits<Real>::infinity();
    rep.max_spectral_quotient = -std::numeric_limits<Real>::infinity();

    auto rand_sym = [&]() {
        SymMat m;
        m.dim = dim;
        m.xx = rng.uniform(-1, 1);
        if (dim == 2) {
            m.yy = rng.uniform(-1, 1);
            m.xy = rng.uniform(-1, 1);
        }
        return m;
    };
    auto rand_psd_unit_trace = [&]() {
        // B^T B for a random B, then normalize the trace to 1.
        SymMat n;
        n.dim = dim;
        if (dim == 1) {
            n.xx = 1.0;
            return n;
        }
        const Real b11 = rng.uniform(-1, 1), b12 = rng.uniform(-1, 1);
        const Real b21 = rng.uniform(-1, 1), b22 = rng.uniform(-1, 1);
        n.xx = b11 * b11 + b21 * b21;
        n.xy = b11 * b12 + b21 * b22;
        n.yy = b12 * b12 + b22 * b22;
        const Real tr = n.xx + n.yy;
        if (tr < 1e-12) {
            n.xx = 0.5;
            n.yy = 0.5;
            n.xy = 0.0;
            return n;
        }
        n.xx /= tr;
        n.xy /= tr;
        n.yy /= tr;
        return n;
    };

    const Real lam = op.bounds().lambda;
    const Real Lam = op.bounds().Lambda;
    const Real tol = 1e-9;
    for (int s = 0; s < sample_count; ++s) {
        const SymMat m = rand_sym();
        const SymMat n = rand_psd_unit_trace();
        Point x;
        x[0] = rng.uniform(-1, 1);
        if (dim == 2) x[1] = rng.uniform(-1, 1);
        SymMat mn = m;
        mn.xx += n.xx;
        mn.xy += n.xy;
        mn.yy += n.yy;
        const Real q = op.value(mn, x) - op.value(m, x); // tr(N) = 1
        rep.min_trace_quotient = std::min(rep.min_trace_quotient, q);
        rep.max_trace_quotient = std::max(rep.max_trace_quotient, q);
        const Real sq = q / n.spectral_norm();
        rep.min_spectral_quotient = std::min(rep.min_spectral_quotient, sq);
        rep.max_spectral_quotient = std::max(rep.max_spectral_quotient, sq);
        if (q < lam - tol || q > Lam + tol) ++rep.violations;
    }
    rep.pass = rep.violations == 0;
    return rep;
}

} // namespace parobs::operators
