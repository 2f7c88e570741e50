#include "parobs/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

#include "parobs/kernels.hpp"

namespace parobs::solver {

using grid::Grid;
using grid::GridFunction;

namespace {

constexpr Real kExpCap = 45.0; // exponent cap keeps beta finite during line search

Real beta_eps(Real z, Real eps) { return std::exp(std::min(-z / eps, kExpCap)); }

struct NodeData {
    std::vector<Real> f;   // source at nodes
    std::vector<Real> phi; // obstacle at nodes
    std::vector<char> interior;
    std::vector<int> interior_idx;
    // control-major diagonal coefficients and offsets at nodes
    int n_controls = 0;
    std::vector<Real> ax, ay, off; // size n_controls * nodes
};

NodeData precompute(const ProblemSpec& spec) {
    const Grid& g = spec.domain;
    const int nn = g.nodes();
    NodeData nd;
    nd.f.resize(size_t(nn));
    nd.phi.resize(size_t(nn));
    nd.interior.resize(size_t(nn));
    for (int iy = 0; iy < g.nx[1]; ++iy)
        for (int ix = 0; ix < g.nx[0]; ++ix) {
            const int i = g.index(ix, iy);
            nd.f[size_t(i)] = spec.source.at(ix, iy);
            nd.phi[size_t(i)] = spec.phi_at(ix, iy);
            nd.interior[size_t(i)] = !g.on_spatial_boundary(ix, iy);
            if (nd.interior[size_t(i)]) nd.interior_idx.push_back(i);
        }
    const auto& controls = spec.op.controls();
    nd.n_controls = int(controls.size());
    nd.ax.resize(size_t(nd.n_controls) * size_t(nn));
    nd.ay.resize(size_t(nd.n_controls) * size_t(nn));
    nd.off.resize(size_t(nd.n_controls) * size_t(nn));
    for (int a = 0; a < nd.n_controls; ++a)
        for (int iy = 0; iy < g.nx[1]; ++iy)
            for (int ix = 0; ix < g.nx[0]; ++ix) {
                const int i = g.index(ix, iy);
                const Point p = g.point(ix, iy);
                const auto A = controls[size_t(a)].coefficient(p);
                nd.ax[size_t(a) * size_t(nn) + size_t(i)] = A.xx;
                nd.ay[size_t(a) * size_t(nn) + size_t(i)] = A.dim == 2 ? A.yy : 0.0;
                nd.off[size_t(a) * size_t(nn) + size_t(i)] = controls[size_t(a)].offset_at(p);
            }
    return nd;
}

// Shared per-step machinery for both the penalized and the complementarity solver.
class Stepper {
public:
    Stepper(const ProblemSpec& spec, const SolverParams& params)
        : spec_(spec), g_(spec.domain), nd_(precompute(spec)), params_(params) {
        const int nn = g_.nodes();
        w_.resize(size_t(nn));
        wprev_.resize(size_t(nn));
        resid_.resize(size_t(nn));
        policy_.assign(size_t(nn), 0);
        contact_.assign(size_t(nn), 0);
        diag_.resize(size_t(nn));
        rhs_.resize(size_t(nn));
        delta_.resize(size_t(nn));
        lower_.resize(size_t(nn));
        upper_.resize(size_t(nn));
        scratch_.resize(size_t(nn));
        h2_ = g_.h * g_.h;
        for (size_t k = 0; k < nd_.ax.size(); ++k)
            max_coeff_ = std::max(max_coeff_, nd_.ax[k] + nd_.ay[k]);
    }

    const Grid& grid() const { return g_; }
    std::vector<Real>& wprev() { return wprev_; }
    std::vector<Real>& w() { return w_; }

    void load_initial() {
        for (int iy = 0; iy < g_.nx[1]; ++iy)
            for (int ix = 0; ix < g_.nx[0]; ++ix)
                wprev_[size_t(g_.index(ix, iy))] = spec_.initial(g_.point(ix, iy));
    }

    void set_boundary(std::vector<Real>& w, Real t) {
        for (int iy = 0; iy < g_.nx[1]; ++iy)
            for (int ix = 0; ix < g_.nx[0]; ++ix) {
                const int i = g_.index(ix, iy);
                if (!nd_.interior[size_t(i)]) w[size_t(i)] = spec_.boundary(g_.point(ix, iy), t);
            }
    }

    // Residuals carry terms of size |w|/dt and |w|/h^2; in double precision
    // they cannot be driven below the roundoff of those terms. The per-step
    // tolerance is newton_tol or that floor, whichever is larger.
    Real effective_tol(const std::vector<Real>& ref) const {
        Real wmax = 0.0;
        for (const Real v : ref) wmax = std::max(wmax, std::abs(v));
        const Real scale = wmax * (1.0 / g_.dt + 2.0 * max_coeff_ / h2_) + 2.0;
        return std::max(params_.newton_tol, 16.0 * std::numeric_limits<Real>::epsilon() * scale);
    }

    // max_alpha of the discrete linear operators at node i for field w.
    Real bellman(const std::vector<Real>& w, int i, int* argmax = nullptr) const {
        const int nn = g_.nodes();
        Real best = -std::numeric_limits<Real>::infinity();
        int arg = 0;
        const Real lapx = second_diff(w, i, 0);
        const Real lapy = g_.dim == 2 ? second_diff(w, i, 1) : 0.0;
        for (int a = 0; a < nd_.n_controls; ++a) {
            const size_t k = size_t(a) * size_t(nn) + size_t(i);
            const Real v = nd_.ax[k] * lapx + nd_.ay[k] * lapy + nd_.off[k];
            if (v > best) {
                best = v;
                arg = a;
            }
        }
        if (argmax) *argmax = arg;
        return best;
    }

    // Penalized residual at converged policy (includes the Bellman max).
    Real penalized_residual_norm(const std::vector<Real>& w, Real dt, Real eps) {
        const auto& idx = nd_.interior_idx;
        return par::max_abs(std::ptrdiff_t(idx.size()), [&](std::ptrdiff_t k) {
            const int i = idx[size_t(k)];
            return (w[size_t(i)] - wprev_[size_t(i)]) / dt - bellman(w, i) - nd_.f[size_t(i)] -
                   beta_eps(w[size_t(i)] - nd_.phi[size_t(i)], eps);
        });
    }

    static std::string step_context(Real t, Real eps) {
        return " (t = " + std::to_string(t) + ", eps = " + std::to_string(eps) + ")";
    }

    // One implicit Euler step of the penalized equation.
    void step_penalized(Real t, Real eps, const Real* warm, SolveReport& rep) {
        const Real dt = g_.dt;
        const int nn = g_.nodes();
        if (warm)
            std::copy(warm, warm + nn, w_.begin());
        else
            w_ = wprev_;
        set_boundary(w_, t);

        int policy_iters = 0;
        int newton_total = 0;
        bool converged = false;
        const Real tol = effective_tol(wprev_);
        rep.effective_tol = std::max(rep.effective_tol, tol);
        std::vector<int> old_policy;
        for (; policy_iters < params_.max_policy; ++policy_iters) {
            update_policy(w_);
            // Damped Newton on the beta term with the policy frozen.
            Real rn = policy_residual_fill(w_, dt, eps);
            int it = 0;
            for (; it < params_.max_newton; ++it) {
                if (rn <= tol) break;
                assemble_jacobian(w_, dt, eps);
                solve_linear(delta_, rhs_, true);
                Real s = 1.0;
                bool accepted = false;
                for (int halving = 0; halving <= 30; ++halving) {
                    scratch_ = w_;
                    const auto& idx = nd_.interior_idx;
                    for (size_t k = 0; k < idx.size(); ++k)
                        scratch_[size_t(idx[k])] += s * delta_[size_t(idx[k])];
                    const Real rn_new = policy_residual_norm(scratch_, dt, eps);
                    if (rn_new < rn) {
                        w_.swap(scratch_);
                        rn = rn_new;
                        accepted = true;
                        break;
                    }
                    s *= 0.5;
                }
                if (!accepted)
                    throw SolverDivergedError("penalty Newton: no descent after 30 halvings" +
                                              step_context(t, eps));
                policy_residual_fill(w_, dt, eps);
            }
            if (rn > tol && it == params_.max_newton)
                throw SolverDivergedError("penalty Newton did not reach tolerance" + step_context(t, eps));
            newton_total += it;
            old_policy = policy_;
            update_policy(w_);
            if (policy_ == old_policy) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw PolicyCycleError("policy iteration exceeded max_policy" + step_context(t, eps));

        const Real res = penalized_residual_norm(w_, dt, eps);
        rep.final_residual = std::max(rep.final_residual, res);
        rep.total_policy_iters += policy_iters + 1;
        rep.total_newton_iters += newton_total;
        rep.max_policy_iters = std::max(rep.max_policy_iters, policy_iters + 1);
        rep.max_newton_iters = std::max(rep.max_newton_iters, newton_total);
        for (int i = 0; i < nn; ++i) {
            rep.max_h_eps = std::max(rep.max_h_eps, beta_eps(w_[size_t(i)] - nd_.phi[size_t(i)], eps));
            rep.dt_monotonicity_violation =
                std::min(rep.dt_monotonicity_violation, (w_[size_t(i)] - wprev_[size_t(i)]) / dt);
        }
    }

    // One implicit Euler step of the complementarity system
    // min(PDE row, w - phi) = 0 via joint (control, branch) policy iteration.
    void step_direct(Real t, SolveReport& rep) {
        const Real dt = g_.dt;
        const int nn = g_.nodes();
        w_ = wprev_;
        set_boundary(w_, t);

        int iters = 0;
        bool converged = false;
        const Real tol = effective_tol(wprev_);
        rep.effective_tol = std::max(rep.effective_tol, tol);
        for (; iters < params_.max_policy; ++iters) {
            update_policy(w_);
            update_branches(w_, dt);
            assemble_direct(w_, dt);
            solve_linear(w_, rhs_, false);
            set_boundary(w_, t);
            const Real rn = complementarity_residual(w_, dt);
            if (rn <= tol) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw PolicyCycleError("complementarity policy iteration exceeded max_policy" +
                                   step_context(t, 0.0));

        rep.final_residual = std::max(rep.final_residual, complementarity_residual(w_, dt));
        rep.total_policy_iters += iters + 1;
        rep.max_policy_iters = std::max(rep.max_policy_iters, iters + 1);
        for (int i = 0; i < nn; ++i)
            rep.dt_monotonicity_violation =
                std::min(rep.dt_monotonicity_violation, (w_[size_t(i)] - wprev_[size_t(i)]) / dt);
    }

    Real complementarity_residual(const std::vector<Real>& w, Real dt) {
        const auto& idx = nd_.interior_idx;
        return par::max_abs(std::ptrdiff_t(idx.size()), [&](std::ptrdiff_t k) {
            const int i = idx[size_t(k)];
            const Real pde = (w[size_t(i)] - wprev_[size_t(i)]) / dt - bellman(w, i) - nd_.f[size_t(i)];
            return std::min(pde, w[size_t(i)] - nd_.phi[size_t(i)]);
        });
    }

private:
    Real second_diff(const std::vector<Real>& w, int i, int axis) const {
        const int stride = axis == 0 ? 1 : g_.nx[0];
        return (w[size_t(i - stride)] - 2 * w[size_t(i)] + w[size_t(i + stride)]) / h2_;
    }

    void update_policy(const std::vector<Real>& w) {
        const auto& idx = nd_.interior_idx;
        par::for_each(std::ptrdiff_t(idx.size()), [&](std::ptrdiff_t k) {
            const int i = idx[size_t(k)];
            int arg;
            bellman(w, i, &arg);
            policy_[size_t(i)] = arg;
        });
    }

    void update_branches(const std::vector<Real>& w, Real dt) {
        const auto& idx = nd_.interior_idx;
        par::for_each(std::ptrdiff_t(idx.size()), [&](std::ptrdiff_t k) {
            const int i = idx[size_t(k)];
            const Real pde = (w[size_t(i)] - wprev_[size_t(i)]) / dt - bellman(w, i) - nd_.f[size_t(i)];
            contact_[size_t(i)] = (w[size_t(i)] - nd_.phi[size_t(i)]) < pde ? 1 : 0;
        });
    }

    // Residual with frozen policy, written into resid_; returns its max norm.
    Real policy_residual_fill(const std::vector<Real>& w, Real dt, Real eps) {
        const int nn = g_.nodes();
        const auto& idx = nd_.interior_idx;
        par::for_each(std::ptrdiff_t(idx.size()), [&](std::ptrdiff_t k) {
            const int i = idx[size_t(k)];
            const size_t kk = size_t(policy_[size_t(i)]) * size_t(nn) + size_t(i);
            Real lin = nd_.ax[kk] * second_diff(w, i, 0) + nd_.off[kk];
            if (g_.dim == 2) lin += nd_.ay[kk] * second_diff(w, i, 1);
            resid_[size_t(i)] = (w[size_t(i)] - wprev_[size_t(i)]) / dt - lin - nd_.f[size_t(i)] -
                                beta_eps(w[size_t(i)] - nd_.phi[size_t(i)], eps);
        });
        return par::max_abs(std::ptrdiff_t(idx.size()),
                            [&](std::ptrdiff_t k) { return resid_[size_t(idx[size_t(k)])]; });
    }

    Real policy_residual_norm(const std::vector<Real>& w, Real dt, Real eps) {
        const int nn = g_.nodes();
        const auto& idx = nd_.interior_idx;
        return par::max_abs(std::ptrdiff_t(idx.size()), [&](std::ptrdiff_t k) {
            const int i = idx[size_t(k)];
            const size_t kk = size_t(policy_[size_t(i)]) * size_t(nn) + size_t(i);
            Real lin = nd_.ax[kk] * second_diff(w, i, 0) + nd_.off[kk];
            if (g_.dim == 2) lin += nd_.ay[kk] * second_diff(w, i, 1);
            return (w[size_t(i)] - wprev_[size_t(i)]) / dt - lin - nd_.f[size_t(i)] -
                   beta_eps(w[size_t(i)] - nd_.phi[size_t(i)], eps);
        });
    }

    // Newton system J delta = -resid with frozen policy; identity rows at the boundary.
    void assemble_jacobian(const std::vector<Real>& w, Real dt, Real eps) {
        const int nn = g_.nodes();
        par::for_each(nn, [&](std::ptrdiff_t i) {
            if (!nd_.interior[size_t(i)]) {
                diag_[size_t(i)] = 1.0;
                lower_[size_t(i)] = upper_[size_t(i)] = 0.0;
                rhs_[size_t(i)] = 0.0;
                return;
            }
            const size_t kk = size_t(policy_[size_t(i)]) * size_t(nn) + size_t(i);
            const Real ax = nd_.ax[kk];
            const Real ay = nd_.ay[kk];
            const Real b = beta_eps(w[size_t(i)] - nd_.phi[size_t(i)], eps);
            Real d = 1.0 / dt + 2.0 * ax / h2_ + b / eps;
            if (g_.dim == 2) d += 2.0 * ay / h2_;
            diag_[size_t(i)] = d;
            lower_[size_t(i)] = -ax / h2_;
            upper_[size_t(i)] = -ax / h2_;
            rhs_[size_t(i)] = -resid_[size_t(i)];
        });
    }

    // Linear system of the complementarity step in w-form.
    void assemble_direct(const std::vector<Real>& w, Real dt) {
        const int nn = g_.nodes();
        par::for_each(nn, [&](std::ptrdiff_t i) {
            if (!nd_.interior[size_t(i)]) {
                diag_[size_t(i)] = 1.0;
                lower_[size_t(i)] = upper_[size_t(i)] = 0.0;
                rhs_[size_t(i)] = w[size_t(i)]; // boundary already holds g
                return;
            }
            if (contact_[size_t(i)]) {
                diag_[size_t(i)] = 1.0;
                lower_[size_t(i)] = upper_[size_t(i)] = 0.0;
                rhs_[size_t(i)] = nd_.phi[size_t(i)];
                return;
            }
            const size_t kk = size_t(policy_[size_t(i)]) * size_t(nn) + size_t(i);
            const Real ax = nd_.ax[kk];
            const Real ay = nd_.ay[kk];
            Real d = 1.0 / dt + 2.0 * ax / h2_;
            if (g_.dim == 2) d += 2.0 * ay / h2_;
            diag_[size_t(i)] = d;
            lower_[size_t(i)] = -ax / h2_;
            upper_[size_t(i)] = -ax / h2_;
            rhs_[size_t(i)] = wprev_[size_t(i)] / dt + nd_.f[size_t(i)] + nd_.off[kk];
        });
    }

    // 1D: Thomas; 2D: red-black Gauss-Seidel (the system is an M-matrix).
    void solve_linear(std::vector<Real>& x, const std::vector<Real>& b, bool delta_form) {
        if (g_.dim == 1) {
            thomas(x, b);
            return;
        }
        rbgs(x, b, delta_form);
    }

    void thomas(std::vector<Real>& x, const std::vector<Real>& b) {
        const int n = g_.nx[0];
        cp_.resize(size_t(n));
        dp_.resize(size_t(n));
        cp_[0] = 0.0;
        dp_[0] = b[0] / diag_[0];
        for (int i = 1; i < n; ++i) {
            const Real m = diag_[size_t(i)] - lower_[size_t(i)] * cp_[size_t(i - 1)];
            cp_[size_t(i)] = upper_[size_t(i)] / m;
            dp_[size_t(i)] = (b[size_t(i)] - lower_[size_t(i)] * dp_[size_t(i - 1)]) / m;
        }
        x[size_t(n - 1)] = dp_[size_t(n - 1)];
        for (int i = n - 2; i >= 0; --i)
            x[size_t(i)] = dp_[size_t(i)] - cp_[size_t(i)] * x[size_t(i + 1)];
    }

    void rbgs(std::vector<Real>& x, const std::vector<Real>& b, bool delta_form) {
        const int nn = g_.nodes();
        const int nx0 = g_.nx[0];
        if (delta_form) std::fill(x.begin(), x.end(), 0.0);
        // In w-form the unit rows (boundary/contact) are exact after one sweep.
        const Real tol = std::max(params_.newton_tol * 0.05, 1e-14);
        const int max_sweeps = 100000;
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            for (int color = 0; color < 2; ++color) {
                par::for_each(nn, [&](std::ptrdiff_t i) {
                    const int ix = int(i) % nx0;
                    const int iy = int(i) / nx0;
                    if (((ix + iy) & 1) != color) return;
                    Real s = b[size_t(i)];
                    if (lower_[size_t(i)] != 0.0) {
                        s -= lower_[size_t(i)] * (x[size_t(i - 1)] + x[size_t(i + 1)]);
                        const size_t kk = size_t(policy_[size_t(i)]) * size_t(nn) + size_t(i);
                        const Real ay = nd_.ay[kk];
                        s += ay / h2_ * (x[size_t(i - nx0)] + x[size_t(i + nx0)]);
                    }
                    x[size_t(i)] = s / diag_[size_t(i)];
                });
            }
            const Real res = par::max_abs(nn, [&](std::ptrdiff_t i) {
                Real ax_sum = diag_[size_t(i)] * x[size_t(i)];
                if (lower_[size_t(i)] != 0.0) {
                    ax_sum += lower_[size_t(i)] * (x[size_t(i - 1)] + x[size_t(i + 1)]);
                    const size_t kk = size_t(policy_[size_t(i)]) * size_t(nn) + size_t(i);
                    ax_sum -= nd_.ay[kk] / h2_ * (x[size_t(i - nx0)] + x[size_t(i + nx0)]);
                }
                return ax_sum - b[size_t(i)];
            });
            if (res <= tol) return;
        }
        throw SolverDivergedError("Gauss-Seidel did not converge");
    }

    const ProblemSpec& spec_;
    const Grid& g_;
    NodeData nd_;
    SolverParams params_;
    Real h2_ = 0.0;
    Real max_coeff_ = 0.0;

    std::vector<Real> w_, wprev_, resid_, diag_, rhs_, delta_, lower_, upper_, scratch_, cp_, dp_;
    std::vector<int> policy_;
    std::vector<char> contact_;
};

void validate_spec(const ProblemSpec& spec) {
    if (!spec.op.solver_compatible())
        throw ConfigError("solver requires constant diagonal controls (plus offsets)");
    if (spec.c0 <= 0) throw ConfigError("c0 must be positive");
    if (spec.source.max_value() > -spec.c0 + 1e-12)
        throw NonUniformSourceError("source violates f <= -c0");
    const Grid& g = spec.domain;
    for (int iy = 0; iy < g.nx[1]; ++iy)
        for (int ix = 0; ix < g.nx[0]; ++ix) {
            if (!g.on_spatial_boundary(ix, iy)) continue;
            const Point p = g.point(ix, iy);
            const Real phi = spec.phi_at(ix, iy);
            for (int m = 0; m < g.nt; ++m)
                if (spec.boundary(p, g.t(m)) < phi - 1e-12)
                    throw ConfigError("boundary data must dominate the obstacle (g >= phi)");
            if (std::abs(spec.initial(p) - spec.boundary(p, g.t_begin)) > 1e-7)
                throw ConfigError("initial and boundary data are inconsistent at corners");
        }
    for (int iy = 0; iy < g.nx[1]; ++iy)
        for (int ix = 0; ix < g.nx[0]; ++ix)
            if (spec.initial(g.point(ix, iy)) < spec.phi_at(ix, iy) - 1e-12)
                throw ConfigError("initial data must dominate the obstacle");
}

} // namespace

ProblemSpec ProblemSpec::make(operators::BellmanOperator op, grid::Grid domain,
                              grid::SpatialField source, Real c0,
                              std::function<Real(Point, Real)> boundary,
                              std::function<Real(Point)> initial,
                              std::optional<grid::SpatialField> obstacle) {
    ProblemSpec spec{std::move(op), domain, std::move(source), c0,
                     std::move(boundary), std::move(initial), std::move(obstacle)};
    validate_spec(spec);
    return spec;
}

void PenaltySchedule::validate(const Grid& g) const {
    if (epsilons.empty()) throw ConfigError("penalty schedule is empty");
    const Real floor = kappa_eps * g.h * g.h;
    Real prev = std::numeric_limits<Real>::infinity();
    for (const Real e : epsilons) {
        if (e <= 0) throw ConfigError("penalty epsilon must be positive");
        if (e >= prev) throw ConfigError("penalty epsilons must be strictly decreasing");
        if (e < floor - 1e-15)
            throw ConfigError("penalty epsilon below the grid-resolved floor kappa_eps*h^2");
        prev = e;
    }
}

std::pair<GridFunction, SolveReport>
solve_penalized(const ProblemSpec& spec, Real epsilon, const SolverParams& params,
                const GridFunction* warm_start) {
    const auto t_start = std::chrono::steady_clock::now();
    const Grid& g = spec.domain;
    if (warm_start && (warm_start->grid.nodes() != g.nodes() || warm_start->grid.nt != g.nt))
        throw ConfigError("warm start grid mismatch");

    Stepper st(spec, params);
    st.load_initial();
    GridFunction out(g);
    out.set_level(0, st.wprev());

    SolveReport rep;
    rep.epsilon = epsilon;
    rep.steps = g.nt - 1;
    for (int m = 1; m < g.nt; ++m) {
        const Real* warm = warm_start ? warm_start->level(m) : nullptr;
        st.step_penalized(g.t(m), epsilon, warm, rep);
        out.set_level(m, st.w());
        st.wprev() = st.w();
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {std::move(out), rep};
}

GridFunction solve_obstacle_direct(const ProblemSpec& spec, const SolverParams& params,
                                   SolveReport* report) {
    const auto t_start = std::chrono::steady_clock::now();
    const Grid& g = spec.domain;
    Stepper st(spec, params);
    st.load_initial();
    GridFunction out(g);
    out.set_level(0, st.wprev());

    SolveReport rep;
    rep.steps = g.nt - 1;
    for (int m = 1; m < g.nt; ++m) {
        st.step_direct(g.t(m), rep);
        out.set_level(m, st.w());
        st.wprev() = st.w();
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (report) *report = rep;
    return out;
}

ContinuationResult continuation_solve(const ProblemSpec& spec, const PenaltySchedule& schedule,
                                      bool record_oracle_gap) {
    schedule.validate(spec.domain);
    ContinuationResult res;
    if (record_oracle_gap) res.direct = solve_obstacle_direct(spec, schedule.params);

    std::optional<GridFunction> prev;
    for (const Real eps : schedule.epsilons) {
        auto [w, rep] = solve_penalized(spec, eps, schedule.params, prev ? &*prev : nullptr);
        if (record_oracle_gap) {
            Real gap = 0.0;
            for (size_t i = 0; i < w.v.size(); ++i)
                gap = std::max(gap, std::abs(w.v[i] - res.direct->v[i]));
            res.oracle_gaps.push_back(gap);
        }
        res.reports.push_back(rep);
        prev = std::move(w);
    }

    res.u = std::move(*prev);
    const Grid& g = spec.domain;
    const int nn = g.nodes();
    const Real clip = 10.0 * schedule.params.newton_tol;
    for (int m = 0; m < g.nt; ++m)
        for (int iy = 0; iy < g.nx[1]; ++iy)
            for (int ix = 0; ix < g.nx[0]; ++ix) {
                const size_t k = size_t(m) * size_t(nn) + size_t(g.index(ix, iy));
                Real val = res.u.v[k] - spec.phi_at(ix, iy);
                if (std::abs(val) <= clip) val = 0.0;
                res.u.v[k] = val;
            }
    return res;
}

} // namespace parobs::solver
