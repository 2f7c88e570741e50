// Timing comparison between the serial reference loops and the OpenMP kernels
// on the hot paths: finite-difference fields, rescaling, reductions, and a
// full penalized solve.
#include <chrono>
#include <cmath>
#include <cstdio>

#include "parobs/blowup.hpp"
#include "parobs/grid.hpp"
#include "parobs/kernels.hpp"
#include "parobs/solver.hpp"

using namespace parobs;
using grid::Grid;
using grid::GridFunction;

namespace {

double time_of(const std::function<void()>& fn, int repeats) {
    fn(); // warm up
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / repeats;
}

void row(const char* name, double serial, double parallel) {
    std::printf("%-28s %10.4f ms %10.4f ms %8.2fx\n", name, serial * 1e3, parallel * 1e3,
                parallel > 0 ? serial / parallel : 0.0);
}

} // namespace

int main() {
    std::printf("threads available: %d (OpenMP %s)\n", par::max_threads(),
#ifdef PAROBS_HAVE_OPENMP
                "enabled"
#else
                "disabled"
#endif
    );
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    const auto g2 = Grid::make(2, {-1.0, -1.0}, {1.0, 1.0}, 1.0 / 192.0, 0.0, 0.2, 0.0125);
    const auto u2 = GridFunction::from_function(g2, [](Point p, Real t) {
        return std::sin(4 * p[0]) * std::cos(3 * p[1]) + t + 2.0;
    });

    auto bench = [&](const char* name, const std::function<void()>& fn, int repeats) {
        par::enabled() = false;
        const double s = time_of(fn, repeats);
        par::enabled() = true;
        const double p = time_of(fn, repeats);
        row(name, s, p);
    };

    bench("finite_differences 385^2", [&] { grid::finite_differences(u2); }, 3);
    bench("max_abs reduction", [&] { (void)u2.max_abs(); }, 20);

    const auto ref = blowup::default_reference_grid(2);
    SpaceTimePoint c;
    c.t = 0.1;
    bench("rescale to Q_1", [&] { grid::rescale(u2, c, 0.25, ref); }, 10);

    {
        const Real h = 1.0 / 256.0;
        const auto g = Grid::make(1, {-1.0, 0.0}, {1.0, 0.0}, h, 0.0, 64 * h * h, h * h);
        auto make_spec = [&]() {
            auto source = grid::SpatialField::from_function(g, [](Point) { return -1.0; });
            return solver::ProblemSpec::make(
                operators::linear_operator(1, operators::SymMat::diag1(1.0)), g, std::move(source),
                1.0, [](Point p, Real) { return 0.5 * std::max(p[0], 0.0) * std::max(p[0], 0.0); },
                [](Point p) { return 0.5 * std::max(p[0], 0.0) * std::max(p[0], 0.0); });
        };
        solver::SolverParams params;
        bench("penalized solve 64 steps",
              [&] { solver::solve_penalized(make_spec(), 1e-3, params); }, 2);
    }
    return 0;
}
