// Timing comparison of the OpenMP cell loops against their serial reference
// paths: assembly and cross-grid transfer/error norm.
#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "polydarcy/assemble.hpp"
#include "polydarcy/dof_map.hpp"
#include "polydarcy/generate.hpp"
#include "polydarcy/runner.hpp"

using namespace polydarcy;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        f();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

} // namespace

int main() {
    RunConfig cfg;
    cfg.inclusion = Inclusion{{0.25, 0.5}, {0.75, 0.5}, 1.0, 1.0};
    LevelSpec coarse{64, 4, 0.4};
    ReferenceSpec fine{128, 5};
    cfg.reference = fine;

    const PolyMesh mesh = build_level_mesh(cfg, coarse);
    const PolyMesh ref_mesh = build_reference_mesh(cfg);
    const DofMap dm = build_dof_map(mesh);
    const DarcyProblem problem = make_problem(cfg);
    const StabilizationParams stab;

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (OpenMP disabled)\n");
#endif
    std::printf("mesh: %d cells, %d edges; reference: %d cells\n\n", mesh.n_cells(),
                mesh.edge_count, ref_mesh.n_cells());

    const int reps = 5;
    const double asm_serial = best_of(reps, [&] { assemble(mesh, dm, problem, stab, false); });
    const double asm_parallel = best_of(reps, [&] { assemble(mesh, dm, problem, stab, true); });

    const SaddleSystem sys = assemble(mesh, dm, problem, stab);
    const DiscreteSolution sol = solve(sys, mesh);

    std::vector<double> transferred;
    const double tr_serial = best_of(reps, [&] {
        transferred = transfer_to_reference(mesh, sol.pressure, ref_mesh, false);
    });
    const double tr_parallel = best_of(reps, [&] {
        transferred = transfer_to_reference(mesh, sol.pressure, ref_mesh, true);
    });

    Eigen::VectorXd pseudo_ref(ref_mesh.n_cells());
    for (int i = 0; i < ref_mesh.n_cells(); ++i)
        pseudo_ref(i) = 0.5 * transferred[i];
    const double err_serial = best_of(reps, [&] {
        relative_l2_error(transferred, pseudo_ref, ref_mesh, false);
    });
    const double err_parallel = best_of(reps, [&] {
        relative_l2_error(transferred, pseudo_ref, ref_mesh, true);
    });

    std::printf("%-22s %10s %10s %8s\n", "kernel", "serial", "openmp", "speedup");
    std::printf("%-22s %9.4fs %9.4fs %7.2fx\n", "assemble", asm_serial, asm_parallel,
                asm_serial / asm_parallel);
    std::printf("%-22s %9.4fs %9.4fs %7.2fx\n", "transfer_to_reference", tr_serial, tr_parallel,
                tr_serial / tr_parallel);
    std::printf("%-22s %9.4fs %9.4fs %7.2fx\n", "relative_l2_error", err_serial, err_parallel,
                err_serial / err_parallel);
    return 0;
}
