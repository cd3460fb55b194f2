#include "polydarcy/assemble.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "polydarcy/errors.hpp"

namespace polydarcy {

SaddleSystem assemble(const PolyMesh& mesh, const DofMap& dm, const DarcyProblem& problem,
                      const StabilizationParams& stab, bool parallel) {
#ifndef _OPENMP
    (void)parallel;
#endif
    problem.permeability.validate();

    const int n_cells = mesh.n_cells();
    SaddleSystem sys;
    sys.n_u = dm.n_velocity;
    sys.n_p = dm.n_pressure;
    sys.rhs_u = Eigen::VectorXd::Zero(sys.n_u);
    sys.rhs_p = Eigen::VectorXd::Zero(sys.n_p);

    // Per-cell slots in the shared triplet arrays keep the assembly order
    // (and therefore the summation order in setFromTriplets) independent of
    // the thread count.
    std::vector<std::size_t> a_offset(n_cells + 1, 0);
    std::vector<std::size_t> b_offset(n_cells + 1, 0);
    for (int c = 0; c < n_cells; ++c) {
        const std::size_t n = mesh.cells[c].loop.size();
        a_offset[c + 1] = a_offset[c] + n * n;
        b_offset[c + 1] = b_offset[c] + n;
    }
    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> a_trips(a_offset[n_cells]);
    std::vector<Trip> b_trips(b_offset[n_cells]);

    std::string first_error;

#pragma omp parallel for schedule(dynamic, 64) if (parallel)
    for (int c = 0; c < n_cells; ++c) {
        try {
            const CellDofGeometry g = dof_geometry(mesh, c);
            const LocalVem lv = build_local_vem(g, problem.permeability, stab);
            const CellRhs rhs = rhs_contributions(mesh, c, problem.boundary, problem.source);

            const auto& loop = mesh.cells[c].loop;
            const int n = static_cast<int>(loop.size());
            std::vector<int> gdof(n);
            std::vector<double> sign(n);
            for (int j = 0; j < n; ++j) {
                gdof[j] = dm.velocity_dof(mesh, loop[j]);
                sign[j] = dm.orientation_sign[loop[j]];
            }

            std::size_t slot = a_offset[c];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    a_trips[slot++] = Trip(gdof[i], gdof[j], sign[i] * sign[j] * lv.A_h(i, j));
            slot = b_offset[c];
            const int prow = dm.cell_dof[c];
            for (int j = 0; j < n; ++j)
                b_trips[slot++] = Trip(prow, gdof[j], sign[j] * lv.B_div(j));

            // Natural boundary terms live on un-twinned edges only, so each
            // velocity rhs entry has exactly one writer.
            for (int j = 0; j < n; ++j)
                if (rhs.velocity(j) != 0.0)
                    sys.rhs_u(gdof[j]) = sign[j] * rhs.velocity(j);
            sys.rhs_p(prow) = rhs.pressure;
        } catch (const std::exception& e) {
#pragma omp critical
            if (first_error.empty())
                first_error = "cell " + std::to_string(c) + ": " + e.what();
        }
    }
    if (!first_error.empty())
        throw MeshError("assembly failed: " + first_error);

    sys.A.resize(sys.n_u, sys.n_u);
    sys.A.setFromTriplets(a_trips.begin(), a_trips.end());
    sys.B.resize(sys.n_p, sys.n_u);
    sys.B.setFromTriplets(b_trips.begin(), b_trips.end());
    sys.A.makeCompressed();
    sys.B.makeCompressed();
    return sys;
}

void write_matrix_market(const SaddleSystem& sys, const std::string& path) {
    std::ofstream os(path);
    if (!os)
        throw SolverError("cannot open " + path + " for writing");
    const int n = sys.n_u + sys.n_p;
    std::size_t nnz = sys.A.nonZeros() + 2 * static_cast<std::size_t>(sys.B.nonZeros());
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << "% saddle-point block system [[A, B^T], [B, 0]]\n";
    os << n << " " << n << " " << nnz << "\n";
    char buf[64];
    auto emit = [&](int r, int c, double v) {
        std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", r + 1, c + 1, v);
        os << buf;
    };
    for (int k = 0; k < sys.A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, k); it; ++it)
            emit(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int k = 0; k < sys.B.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.B, k); it; ++it) {
            emit(static_cast<int>(it.row()) + sys.n_u, static_cast<int>(it.col()), it.value());
            emit(static_cast<int>(it.col()), static_cast<int>(it.row()) + sys.n_u, it.value());
        }
    if (!os)
        throw SolverError("write failed for " + path);
}

} // namespace polydarcy
