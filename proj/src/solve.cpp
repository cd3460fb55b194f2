#include "polydarcy/solve.hpp"

#include <cstdio>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "polydarcy/errors.hpp"

namespace polydarcy {

namespace {

Eigen::SparseMatrix<double> block_matrix(const SaddleSystem& sys, bool gauge) {
    const int n = sys.n_u + sys.n_p + (gauge ? 1 : 0);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(sys.A.nonZeros() + 2 * sys.B.nonZeros() + (gauge ? sys.n_p : 0));
    for (int k = 0; k < sys.A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, k); it; ++it)
            trips.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < sys.B.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.B, k); it; ++it) {
            trips.emplace_back(sys.n_u + it.row(), it.col(), it.value());
            trips.emplace_back(it.col(), sys.n_u + it.row(), it.value());
        }
    if (gauge) {
        // Lagrange multiplier enforcing a zero pressure mean (weights 1 per
        // cell dof; adequate as a gauge for otherwise singular systems).
        for (int p = 0; p < sys.n_p; ++p) {
            trips.emplace_back(n - 1, sys.n_u + p, 1.0);
            trips.emplace_back(sys.n_u + p, n - 1, 1.0);
        }
    }
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(trips.begin(), trips.end());
    M.makeCompressed();
    return M;
}

double block_residual(const SaddleSystem& sys, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& p) {
    const Eigen::VectorXd r_u = sys.A * u + sys.B.transpose() * p - sys.rhs_u;
    const Eigen::VectorXd r_p = sys.B * u - sys.rhs_p;
    return std::sqrt(r_u.squaredNorm() + r_p.squaredNorm());
}

void check_residual(const SaddleSystem& sys, const SolveOptions& opts, double res,
                    const char* strategy) {
    const double rhs_norm = std::sqrt(sys.rhs_u.squaredNorm() + sys.rhs_p.squaredNorm());
    const double bound = rhs_norm > 0.0 ? opts.rel_tol * rhs_norm : opts.abs_tol;
    if (!(res <= bound)) {
        char msg[160];
        std::snprintf(msg, sizeof(msg), "%s solve did not reach the requested residual: %.3e > %.3e",
                      strategy, res, bound);
        throw SolverError(msg);
    }
}

void solve_direct(const SaddleSystem& sys, const SolveOptions& opts, Eigen::VectorXd& u,
                  Eigen::VectorXd& p) {
    const Eigen::SparseMatrix<double> M = block_matrix(sys, opts.mean_zero_gauge);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success)
        throw SolverError("direct factorization failed (singular or rank-deficient system)");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M.rows());
    rhs.head(sys.n_u) = sys.rhs_u;
    rhs.segment(sys.n_u, sys.n_p) = sys.rhs_p;
    const Eigen::VectorXd x = lu.solve(rhs);
    u = x.head(sys.n_u);
    p = x.segment(sys.n_u, sys.n_p);
}

// Conjugate gradients on S = B A^{-1} B^T (SPD for full-rank B), with A
// applied through its Cholesky factorization. Deterministic for a fixed
// iteration order.
void solve_schur(const SaddleSystem& sys, const SolveOptions& opts, Eigen::VectorXd& u,
                 Eigen::VectorXd& p) {
    if (opts.mean_zero_gauge)
        throw SolverError("mean-zero gauge requires the direct solver");
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
    llt.compute(sys.A);
    if (llt.info() != Eigen::Success)
        throw SolverError("schur: Cholesky factorization of the velocity block failed");

    const auto apply_S = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return sys.B * llt.solve(sys.B.transpose() * x);
    };

    const Eigen::VectorXd rhs_s = sys.B * llt.solve(sys.rhs_u) - sys.rhs_p;
    p = Eigen::VectorXd::Zero(sys.n_p);
    Eigen::VectorXd r = rhs_s;
    Eigen::VectorXd d = r;
    double rr = r.squaredNorm();
    // The recombined block residual is dominated by the Schur residual, so
    // aim one margin below the accepted tolerance (and no further than
    // attainable).
    const double block_rhs_norm = std::sqrt(sys.rhs_u.squaredNorm() + sys.rhs_p.squaredNorm());
    const double stop =
        std::max(1e-14 * std::sqrt(rhs_s.squaredNorm()), 0.05 * opts.rel_tol * block_rhs_norm);
    int it = 0;
    while (std::sqrt(rr) > stop && it < opts.max_iterations) {
        const Eigen::VectorXd Sd = apply_S(d);
        const double dSd = d.dot(Sd);
        if (!(dSd > 0.0))
            throw SolverError("schur: Schur complement not positive definite (rank-deficient B)");
        const double a = rr / dSd;
        p += a * d;
        r -= a * Sd;
        const double rr_new = r.squaredNorm();
        d = r + (rr_new / rr) * d;
        rr = rr_new;
        ++it;
    }
    if (it >= opts.max_iterations && std::sqrt(rr) > stop) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "schur: CG did not converge in %d iterations (achieved Schur residual %.3e)",
                      opts.max_iterations, std::sqrt(rr));
        throw SolverError(msg);
    }
    u = llt.solve(sys.rhs_u - sys.B.transpose() * p);
}

} // namespace

DiscreteSolution solve(const SaddleSystem& sys, const PolyMesh& mesh, const SolveOptions& opts) {
    DiscreteSolution sol;
    sol.mesh_size_h = mesh.mesh_size_h;

    switch (opts.kind) {
        case SolverKind::direct:
            solve_direct(sys, opts, sol.flux, sol.pressure);
            break;
        case SolverKind::schur:
            solve_schur(sys, opts, sol.flux, sol.pressure);
            break;
    }

    sol.solver_residual = block_residual(sys, sol.flux, sol.pressure);
    check_residual(sys, opts, sol.solver_residual,
                   opts.kind == SolverKind::direct ? "direct" : "schur");
    sol.conservation_residual = max_conservation_residual(sys, sol.flux);
    return sol;
}

double max_conservation_residual(const SaddleSystem& sys, const Eigen::VectorXd& flux) {
    if (sys.n_p == 0)
        return 0.0;
    return (sys.B * flux - sys.rhs_p).cwiseAbs().maxCoeff();
}

} // namespace polydarcy
