#pragma once

#include <Eigen/Sparse>

#include "polydarcy/assemble.hpp"

namespace polydarcy {

enum class SolverKind { direct, schur };

struct SolveOptions {
    SolverKind kind = SolverKind::direct;
    // Accepted block-system residual: relative when rhs != 0, else absolute.
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_iterations = 50000;  // Schur CG
    bool mean_zero_gauge = false;  // pressure-mean constraint for all-Neumann extensions
};

struct DiscreteSolution {
    Eigen::VectorXd flux;      // per velocity dof, along the global edge orientation
    Eigen::VectorXd pressure;  // per cell
    double mesh_size_h = 0.0;
    double solver_residual = 0.0;        // achieved block-system residual
    double conservation_residual = 0.0;  // max per-cell flux-balance defect
};

// Direct: sparse LU of the indefinite block matrix. Schur: Cholesky of A plus
// conjugate gradients on the pressure Schur complement B A^{-1} B^T. Both
// verify the block residual and throw SolverError on failure.
DiscreteSolution solve(const SaddleSystem& sys, const PolyMesh& mesh,
                       const SolveOptions& opts = {});

// Max over cells of |sum of signed edge fluxes - integrated source|, i.e.
// ||B u - rhs_p||_inf.
double max_conservation_residual(const SaddleSystem& sys, const Eigen::VectorXd& flux);

} // namespace polydarcy
