#pragma once

#include <string>

#include <Eigen/Sparse>

#include "polydarcy/dof_map.hpp"
#include "polydarcy/mesh.hpp"
#include "polydarcy/problem.hpp"
#include "polydarcy/vem.hpp"

namespace polydarcy {

// Symmetric saddle-point system [[A, B^T], [B, 0]] [u; p] = [rhs_u; rhs_p]
// with A the velocity-velocity block (SPD) and B the divergence block.
struct SaddleSystem {
    Eigen::SparseMatrix<double> A;  // n_u x n_u
    Eigen::SparseMatrix<double> B;  // n_p x n_u
    Eigen::VectorXd rhs_u;
    Eigen::VectorXd rhs_p;
    int n_u = 0;
    int n_p = 0;
};

// Scatter of the local cell matrices. The cell loop is embarrassingly
// parallel: every cell writes into preassigned triplet slots, so the result
// is identical for any thread count; `parallel` switches between the OpenMP
// and the serial reference path.
SaddleSystem assemble(const PolyMesh& mesh, const DofMap& dm, const DarcyProblem& problem,
                      const StabilizationParams& stab, bool parallel = true);

// Block system in MatrixMarket coordinate format (for external solver
// debugging).
void write_matrix_market(const SaddleSystem& sys, const std::string& path);

} // namespace polydarcy
