#pragma once

#include <vector>

#include <Eigen/Dense>

#include "polydarcy/mesh.hpp"
#include "polydarcy/problem.hpp"

namespace polydarcy {

// Velocity dofs are one constant normal flux per cell-boundary edge, taken
// outward w.r.t. the counter-clockwise loop; pressures are one constant per
// cell. The two traversals of a slit carry independent dofs with opposite
// normals.

struct EdgeGeometry {
    double length = 0.0;
    Point2 normal;    // outward unit normal
    Point2 midpoint;
};

struct CellDofGeometry {
    std::vector<EdgeGeometry> edges;  // loop order
    double measure = 0.0;
    Point2 centroid;
    double diameter = 0.0;

    int n_edges() const { return static_cast<int>(edges.size()); }
};

CellDofGeometry dof_geometry(const PolyMesh& mesh, int cell);
// Same, for a raw counter-clockwise polygon loop (test polygons, slit loops).
CellDofGeometry polygon_dof_geometry(const std::vector<Point2>& loop);

enum class StabilizationScaling { trace_scaled, measure_scaled };

struct StabilizationParams {
    StabilizationScaling scaling_mode = StabilizationScaling::trace_scaled;
    // Measured spectral-equivalence constants (filled by
    // measure_spectral_equivalence; reported, never prescribed).
    double iota_star_est = 0.0;
    double iota_sup_est = 0.0;
};

// Projection of the virtual space onto constant vector fields (gradients of
// scaled linear monomials), computable exactly from edge dofs through the
// divergence theorem: column j equals (|e_j|/|E|) (m_j - x_E). The
// permeability drops out because it is constant on the cell.
Eigen::Matrix2Xd projection_matrix(const CellDofGeometry& g, const CellPermeability& K);

// A_cons = |E| Pi0^T K^{-1} Pi0: the consistency part, rank <= 2, PSD.
Eigen::MatrixXd consistency_matrix(const CellDofGeometry& g, const CellPermeability& K,
                                   const Eigen::Matrix2Xd& Pi0);

// A_stab = alpha (I - P) with P the dof-space projector onto the dof vectors
// of constant fields; alpha = tr(A_cons)/2 (trace_scaled) or
// |E| tr(K^{-1})/2 (measure_scaled). Annihilates constant-field dofs.
Eigen::MatrixXd stabilization_matrix(const CellDofGeometry& g, const CellPermeability& K,
                                     const Eigen::MatrixXd& A_cons,
                                     const StabilizationParams& params);

// Divergence pairing against the cell's constant pressure: entry j is
// -|e_j| (exact: the virtual divergence is constant).
Eigen::RowVectorXd divergence_row(const CellDofGeometry& g);

struct LocalVem {
    int n_edges = 0;
    Eigen::MatrixXd A_cons;
    Eigen::MatrixXd A_stab;
    Eigen::MatrixXd A_h;      // A_cons + A_stab, SPD on the local dof space
    Eigen::RowVectorXd B_div;
    Eigen::Matrix2Xd Pi0;
};

LocalVem build_local_vem(const CellDofGeometry& g, const CellPermeability& K,
                         const StabilizationParams& params);

struct CellRhs {
    Eigen::VectorXd velocity;  // -|e| p_data(midpoint) on outer/inclusion edges
    double pressure = 0.0;     // -|E| f(centroid)
};

CellRhs rhs_contributions(const PolyMesh& mesh, int cell, const BoundaryData& data,
                          const ScalarField& source);

// Per-cell generalized-spectrum sweep of (A_stab, A_cons) off their kernels:
// fills iota_star_est (min over cells of alpha / lambda_max(A_cons)) and
// iota_sup_est (max of alpha / lambda_min^+(A_cons)).
void measure_spectral_equivalence(const PolyMesh& mesh, const CellPermeability& K,
                                  StabilizationParams& params);

} // namespace polydarcy
