#include "polydarcy/vem.hpp"

#include <limits>

#include <Eigen/Eigenvalues>

#include "polydarcy/errors.hpp"

namespace polydarcy {

void CellPermeability::validate() const {
    if ((tensor - tensor.transpose()).cwiseAbs().maxCoeff() > 1e-14 * tensor.cwiseAbs().maxCoeff())
        throw SolverError("permeability tensor is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(tensor);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw SolverError("permeability tensor is not positive definite");
}

CellDofGeometry polygon_dof_geometry(const std::vector<Point2>& loop) {
    const CellGeometry cg = cell_geometry(loop);
    CellDofGeometry g;
    g.measure = cg.measure;
    g.centroid = cg.centroid;
    g.diameter = cg.diameter;
    const int n = static_cast<int>(loop.size());
    g.edges.resize(n);
    for (int i = 0; i < n; ++i) {
        const Point2 a = loop[i];
        const Point2 b = loop[(i + 1) % n];
        const double len = distance(a, b);
        if (!(len > 0.0))
            throw MeshError("degenerate geometry: zero-length edge");
        g.edges[i].length = len;
        g.edges[i].normal = rot90cw((b - a) / len);
        g.edges[i].midpoint = midpoint(a, b);
    }
    return g;
}

CellDofGeometry dof_geometry(const PolyMesh& mesh, int cell) {
    return polygon_dof_geometry(mesh.cell_polygon(cell));
}

Eigen::Matrix2Xd projection_matrix(const CellDofGeometry& g, const CellPermeability& K) {
    (void)K;  // constant per cell, so the weighted mean reduces to the mean
    if (!(g.measure > 0.0))
        throw MeshError("degenerate cell: non-positive measure");
    Eigen::Matrix2Xd pi0(2, g.n_edges());
    for (int j = 0; j < g.n_edges(); ++j) {
        const Point2 d = g.edges[j].midpoint - g.centroid;
        pi0(0, j) = g.edges[j].length / g.measure * d.x;
        pi0(1, j) = g.edges[j].length / g.measure * d.y;
    }
    return pi0;
}

Eigen::MatrixXd consistency_matrix(const CellDofGeometry& g, const CellPermeability& K,
                                   const Eigen::Matrix2Xd& Pi0) {
    return g.measure * Pi0.transpose() * K.inverse() * Pi0;
}

Eigen::MatrixXd stabilization_matrix(const CellDofGeometry& g, const CellPermeability& K,
                                     const Eigen::MatrixXd& A_cons,
                                     const StabilizationParams& params) {
    const int n = g.n_edges();
    // Dofs of the two constant basis fields grad((x - x_E)/h_E),
    // grad((y - y_E)/h_E); the diameter scaling conditions D^T D.
    Eigen::MatrixXd D(n, 2);
    for (int j = 0; j < n; ++j) {
        D(j, 0) = g.edges[j].normal.x / g.diameter;
        D(j, 1) = g.edges[j].normal.y / g.diameter;
    }
    const Eigen::Matrix2d DtD = D.transpose() * D;
    const double det = DtD.determinant();
    if (!(det > 1e-28 * DtD.trace() * DtD.trace()))
        throw MeshError("degenerate cell: collinear edge normals");
    const Eigen::MatrixXd P = D * DtD.inverse() * D.transpose();

    double alpha = 0.0;
    switch (params.scaling_mode) {
        case StabilizationScaling::trace_scaled:
            alpha = 0.5 * A_cons.trace();
            break;
        case StabilizationScaling::measure_scaled:
            alpha = 0.5 * g.measure * K.inverse().trace();
            break;
    }
    return alpha * (Eigen::MatrixXd::Identity(n, n) - P);
}

Eigen::RowVectorXd divergence_row(const CellDofGeometry& g) {
    Eigen::RowVectorXd b(g.n_edges());
    for (int j = 0; j < g.n_edges(); ++j)
        b(j) = -g.edges[j].length;
    return b;
}

LocalVem build_local_vem(const CellDofGeometry& g, const CellPermeability& K,
                         const StabilizationParams& params) {
    LocalVem lv;
    lv.n_edges = g.n_edges();
    lv.Pi0 = projection_matrix(g, K);
    lv.A_cons = consistency_matrix(g, K, lv.Pi0);
    lv.A_stab = stabilization_matrix(g, K, lv.A_cons, params);
    lv.A_h = lv.A_cons + lv.A_stab;
    lv.B_div = divergence_row(g);
    return lv;
}

CellRhs rhs_contributions(const PolyMesh& mesh, int cell, const BoundaryData& data,
                          const ScalarField& source) {
    const Cell& c = mesh.cells[cell];
    const int n = static_cast<int>(c.loop.size());
    CellRhs rhs;
    rhs.velocity = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        const HalfEdge& h = mesh.half_edges[c.loop[j]];
        const double len = mesh.edge_length(c.loop[j]);
        const Point2 mid = mesh.edge_midpoint(c.loop[j]);
        switch (h.side) {
            case InclusionSide::plus:
                rhs.velocity(j) = -len * data.gamma_plus(mid);
                break;
            case InclusionSide::minus:
                rhs.velocity(j) = -len * data.gamma_minus(mid);
                break;
            case InclusionSide::none:
                if (h.on_outer_boundary)
                    rhs.velocity(j) = -len * data.outer_pressure(mid);
                else if (h.twin < 0)
                    throw MeshError("half-edge on the inclusion lacks a side flag (cell " +
                                    std::to_string(cell) + ")");
                break;
        }
    }
    rhs.pressure = -c.measure * source(c.centroid);
    return rhs;
}

void measure_spectral_equivalence(const PolyMesh& mesh, const CellPermeability& K,
                                  StabilizationParams& params) {
    double iota_star = std::numeric_limits<double>::max();
    double iota_sup = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const CellDofGeometry g = dof_geometry(mesh, c);
        const Eigen::Matrix2Xd Pi0 = projection_matrix(g, K);
        const Eigen::MatrixXd A_cons = consistency_matrix(g, K, Pi0);
        const Eigen::MatrixXd A_stab = stabilization_matrix(g, K, A_cons, params);

        // Nonzero spectrum of A_cons lives on the 2-dimensional range of
        // Pi0^T; A_stab has the single nonzero eigenvalue alpha.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_c(A_cons);
        const Eigen::VectorXd ev = es_c.eigenvalues();
        const double lam_max = ev(ev.size() - 1);
        const double lam_min = ev(ev.size() - 2);  // second nonzero eigenvalue
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_s(A_stab);
        const double alpha = es_s.eigenvalues().maxCoeff();
        if (lam_min <= 0.0 || lam_max <= 0.0)
            throw MeshError("consistency matrix not rank 2 on cell " + std::to_string(c));
        iota_star = std::min(iota_star, alpha / lam_max);
        iota_sup = std::max(iota_sup, alpha / lam_min);
    }
    params.iota_star_est = iota_star;
    params.iota_sup_est = iota_sup;
}

} // namespace polydarcy
