#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polydarcy/mesh.hpp"

namespace polydarcy {

struct ReferenceSolution {
    PolyMesh mesh;             // fine triangular grid
    Eigen::VectorXd pressure;  // one value per reference cell
    double min_pressure = 0.0;
    double max_pressure = 0.0;
    double solver_residual = 0.0;
    double conservation_residual = 0.0;

    double range() const { return max_pressure - min_pressure; }
};

// Piecewise-constant transfer by containment: each reference cell takes the
// coarse pressure of the cell containing its interior sample point (the
// centroid; for reference cells touching the inclusion the point is nudged
// 1e-9 along the cell's own side normal, since the pressure is two-valued on
// the segment). Parallel over reference cells with a serial path kept for
// testing.
std::vector<double> transfer_to_reference(const PolyMesh& coarse_mesh,
                                          const Eigen::VectorXd& coarse_pressure,
                                          const PolyMesh& ref_mesh, bool parallel = true);

struct ErrorResult {
    double err = 0.0;                // relative L2 error
    std::vector<double> cell_error;  // |p_transferred - p_ref| per reference cell
};

// err = sqrt(sum_E |E| (p_T - p_ref)^2) / |max p_ref - min p_ref| over the
// reference cells, accumulated with a deterministic pairwise reduction.
ErrorResult relative_l2_error(const std::vector<double>& p_transferred,
                              const Eigen::VectorXd& p_ref, const PolyMesh& ref_mesh,
                              bool parallel = true);

struct ConvergenceRecord {
    double h = 0.0;
    double err = 0.0;
    std::optional<double> rate;  // none on the first row
};

// rate_i = log(err_{i-1}/err_i) / log(h_{i-1}/h_i); h must strictly decrease.
std::vector<ConvergenceRecord> convergence_records(const std::vector<double>& h,
                                                   const std::vector<double>& err);

std::string format_convergence_table(const std::vector<ConvergenceRecord>& records);
// CSV with header "h,err,rate"; the first row's rate column is empty.
void write_convergence_csv(const std::vector<ConvergenceRecord>& records,
                           const std::string& path);

// Deterministic pairwise sum (summation order independent of thread count).
double pairwise_sum(const std::vector<double>& terms);

} // namespace polydarcy
