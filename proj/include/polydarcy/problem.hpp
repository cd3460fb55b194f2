#pragma once

#include <functional>

#include <Eigen/Dense>

#include "polydarcy/mesh.hpp"

namespace polydarcy {

using ScalarField = std::function<double(Point2)>;

inline ScalarField constant_field(double v) {
    return [v](Point2) { return v; };
}

// Pressure traces entering the weak form through the natural functional: the
// outer-boundary value and the two independent inclusion-side values. All
// of them are evaluated at edge midpoints (exact for linear traces against
// constant normal fluxes).
struct BoundaryData {
    ScalarField outer_pressure = constant_field(0.0);
    ScalarField gamma_plus = constant_field(0.0);
    ScalarField gamma_minus = constant_field(0.0);

    static BoundaryData from_inclusion(const Inclusion& inc,
                                       ScalarField outer = constant_field(0.0)) {
        BoundaryData d;
        d.outer_pressure = std::move(outer);
        d.gamma_plus = constant_field(inc.p_plus);
        d.gamma_minus = constant_field(inc.p_minus);
        return d;
    }
};

struct CellPermeability {
    Eigen::Matrix2d tensor = Eigen::Matrix2d::Identity();

    static CellPermeability isotropic(double k) {
        CellPermeability p;
        p.tensor = k * Eigen::Matrix2d::Identity();
        return p;
    }

    // Symmetric positive definite check; throws SolverError otherwise.
    void validate() const;
    Eigen::Matrix2d inverse() const { return tensor.inverse(); }
};

struct DarcyProblem {
    CellPermeability permeability;              // constant over the domain
    ScalarField source = constant_field(0.0);   // sampled at cell centroids
    BoundaryData boundary;
};

} // namespace polydarcy
