#pragma once

#include <cstdint>
#include <vector>

#include "polydarcy/mesh.hpp"

namespace polydarcy {

// Global numbering: one velocity dof per geometric edge (inclusion sides are
// separate edges, hence separate dofs) and one pressure dof per cell, both in
// deterministic id order. The global flux of an edge is taken along the
// reference direction from its lower to its higher vertex id;
// orientation_sign reconciles cell-outward normals with that convention.
struct DofMap {
    std::vector<int> edge_dof;              // geometric edge id -> velocity dof
    std::vector<int> cell_dof;              // cell id -> pressure dof
    std::vector<std::int8_t> orientation_sign;  // half-edge id -> +1/-1
    int n_velocity = 0;
    int n_pressure = 0;

    int velocity_dof(const PolyMesh& mesh, int half_edge) const {
        return edge_dof[mesh.half_edges[half_edge].edge_id];
    }
};

DofMap build_dof_map(const PolyMesh& mesh);

} // namespace polydarcy
