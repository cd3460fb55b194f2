#include "polydarcy/dof_map.hpp"

#include "polydarcy/errors.hpp"

namespace polydarcy {

DofMap build_dof_map(const PolyMesh& mesh) {
    DofMap dm;
    dm.n_velocity = mesh.edge_count;
    dm.n_pressure = mesh.n_cells();

    dm.edge_dof.resize(mesh.edge_count);
    for (int e = 0; e < mesh.edge_count; ++e)
        dm.edge_dof[e] = e;
    dm.cell_dof.resize(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c)
        dm.cell_dof[c] = c;

    dm.orientation_sign.resize(mesh.half_edges.size());
    for (std::size_t i = 0; i < mesh.half_edges.size(); ++i) {
        const HalfEdge& h = mesh.half_edges[i];
        if (h.twin < 0 && h.side == InclusionSide::none && !h.on_outer_boundary)
            throw MeshError("half-edge " + std::to_string(i) +
                            " on the inclusion lacks a side flag");
        if (h.edge_id < 0)
            throw MeshError("mesh edges not numbered; call refresh() first");
        dm.orientation_sign[i] = static_cast<std::int8_t>(h.tail < h.head ? 1 : -1);
    }
    return dm;
}

} // namespace polydarcy
