#pragma once

#include <string>
#include <utility>
#include <vector>

#include "polydarcy/mesh.hpp"

namespace polydarcy {

// Line-oriented ASCII format:
//   poly-mesh 1
//   vertices N
//   <x> <y>                 (N lines)
//   cells M
//   <k> <v0> ... <v{k-1}>   (M lines, counter-clockwise vertex-id loops)
//   inclusion <ax> <ay> <bx> <by> <p_plus> <p_minus>   (optional)
// Coordinates round-trip exactly (printed with %.17g). Vertices duplicated
// along the inclusion appear as separate entries, so slit cells are plain
// vertex loops.
void write_poly_mesh(const PolyMesh& mesh, const std::string& path);
PolyMesh read_poly_mesh(const std::string& path);

// Legacy VTK unstructured grid (ASCII, polygon cells; slit cells come out as
// polygons with geometrically repeated vertices). cell_fields are per-cell
// scalars of length n_cells. The title line carries the suggested color map.
void write_vtk(const PolyMesh& mesh, const std::string& path,
               const std::vector<std::pair<std::string, std::vector<double>>>& cell_fields = {});

} // namespace polydarcy
