#pragma once

#include <optional>

#include "polydarcy/mesh.hpp"

namespace polydarcy {

// Structured right-triangle mesh of an axis-aligned rectangle:
// base_resolution x base_resolution squares, each split along the
// lower-left/upper-right diagonal. If an inclusion is given it must run along
// lattice edges (horizontal, vertical, or parallel to the split diagonal) with
// fully immersed endpoints, and the triangles incident to each endpoint are
// subdivided tip_refinement_levels times: each sweep replaces a tip triangle
// by the half-scale tip triangle plus two outer triangles, so tip-incident
// diameters halve per level and the mesh stays conforming. The inclusion is
// not embedded here; see embed_inclusion.
PolyMesh generate_triangulation(const Rect& domain,
                                const std::optional<Inclusion>& inclusion,
                                int base_resolution,
                                int tip_refinement_levels);

// Split every mesh edge lying on the inclusion into an un-twinned plus/minus
// pair and duplicate the vertices strictly interior to the segment, so the two
// sides stay connected only at the tips. Topology-only: cell measures are
// unchanged.
PolyMesh embed_inclusion(const PolyMesh& mesh, const Inclusion& inclusion);

// Coarsen by gluing: every cell with measure below
// measure_threshold_ratio x (mean input cell measure) is merged into its
// largest-shared-interface neighbor (ties toward the lower cell id); merges
// that would break the cell into multiple or self-touching loops are skipped.
// With force_tip_cuts, the cells incident to each inclusion tip are first
// merged into a single cell whose loop traverses the zero-width slit along
// the inclusion (is_cut). Merges never cross the inclusion.
PolyMesh agglomerate(const PolyMesh& mesh, double measure_threshold_ratio, bool force_tip_cuts);

} // namespace polydarcy
