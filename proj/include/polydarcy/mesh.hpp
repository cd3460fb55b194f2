#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polydarcy/geometry.hpp"

namespace polydarcy {

enum class InclusionSide : std::uint8_t { none, plus, minus };

// Half-edge of a polygonal cell boundary loop. Interior geometric edges carry
// two twinned half-edges with opposite orientation; outer-boundary edges and
// the two sides of the inclusion carry exactly one half-edge each (the
// inclusion sides are deliberately not twinned so they keep independent dofs).
struct HalfEdge {
    int tail = -1;
    int head = -1;
    int twin = -1;     // -1: outer boundary or inclusion side
    int cell = -1;
    int edge_id = -1;  // geometric edge id; inclusion edges get one id per side
    InclusionSide side = InclusionSide::none;
    bool on_outer_boundary = false;
};

struct Cell {
    std::vector<int> loop;  // half-edge ids, counter-clockwise, closed
    double measure = 0.0;
    double diameter = 0.0;
    Point2 centroid;
    bool is_cut = false;
};

// Straight internal boundary segment with independently prescribed side
// pressures. The plus side is the one the unit normal (tangent rotated +90
// degrees) points into.
struct Inclusion {
    Point2 endpoint_a;
    Point2 endpoint_b;
    double p_plus = 0.0;
    double p_minus = 0.0;

    Point2 tangent() const;
    Point2 unit_normal() const;
    double length() const { return distance(endpoint_a, endpoint_b); }
    bool covers_point(Point2 p, double tol) const { return on_segment(p, endpoint_a, endpoint_b, tol); }
    // Signed side of p: positive on the plus side of the carrier line.
    double side_of(Point2 p) const;
};

struct CellGeometry {
    double measure = 0.0;
    Point2 centroid;
    double diameter = 0.0;
};

// Shoelace measure, first-moment centroid and max pairwise vertex distance of
// a closed polygon loop. Coincident opposite-orientation edge pairs (slits)
// cancel exactly in the measure and the moments.
CellGeometry cell_geometry(const std::vector<Point2>& loop);

struct PolyMesh {
    std::vector<Point2> vertices;
    std::vector<HalfEdge> half_edges;
    std::vector<Cell> cells;
    int edge_count = 0;      // distinct geometric edges, inclusion sides counted separately
    double mesh_size_h = 0.0;
    std::optional<Inclusion> inclusion;  // set once embedded

    int n_cells() const { return static_cast<int>(cells.size()); }
    int n_vertices() const { return static_cast<int>(vertices.size()); }

    double edge_length(int he) const;
    Point2 edge_midpoint(int he) const;
    // Outward unit normal of the half-edge w.r.t. its (counter-clockwise) cell.
    Point2 edge_normal(int he) const;

    std::vector<Point2> cell_polygon(int cell) const;
    // Loop as vertex ids (tails in loop order).
    std::vector<int> cell_vertices(int cell) const;

    // Recompute per-cell geometry, edge ids, edge_count, is_cut flags and
    // mesh_size_h from vertices + loops. Throws MeshError on degenerate cells.
    void refresh();

    // Structural invariant check; throws MeshError with a description.
    void validate() const;

    // Sum of cell measures; equals the outer-boundary polygon area for a
    // valid tiling.
    double total_measure() const;
    // Area enclosed by the outer-boundary half-edges.
    double outer_boundary_area() const;
};

// Build a half-edge mesh from vertex coordinates and per-cell vertex loops
// (counter-clockwise; clockwise loops are reversed). Twins are matched by
// unordered vertex pair. If an inclusion is given, every edge lying on the
// segment is un-twinned and flagged with its geometric side.
PolyMesh build_from_loops(std::vector<Point2> vertices,
                          const std::vector<std::vector<int>>& loops,
                          std::optional<Inclusion> inclusion = std::nullopt);

} // namespace polydarcy
