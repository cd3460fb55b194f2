#include "polydarcy/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>

#include "polydarcy/errors.hpp"

namespace polydarcy {

namespace {

constexpr double kSideTol = 1e-12;

// Pairwise accumulation keeps the rounding error logarithmic in the term
// count, so the 1e-12 tiling tolerance stays meaningful on fine meshes.
double pairwise_measure(const std::vector<Cell>& cells, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1)
        return cells[lo].measure;
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_measure(cells, lo, mid) + pairwise_measure(cells, mid, hi);
}

} // namespace

Point2 Inclusion::tangent() const {
    const Point2 d = endpoint_b - endpoint_a;
    const double len = norm(d);
    return len > 0.0 ? d / len : Point2{};
}

Point2 Inclusion::unit_normal() const { return rot90ccw(tangent()); }

double Inclusion::side_of(Point2 p) const { return dot(p - endpoint_a, unit_normal()); }

CellGeometry cell_geometry(const std::vector<Point2>& loop) {
    const int n = static_cast<int>(loop.size());
    if (n < 3)
        throw MeshError("cell loop with fewer than 3 vertices");

    double twice_area = 0.0;
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        const Point2 a = loop[i];
        const Point2 b = loop[(i + 1) % n];
        const double w = cross(a, b);
        twice_area += w;
        mx += (a.x + b.x) * w;
        my += (a.y + b.y) * w;
    }

    CellGeometry g;
    double signed_area = 0.5 * twice_area;
    if (signed_area < 0.0) {  // orientation fix for clockwise input
        signed_area = -signed_area;
        mx = -mx;
        my = -my;
    }
    if (!(signed_area > 0.0))
        throw MeshError("degenerate cell: zero or negative area after orientation fix");

    g.measure = signed_area;
    g.centroid = {mx / (6.0 * signed_area), my / (6.0 * signed_area)};

    double diam2 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const Point2 d = loop[i] - loop[j];
            diam2 = std::max(diam2, dot(d, d));
        }
    g.diameter = std::sqrt(diam2);
    return g;
}

double PolyMesh::edge_length(int he) const {
    const HalfEdge& h = half_edges[he];
    return distance(vertices[h.tail], vertices[h.head]);
}

Point2 PolyMesh::edge_midpoint(int he) const {
    const HalfEdge& h = half_edges[he];
    return midpoint(vertices[h.tail], vertices[h.head]);
}

Point2 PolyMesh::edge_normal(int he) const {
    const HalfEdge& h = half_edges[he];
    const Point2 t = vertices[h.head] - vertices[h.tail];
    const double len = norm(t);
    if (len <= 0.0)
        throw MeshError("zero-length edge");
    return rot90cw(t / len);
}

std::vector<Point2> PolyMesh::cell_polygon(int cell) const {
    std::vector<Point2> poly;
    poly.reserve(cells[cell].loop.size());
    for (int he : cells[cell].loop)
        poly.push_back(vertices[half_edges[he].tail]);
    return poly;
}

std::vector<int> PolyMesh::cell_vertices(int cell) const {
    std::vector<int> ids;
    ids.reserve(cells[cell].loop.size());
    for (int he : cells[cell].loop)
        ids.push_back(half_edges[he].tail);
    return ids;
}

void PolyMesh::refresh() {
    // Per-cell geometry and cut flags.
    mesh_size_h = 0.0;
    for (int c = 0; c < n_cells(); ++c) {
        Cell& cell = cells[c];
        try {
            const CellGeometry g = cell_geometry(cell_polygon(c));
            cell.measure = g.measure;
            cell.centroid = g.centroid;
            cell.diameter = g.diameter;
        } catch (const MeshError& e) {
            throw MeshError(std::string(e.what()) + " (cell " + std::to_string(c) + ")");
        }
        mesh_size_h = std::max(mesh_size_h, cell.diameter);

        // A cut cell traverses a pair of geometrically coincident half-edges
        // with opposite orientation.
        cell.is_cut = false;
        const int n = static_cast<int>(cell.loop.size());
        for (int i = 0; i < n && !cell.is_cut; ++i)
            for (int j = i + 1; j < n; ++j) {
                const HalfEdge& a = half_edges[cell.loop[i]];
                const HalfEdge& b = half_edges[cell.loop[j]];
                if (vertices[a.tail] == vertices[b.head] && vertices[a.head] == vertices[b.tail]) {
                    cell.is_cut = true;
                    break;
                }
            }
    }

    // Geometric edge ids: twinned pairs share one id, un-twinned half-edges
    // (outer boundary, inclusion sides) each get their own.
    int next_id = 0;
    for (auto& h : half_edges)
        h.edge_id = -1;
    for (int c = 0; c < n_cells(); ++c) {
        for (int he : cells[c].loop) {
            HalfEdge& h = half_edges[he];
            if (h.edge_id >= 0)
                continue;
            h.edge_id = next_id;
            if (h.twin >= 0)
                half_edges[h.twin].edge_id = next_id;
            ++next_id;
        }
    }
    edge_count = next_id;
}

double PolyMesh::total_measure() const {
    return cells.empty() ? 0.0 : pairwise_measure(cells, 0, cells.size());
}

double PolyMesh::outer_boundary_area() const {
    double twice_area = 0.0;
    for (const HalfEdge& h : half_edges) {
        if (!h.on_outer_boundary)
            continue;
        // Boundary half-edges of counter-clockwise cells traverse the outer
        // boundary counter-clockwise.
        twice_area += cross(vertices[h.tail], vertices[h.head]);
    }
    return 0.5 * twice_area;
}

void PolyMesh::validate() const {
    const int n_he = static_cast<int>(half_edges.size());

    std::vector<char> seen(n_he, 0);
    for (int c = 0; c < n_cells(); ++c) {
        const auto& loop = cells[c].loop;
        if (loop.size() < 3)
            throw MeshError("cell " + std::to_string(c) + " loop too short");
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const HalfEdge& h = half_edges[loop[i]];
            const HalfEdge& nx = half_edges[loop[(i + 1) % loop.size()]];
            if (h.cell != c)
                throw MeshError("half-edge cell back-reference broken in cell " + std::to_string(c));
            if (h.head != nx.tail)
                throw MeshError("cell " + std::to_string(c) + " loop not closed");
            if (seen[loop[i]])
                throw MeshError("half-edge appears in two loops");
            seen[loop[i]] = 1;
        }
        if (!(cells[c].measure > 0.0))
            throw MeshError("cell " + std::to_string(c) + " has non-positive measure");
    }
    for (int i = 0; i < n_he; ++i)
        if (!seen[i])
            throw MeshError("orphan half-edge " + std::to_string(i));

    for (int i = 0; i < n_he; ++i) {
        const HalfEdge& h = half_edges[i];
        if (h.twin >= 0) {
            const HalfEdge& t = half_edges[h.twin];
            if (t.twin != i)
                throw MeshError("twin link not symmetric");
            if (!(vertices[h.tail] == vertices[t.head] && vertices[h.head] == vertices[t.tail]))
                throw MeshError("twin half-edges do not coincide geometrically");
            if (h.edge_id != t.edge_id)
                throw MeshError("twin half-edges with different edge ids");
            if (h.side != InclusionSide::none)
                throw MeshError("inclusion-side half-edge still has a twin");
            if (t.cell == h.cell)
                throw MeshError("slit off the inclusion (twinned pair inside one cell) is not supported");
        } else if (h.side == InclusionSide::none && !h.on_outer_boundary) {
            throw MeshError("un-twinned half-edge " + std::to_string(i) +
                            " is neither outer boundary nor inclusion side");
        }
        if (h.side != InclusionSide::none && !inclusion.has_value())
            throw MeshError("inclusion-side flags present without an inclusion");
        if (h.side != InclusionSide::none && inclusion.has_value()) {
            if (!inclusion->covers_point(vertices[h.tail], kSideTol) ||
                !inclusion->covers_point(vertices[h.head], kSideTol))
                throw MeshError("inclusion-side half-edge not on the inclusion segment");
        }
    }

    // Tiling: cells partition the region enclosed by the outer boundary.
    const double area = outer_boundary_area();
    const double sum = total_measure();
    if (std::abs(sum - area) > 1e-12 * std::max(1.0, std::abs(area))) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "cell measures do not tile the domain: sum %.17g vs boundary area %.17g",
                      sum, area);
        throw MeshError(msg);
    }
}

PolyMesh build_from_loops(std::vector<Point2> vertices,
                          const std::vector<std::vector<int>>& loops,
                          std::optional<Inclusion> inclusion) {
    PolyMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.inclusion = inclusion;

    // Fix orientation cell by cell before creating half-edges.
    std::vector<std::vector<int>> ccw_loops = loops;
    for (auto& loop : ccw_loops) {
        if (loop.size() < 3)
            throw MeshError("cell loop with fewer than 3 vertices");
        std::vector<Point2> poly;
        poly.reserve(loop.size());
        for (int v : loop) {
            if (v < 0 || v >= mesh.n_vertices())
                throw MeshError("loop references vertex " + std::to_string(v) + " out of range");
            poly.push_back(mesh.vertices[v]);
        }
        double twice_area = 0.0;
        for (std::size_t i = 0; i < poly.size(); ++i)
            twice_area += cross(poly[i], poly[(i + 1) % poly.size()]);
        if (twice_area < 0.0)
            std::reverse(loop.begin(), loop.end());
    }

    mesh.cells.resize(ccw_loops.size());
    std::map<std::pair<int, int>, int> open;  // unordered vertex pair -> half-edge id
    for (int c = 0; c < static_cast<int>(ccw_loops.size()); ++c) {
        const auto& loop = ccw_loops[c];
        const int n = static_cast<int>(loop.size());
        Cell& cell = mesh.cells[c];
        cell.loop.reserve(n);
        for (int i = 0; i < n; ++i) {
            HalfEdge h;
            h.tail = loop[i];
            h.head = loop[(i + 1) % n];
            h.cell = c;
            const int id = static_cast<int>(mesh.half_edges.size());
            const auto key = std::minmax(h.tail, h.head);
            auto it = open.find({key.first, key.second});
            if (it != open.end()) {
                if (it->second < 0)
                    throw MeshError("geometric edge with more than two incident half-edges");
                HalfEdge& other = mesh.half_edges[it->second];
                if (other.tail != h.head || other.head != h.tail)
                    throw MeshError("twin candidate with equal orientation (inconsistent loops)");
                h.twin = it->second;
                other.twin = id;
                it->second = -1;
            } else {
                open[{key.first, key.second}] = id;
            }
            cell.loop.push_back(id);
            mesh.half_edges.push_back(h);
        }
    }

    // Sever any twin pair lying on the inclusion (covers inclusions whose two
    // sides reference the same vertex ids, e.g. single-edge inclusions), then
    // flag sides of all inclusion half-edges.
    if (mesh.inclusion) {
        const Inclusion& inc = *mesh.inclusion;
        for (int i = 0; i < static_cast<int>(mesh.half_edges.size()); ++i) {
            HalfEdge& h = mesh.half_edges[i];
            if (!inc.covers_point(mesh.vertices[h.tail], kSideTol) ||
                !inc.covers_point(mesh.vertices[h.head], kSideTol))
                continue;
            if (h.twin >= 0) {
                mesh.half_edges[h.twin].twin = -1;
                h.twin = -1;
            }
        }
    }

    mesh.refresh();

    // Outer boundary and inclusion-side flags need cell centroids, so assign
    // after refresh().
    for (auto& h : mesh.half_edges) {
        if (h.twin >= 0)
            continue;
        bool on_inclusion = false;
        if (mesh.inclusion) {
            const Inclusion& inc = *mesh.inclusion;
            on_inclusion = inc.covers_point(mesh.vertices[h.tail], kSideTol) &&
                           inc.covers_point(mesh.vertices[h.head], kSideTol);
        }
        if (on_inclusion) {
            // A counter-clockwise cell on the plus side traverses the
            // inclusion along its tangent (outward normal opposite to the
            // inclusion normal); the minus side traverses it backwards.
            const Point2 d = mesh.vertices[h.head] - mesh.vertices[h.tail];
            h.side = dot(d, mesh.inclusion->tangent()) > 0.0 ? InclusionSide::plus
                                                             : InclusionSide::minus;
        } else {
            h.on_outer_boundary = true;
        }
    }
    return mesh;
}

} // namespace polydarcy
