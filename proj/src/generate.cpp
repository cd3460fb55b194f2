#include "polydarcy/generate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "polydarcy/errors.hpp"

namespace polydarcy {

namespace {

constexpr double kTol = 1e-12;

int lattice_index(double coord, double lo, double step, int n, const char* what) {
    const double t = (coord - lo) / step;
    const int i = static_cast<int>(std::lround(t));
    if (i < 0 || i > n || std::abs(t - i) > 1e-9)
        throw MeshError(std::string("inclusion not representable on the lattice: ") + what);
    return i;
}

struct TriSoup {
    std::vector<Point2> vertices;
    std::vector<std::array<int, 3>> tris;
};

// One geometric-refinement sweep around the given vertex: each incident
// triangle (t,a,b) becomes (t,ma,mb), (ma,a,b), (ma,b,mb) with ma, mb the
// midpoints of the tip-adjacent edges. Outer edges are untouched, so no
// conformity propagation is needed.
void refine_around_vertex(TriSoup& soup, int tip) {
    std::map<std::pair<int, int>, int> midpoint_of;
    auto midpoint_id = [&](int u, int v) {
        const auto key = std::minmax(u, v);
        auto it = midpoint_of.find({key.first, key.second});
        if (it != midpoint_of.end())
            return it->second;
        const int id = static_cast<int>(soup.vertices.size());
        soup.vertices.push_back(midpoint(soup.vertices[u], soup.vertices[v]));
        midpoint_of[{key.first, key.second}] = id;
        return id;
    };

    std::vector<std::array<int, 3>> out;
    out.reserve(soup.tris.size() + 16);
    for (const auto& tri : soup.tris) {
        int k = -1;
        for (int i = 0; i < 3; ++i)
            if (tri[i] == tip)
                k = i;
        if (k < 0) {
            out.push_back(tri);
            continue;
        }
        const int a = tri[(k + 1) % 3];
        const int b = tri[(k + 2) % 3];
        const int ma = midpoint_id(tip, a);
        const int mb = midpoint_id(tip, b);
        out.push_back({tip, ma, mb});
        out.push_back({ma, a, b});
        out.push_back({ma, b, mb});
    }
    soup.tris = std::move(out);
}

int find_vertex(const PolyMesh& mesh, Point2 p) {
    for (int v = 0; v < mesh.n_vertices(); ++v)
        if (distance(mesh.vertices[v], p) <= kTol)
            return v;
    return -1;
}

// ---------------------------------------------------------------------------
// Agglomeration machinery
// ---------------------------------------------------------------------------

struct MergeWorkspace {
    PolyMesh mesh;                 // mutable copy
    std::vector<char> cell_alive;
    std::vector<char> he_alive;
    std::vector<int> next_in_cell; // successor half-edge within its own loop

    explicit MergeWorkspace(const PolyMesh& m) : mesh(m) {
        cell_alive.assign(mesh.cells.size(), 1);
        he_alive.assign(mesh.half_edges.size(), 1);
        next_in_cell.assign(mesh.half_edges.size(), -1);
        for (const Cell& c : mesh.cells)
            rebuild_next(c);
    }

    void rebuild_next(const Cell& c) {
        const int n = static_cast<int>(c.loop.size());
        for (int i = 0; i < n; ++i)
            next_in_cell[c.loop[i]] = c.loop[(i + 1) % n];
    }

    // Merge cell b into cell a (the survivor keeps id min(a,b)). Returns false
    // and leaves the mesh untouched when the union boundary is not a single
    // simple loop.
    bool merge(int a, int b) {
        if (a == b || !cell_alive[a] || !cell_alive[b])
            return false;
        const int survivor = std::min(a, b);
        const int dying = std::max(a, b);

        std::vector<int> shared;  // half-edges (both directions) on the interface
        for (int he : mesh.cells[a].loop) {
            const HalfEdge& h = mesh.half_edges[he];
            if (h.twin >= 0 && mesh.half_edges[h.twin].cell == b) {
                shared.push_back(he);
                shared.push_back(h.twin);
            }
        }
        if (shared.empty())
            return false;
        std::unordered_set<int> dead(shared.begin(), shared.end());

        // Start from any surviving half-edge of either loop.
        int start = -1;
        for (int he : mesh.cells[a].loop)
            if (!dead.count(he)) {
                start = he;
                break;
            }
        if (start < 0)
            for (int he : mesh.cells[b].loop)
                if (!dead.count(he)) {
                    start = he;
                    break;
                }
        if (start < 0)
            return false;

        const std::size_t expected = mesh.cells[a].loop.size() + mesh.cells[b].loop.size() - shared.size();
        std::vector<int> loop;
        loop.reserve(expected);
        int h = start;
        do {
            loop.push_back(h);
            int nx = next_in_cell[h];
            while (dead.count(nx))
                nx = next_in_cell[mesh.half_edges[nx].twin];
            h = nx;
            if (loop.size() > expected)
                return false;  // never happens for a consistent mesh; guard anyway
        } while (h != start);

        if (loop.size() != expected || loop.size() < 3)
            return false;  // interface split the union into several loops

        // Simple loop: no vertex id visited twice.
        std::unordered_set<int> visited;
        for (int he : loop)
            if (!visited.insert(mesh.half_edges[he].tail).second)
                return false;

        CellGeometry g;
        {
            std::vector<Point2> poly;
            poly.reserve(loop.size());
            for (int he : loop)
                poly.push_back(mesh.vertices[mesh.half_edges[he].tail]);
            try {
                g = cell_geometry(poly);
            } catch (const MeshError&) {
                return false;
            }
        }

        // Commit.
        for (int he : shared)
            he_alive[he] = 0;
        const bool cut = mesh.cells[a].is_cut || mesh.cells[b].is_cut;
        Cell& cs = mesh.cells[survivor];
        cs.loop = std::move(loop);
        cs.measure = g.measure;
        cs.centroid = g.centroid;
        cs.diameter = g.diameter;
        cs.is_cut = cut;
        for (int he : cs.loop)
            mesh.half_edges[he].cell = survivor;
        rebuild_next(cs);
        cell_alive[dying] = 0;
        mesh.cells[dying].loop.clear();
        return true;
    }

    // Compact into a fresh mesh with consecutive cell and half-edge ids.
    PolyMesh compact() const {
        PolyMesh out;
        out.vertices = mesh.vertices;
        out.inclusion = mesh.inclusion;
        std::vector<int> he_new(mesh.half_edges.size(), -1);
        for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
            if (!cell_alive[c])
                continue;
            for (int he : mesh.cells[c].loop) {
                he_new[he] = static_cast<int>(out.half_edges.size());
                out.half_edges.push_back(mesh.half_edges[he]);
            }
        }
        int cell_id = 0;
        for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
            if (!cell_alive[c])
                continue;
            Cell cc;
            cc.loop.reserve(mesh.cells[c].loop.size());
            for (int he : mesh.cells[c].loop)
                cc.loop.push_back(he_new[he]);
            out.cells.push_back(std::move(cc));
            for (int he : out.cells.back().loop)
                out.half_edges[he].cell = cell_id;
            ++cell_id;
        }
        for (HalfEdge& h : out.half_edges)
            if (h.twin >= 0)
                h.twin = he_new[h.twin];
        out.refresh();
        return out;
    }
};

} // namespace

PolyMesh generate_triangulation(const Rect& domain,
                                const std::optional<Inclusion>& inclusion,
                                int base_resolution,
                                int tip_refinement_levels) {
    if (base_resolution < 2)
        throw MeshError("base_resolution must be at least 2");
    if (tip_refinement_levels < 0)
        throw MeshError("tip_refinement_levels must be non-negative");
    if (!(domain.width() > 0.0 && domain.height() > 0.0))
        throw MeshError("domain rectangle is degenerate");

    const int n = base_resolution;
    const double dx = domain.width() / n;
    const double dy = domain.height() / n;

    TriSoup soup;
    soup.vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            soup.vertices.push_back({domain.lo.x + i * dx, domain.lo.y + j * dy});
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };

    soup.tris.reserve(static_cast<std::size_t>(2) * n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            soup.tris.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            soup.tris.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }

    if (inclusion) {
        const Inclusion& inc = *inclusion;
        if (!(inc.length() > 0.0))
            throw MeshError("inclusion endpoints coincide");
        if (!domain.strictly_contains(inc.endpoint_a, kTol) ||
            !domain.strictly_contains(inc.endpoint_b, kTol))
            throw MeshError("inclusion endpoints must be strictly inside the domain");

        const int ia = lattice_index(inc.endpoint_a.x, domain.lo.x, dx, n, "endpoint_a.x");
        const int ja = lattice_index(inc.endpoint_a.y, domain.lo.y, dy, n, "endpoint_a.y");
        const int ib = lattice_index(inc.endpoint_b.x, domain.lo.x, dx, n, "endpoint_b.x");
        const int jb = lattice_index(inc.endpoint_b.y, domain.lo.y, dy, n, "endpoint_b.y");
        const int di = ib - ia;
        const int dj = jb - ja;
        const bool along_edges = (di == 0 && dj != 0) || (dj == 0 && di != 0) || (di == dj && di != 0);
        if (!along_edges)
            throw MeshError("inclusion not representable on the lattice: segment must follow "
                            "horizontal, vertical, or main-diagonal edges");

        for (int level = 0; level < tip_refinement_levels; ++level) {
            refine_around_vertex(soup, vid(ia, ja));
            refine_around_vertex(soup, vid(ib, jb));
        }
    }

    std::vector<std::vector<int>> loops;
    loops.reserve(soup.tris.size());
    for (const auto& t : soup.tris)
        loops.push_back({t[0], t[1], t[2]});
    PolyMesh mesh = build_from_loops(std::move(soup.vertices), loops);
    return mesh;
}

PolyMesh embed_inclusion(const PolyMesh& input, const Inclusion& inclusion) {
    if (!(inclusion.length() > 0.0))
        throw MeshError("inclusion endpoints coincide");
    if (input.inclusion)
        throw MeshError("mesh already has an embedded inclusion");

    PolyMesh mesh = input;

    // Edges lying on the segment (twinned pairs at this point).
    double covered = 0.0;
    std::vector<char> on_gamma(mesh.half_edges.size(), 0);
    for (int he = 0; he < static_cast<int>(mesh.half_edges.size()); ++he) {
        const HalfEdge& h = mesh.half_edges[he];
        if (inclusion.covers_point(mesh.vertices[h.tail], kTol) &&
            inclusion.covers_point(mesh.vertices[h.head], kTol)) {
            on_gamma[he] = 1;
            covered += mesh.edge_length(he);
        }
    }
    // Each geometric edge is counted once per half-edge; interior pairs twice.
    if (std::abs(covered - 2.0 * inclusion.length()) > 1e-9 * std::max(1.0, inclusion.length()))
        throw MeshError("inclusion edge not found in mesh: segment does not conform to mesh edges");
    if (find_vertex(mesh, inclusion.endpoint_a) < 0 || find_vertex(mesh, inclusion.endpoint_b) < 0)
        throw MeshError("inclusion tips are not mesh vertices");

    // Duplicate vertices strictly interior to the segment: cells on the minus
    // side are re-pointed to the copy, so the sides are topologically joined
    // only at the tips.
    const int n_orig_vertices = mesh.n_vertices();
    for (int v = 0; v < n_orig_vertices; ++v) {
        const Point2 p = mesh.vertices[v];
        if (!inclusion.covers_point(p, kTol))
            continue;
        if (distance(p, inclusion.endpoint_a) <= kTol || distance(p, inclusion.endpoint_b) <= kTol)
            continue;  // tips are shared
        const int copy = mesh.n_vertices();
        bool used = false;
        for (HalfEdge& h : mesh.half_edges) {
            if (h.tail != v && h.head != v)
                continue;
            if (inclusion.side_of(mesh.cells[h.cell].centroid) > 0.0)
                continue;  // plus side keeps the original id
            if (h.tail == v)
                h.tail = copy;
            if (h.head == v)
                h.head = copy;
            used = true;
        }
        if (used)
            mesh.vertices.push_back(p);
    }

    // Sever the twin links across the inclusion and flag the sides: a
    // counter-clockwise cell on the plus side traverses the segment along its
    // tangent, the minus side backwards.
    for (int he = 0; he < static_cast<int>(mesh.half_edges.size()); ++he) {
        if (!on_gamma[he])
            continue;
        HalfEdge& h = mesh.half_edges[he];
        if (h.twin >= 0) {
            mesh.half_edges[h.twin].twin = -1;
            h.twin = -1;
        }
        const Point2 d = mesh.vertices[h.head] - mesh.vertices[h.tail];
        h.side = dot(d, inclusion.tangent()) > 0.0 ? InclusionSide::plus : InclusionSide::minus;
        h.on_outer_boundary = false;
    }

    mesh.inclusion = inclusion;
    mesh.refresh();
    return mesh;
}

PolyMesh agglomerate(const PolyMesh& input, double measure_threshold_ratio, bool force_tip_cuts) {
    if (measure_threshold_ratio < 0.0 || measure_threshold_ratio >= 1.0)
        throw MeshError("measure_threshold_ratio must lie in [0, 1)");

    MergeWorkspace ws(input);
    const double mean_measure = input.total_measure() / std::max(1, input.n_cells());

    if (force_tip_cuts) {
        if (!input.inclusion)
            throw MeshError("force_tip_cuts requires an embedded inclusion");
        for (const Point2 tip : {input.inclusion->endpoint_a, input.inclusion->endpoint_b}) {
            const int tv = find_vertex(ws.mesh, tip);
            if (tv < 0)
                throw MeshError("inclusion tip is not a mesh vertex");
            std::set<int> incident;
            for (std::size_t i = 0; i < ws.mesh.half_edges.size(); ++i) {
                const HalfEdge& h = ws.mesh.half_edges[i];
                if (ws.he_alive[i] && (h.tail == tv || h.head == tv))
                    incident.insert(h.cell);
            }
            // Glue the whole one-ring; the slit along the inclusion keeps the
            // loop simple because the two sides carry distinct vertex copies.
            int survivor = *incident.begin();
            bool progress = true;
            while (progress) {
                progress = false;
                for (int c : incident) {
                    if (c == survivor || !ws.cell_alive[c])
                        continue;
                    if (ws.merge(survivor, c)) {
                        survivor = std::min(survivor, c);
                        progress = true;
                    }
                }
            }
            ws.mesh.cells[survivor].is_cut = true;
            for (int c : incident)
                if (ws.cell_alive[c] && c != survivor)
                    std::cerr << "polydarcy: warning: tip cell " << c
                              << " could not be glued into the cut cell\n";
        }
    }

    if (measure_threshold_ratio > 0.0) {
        const double threshold = measure_threshold_ratio * mean_measure;
        std::vector<char> kept(ws.mesh.cells.size(), 0);
        for (;;) {
            // Smallest alive cell below threshold, ties toward the lower id.
            int small = -1;
            for (int c = 0; c < ws.mesh.n_cells(); ++c) {
                if (!ws.cell_alive[c] || kept[c])
                    continue;
                if (ws.mesh.cells[c].measure >= threshold)
                    continue;
                if (small < 0 || ws.mesh.cells[c].measure < ws.mesh.cells[small].measure)
                    small = c;
            }
            if (small < 0)
                break;

            std::map<int, double> neighbor_len;
            for (int he : ws.mesh.cells[small].loop) {
                const HalfEdge& h = ws.mesh.half_edges[he];
                if (h.twin < 0)
                    continue;  // outer boundary or inclusion side: never crossed
                const int nb = ws.mesh.half_edges[h.twin].cell;
                if (nb == small)
                    continue;
                if (ws.mesh.cells[small].is_cut && ws.mesh.cells[nb].is_cut)
                    continue;  // keep one cut cell per tip
                neighbor_len[nb] += ws.mesh.edge_length(he);
            }
            std::vector<std::pair<int, double>> candidates(neighbor_len.begin(), neighbor_len.end());
            std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
                if (a.second != b.second)
                    return a.second > b.second;
                return a.first < b.first;
            });

            bool merged = false;
            for (const auto& [nb, len] : candidates) {
                (void)len;
                if (ws.merge(small, nb)) {
                    merged = true;
                    break;
                }
            }
            if (!merged) {
                kept[small] = 1;
                std::cerr << "polydarcy: warning: keeping small cell " << small
                          << " (no valid merge)\n";
            }
        }
    }

    return ws.compact();
}

} // namespace polydarcy
