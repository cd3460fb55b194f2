#include "polydarcy/locate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polydarcy/errors.hpp"

namespace polydarcy {

bool cell_contains(const PolyMesh& mesh, int cell, Point2 p, double tol) {
    const auto& loop = mesh.cells[cell].loop;
    for (int he : loop) {
        const HalfEdge& h = mesh.half_edges[he];
        if (on_segment(p, mesh.vertices[h.tail], mesh.vertices[h.head], tol))
            return true;
    }
    int winding = 0;
    for (int he : loop) {
        const HalfEdge& h = mesh.half_edges[he];
        const Point2 a = mesh.vertices[h.tail];
        const Point2 b = mesh.vertices[h.head];
        if (a.y <= p.y) {
            if (b.y > p.y && cross(b - a, p - a) > 0.0)
                ++winding;
        } else {
            if (b.y <= p.y && cross(b - a, p - a) < 0.0)
                --winding;
        }
    }
    return winding != 0;
}

int locate_point(const PolyMesh& mesh, Point2 p, double tol) {
    for (int c = 0; c < mesh.n_cells(); ++c)
        if (cell_contains(mesh, c, p, tol))
            return c;
    throw MeshError("location error: point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                    ") outside all cells");
}

PointLocator::PointLocator(const PolyMesh& mesh, double tol) : mesh_(mesh), tol_(tol) {
    double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const Point2& v : mesh.vertices) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    bbox_ = {{xmin, ymin}, {xmax, ymax}};

    const int target = std::max(1, static_cast<int>(std::sqrt(double(std::max(1, mesh.n_cells())))));
    nx_ = ny_ = target;
    buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});

    const double wx = std::max(bbox_.width(), 1e-300);
    const double wy = std::max(bbox_.height(), 1e-300);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        double cxmin = std::numeric_limits<double>::max(), cxmax = -cxmin;
        double cymin = cxmin, cymax = -cxmin;
        for (int he : mesh.cells[c].loop) {
            const Point2 v = mesh.vertices[mesh.half_edges[he].tail];
            cxmin = std::min(cxmin, v.x);
            cxmax = std::max(cxmax, v.x);
            cymin = std::min(cymin, v.y);
            cymax = std::max(cymax, v.y);
        }
        const int i0 = std::clamp(static_cast<int>((cxmin - tol - xmin) / wx * nx_), 0, nx_ - 1);
        const int i1 = std::clamp(static_cast<int>((cxmax + tol - xmin) / wx * nx_), 0, nx_ - 1);
        const int j0 = std::clamp(static_cast<int>((cymin - tol - ymin) / wy * ny_), 0, ny_ - 1);
        const int j1 = std::clamp(static_cast<int>((cymax + tol - ymin) / wy * ny_), 0, ny_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(c);
    }
    // Cells are inserted in ascending id order already; keep that invariant
    // explicit for the lowest-id tie rule.
    for (auto& b : buckets_)
        std::sort(b.begin(), b.end());
}

int PointLocator::bucket_of(Point2 p) const {
    const double wx = std::max(bbox_.width(), 1e-300);
    const double wy = std::max(bbox_.height(), 1e-300);
    const int i = std::clamp(static_cast<int>((p.x - bbox_.lo.x) / wx * nx_), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>((p.y - bbox_.lo.y) / wy * ny_), 0, ny_ - 1);
    return j * nx_ + i;
}

int PointLocator::try_locate(Point2 p) const {
    if (!bbox_.contains(p, tol_))
        return -1;
    for (int c : buckets_[bucket_of(p)])
        if (cell_contains(mesh_, c, p, tol_))
            return c;
    // Rare fallback for points straddling bucket borders within tolerance.
    for (int c = 0; c < mesh_.n_cells(); ++c)
        if (cell_contains(mesh_, c, p, tol_))
            return c;
    return -1;
}

int PointLocator::locate(Point2 p) const {
    const int c = try_locate(p);
    if (c < 0)
        throw MeshError("location error: point (" + std::to_string(p.x) + ", " +
                        std::to_string(p.y) + ") outside all cells");
    return c;
}

} // namespace polydarcy
