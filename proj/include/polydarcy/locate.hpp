#pragma once

#include <vector>

#include "polydarcy/mesh.hpp"

namespace polydarcy {

// Boundary-inclusive containment test: true when p is within tol of the cell
// boundary or has nonzero winding number w.r.t. the loop. The two traversals
// of a slit cancel, so a zero-width cut never excludes points.
bool cell_contains(const PolyMesh& mesh, int cell, Point2 p, double tol = 1e-12);

// Lowest-id cell containing p (linear scan). Throws MeshError when p lies
// outside every cell.
int locate_point(const PolyMesh& mesh, Point2 p, double tol = 1e-12);

// Uniform-grid accelerated point location with semantics identical to
// locate_point: candidates are tested in ascending cell id, so points on
// shared edges resolve to the lowest id.
class PointLocator {
  public:
    explicit PointLocator(const PolyMesh& mesh, double tol = 1e-12);

    int locate(Point2 p) const;      // throws MeshError when not found
    int try_locate(Point2 p) const;  // -1 when not found

  private:
    const PolyMesh& mesh_;
    double tol_;
    Rect bbox_;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> buckets_;

    int bucket_of(Point2 p) const;
};

} // namespace polydarcy
