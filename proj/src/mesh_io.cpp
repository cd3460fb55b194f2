#include "polydarcy/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "polydarcy/errors.hpp"

namespace polydarcy {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
    throw MeshError("failed to parse " + path + ":" + std::to_string(line) + ": " + what);
}

} // namespace

void write_poly_mesh(const PolyMesh& mesh, const std::string& path) {
    std::ofstream os(path);
    if (!os)
        throw MeshError("cannot open " + path + " for writing");
    os << "poly-mesh 1\n";
    os << "vertices " << mesh.n_vertices() << "\n";
    for (const Point2& v : mesh.vertices)
        os << fmt_double(v.x) << " " << fmt_double(v.y) << "\n";
    os << "cells " << mesh.n_cells() << "\n";
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto ids = mesh.cell_vertices(c);
        os << ids.size();
        for (int v : ids)
            os << " " << v;
        os << "\n";
    }
    if (mesh.inclusion) {
        const Inclusion& inc = *mesh.inclusion;
        os << "inclusion " << fmt_double(inc.endpoint_a.x) << " " << fmt_double(inc.endpoint_a.y)
           << " " << fmt_double(inc.endpoint_b.x) << " " << fmt_double(inc.endpoint_b.y) << " "
           << fmt_double(inc.p_plus) << " " << fmt_double(inc.p_minus) << "\n";
    }
    if (!os)
        throw MeshError("write failed for " + path);
}

PolyMesh read_poly_mesh(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw MeshError("cannot open " + path);

    int lineno = 0;
    auto next_line = [&](std::string& line) {
        while (std::getline(is, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (!line.empty())
                return true;
        }
        return false;
    };

    std::string line;
    if (!next_line(line) || line != "poly-mesh 1")
        parse_fail(path, lineno, "expected header 'poly-mesh 1'");

    if (!next_line(line))
        parse_fail(path, lineno, "expected 'vertices N'");
    std::istringstream vs(line);
    std::string kw;
    int n_vertices = -1;
    if (!(vs >> kw >> n_vertices) || kw != "vertices" || n_vertices < 0)
        parse_fail(path, lineno, "expected 'vertices N'");

    std::vector<Point2> vertices(n_vertices);
    for (int i = 0; i < n_vertices; ++i) {
        if (!next_line(line))
            parse_fail(path, lineno, "unexpected end of file in vertex list");
        std::istringstream ls(line);
        if (!(ls >> vertices[i].x >> vertices[i].y))
            parse_fail(path, lineno, "expected 'x y'");
    }

    if (!next_line(line))
        parse_fail(path, lineno, "expected 'cells M'");
    std::istringstream cs(line);
    int n_cells = -1;
    if (!(cs >> kw >> n_cells) || kw != "cells" || n_cells < 0)
        parse_fail(path, lineno, "expected 'cells M'");

    std::vector<std::vector<int>> loops(n_cells);
    for (int c = 0; c < n_cells; ++c) {
        if (!next_line(line))
            parse_fail(path, lineno, "unexpected end of file in cell list");
        std::istringstream ls(line);
        int k = 0;
        if (!(ls >> k) || k < 3)
            parse_fail(path, lineno, "expected 'k v0 ... v{k-1}' with k >= 3");
        loops[c].resize(k);
        for (int i = 0; i < k; ++i)
            if (!(ls >> loops[c][i]))
                parse_fail(path, lineno, "cell loop shorter than its count");
    }

    std::optional<Inclusion> inclusion;
    if (next_line(line)) {
        std::istringstream ls(line);
        Inclusion inc;
        if (!(ls >> kw >> inc.endpoint_a.x >> inc.endpoint_a.y >> inc.endpoint_b.x >>
              inc.endpoint_b.y >> inc.p_plus >> inc.p_minus) ||
            kw != "inclusion")
            parse_fail(path, lineno, "expected 'inclusion ax ay bx by p_plus p_minus'");
        inclusion = inc;
    }

    try {
        return build_from_loops(std::move(vertices), loops, inclusion);
    } catch (const MeshError& e) {
        throw MeshError(path + ": " + e.what());
    }
}

void write_vtk(const PolyMesh& mesh, const std::string& path,
               const std::vector<std::pair<std::string, std::vector<double>>>& cell_fields) {
    std::ofstream os(path);
    if (!os)
        throw MeshError("cannot open " + path + " for writing");

    os << "# vtk DataFile Version 2.0\n";
    os << "polydarcy polygonal mesh (suggested color map: Blue to Red Rainbow)\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";

    os << "POINTS " << mesh.n_vertices() << " double\n";
    for (const Point2& v : mesh.vertices)
        os << fmt_double(v.x) << " " << fmt_double(v.y) << " 0\n";

    std::size_t list_size = 0;
    for (int c = 0; c < mesh.n_cells(); ++c)
        list_size += mesh.cells[c].loop.size() + 1;
    os << "CELLS " << mesh.n_cells() << " " << list_size << "\n";
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto ids = mesh.cell_vertices(c);
        os << ids.size();
        for (int v : ids)
            os << " " << v;
        os << "\n";
    }
    os << "CELL_TYPES " << mesh.n_cells() << "\n";
    for (int c = 0; c < mesh.n_cells(); ++c)
        os << "7\n";  // VTK_POLYGON

    os << "CELL_DATA " << mesh.n_cells() << "\n";
    os << "SCALARS is_cut int 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < mesh.n_cells(); ++c)
        os << (mesh.cells[c].is_cut ? 1 : 0) << "\n";
    for (const auto& [name, values] : cell_fields) {
        if (static_cast<int>(values.size()) != mesh.n_cells())
            throw MeshError("cell field '" + name + "' has wrong length");
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : values)
            os << fmt_double(v) << "\n";
    }
    if (!os)
        throw MeshError("write failed for " + path);
}

} // namespace polydarcy
