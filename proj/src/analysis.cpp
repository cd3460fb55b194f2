#include "polydarcy/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polydarcy/errors.hpp"
#include "polydarcy/locate.hpp"

namespace polydarcy {

double pairwise_sum(const std::vector<double>& terms) {
    if (terms.empty())
        return 0.0;
    std::vector<double> level = terms;
    while (level.size() > 1) {
        std::vector<double> next((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2)
            next[i / 2] = level[i] + level[i + 1];
        if (level.size() % 2)
            next.back() = level.back();
        level = std::move(next);
    }
    return level[0];
}

namespace {

Point2 reference_sample_point(const PolyMesh& ref_mesh, int cell) {
    Point2 p = ref_mesh.cells[cell].centroid;
    if (!ref_mesh.inclusion)
        return p;
    for (int he : ref_mesh.cells[cell].loop) {
        const InclusionSide side = ref_mesh.half_edges[he].side;
        if (side == InclusionSide::none)
            continue;
        const Point2 n = ref_mesh.inclusion->unit_normal();
        const double s = side == InclusionSide::plus ? 1.0 : -1.0;
        p = p + 1e-9 * s * n;
        break;
    }
    return p;
}

} // namespace

std::vector<double> transfer_to_reference(const PolyMesh& coarse_mesh,
                                          const Eigen::VectorXd& coarse_pressure,
                                          const PolyMesh& ref_mesh, bool parallel) {
#ifndef _OPENMP
    (void)parallel;
#endif
    if (coarse_pressure.size() != coarse_mesh.n_cells())
        throw AnalysisError("transfer: pressure vector does not match the coarse mesh");

    const PointLocator locator(coarse_mesh);
    const int n_ref = ref_mesh.n_cells();
    std::vector<double> out(n_ref, 0.0);
    std::vector<int> failed(n_ref, -1);

#pragma omp parallel for schedule(static) if (parallel)
    for (int r = 0; r < n_ref; ++r) {
        const Point2 p = reference_sample_point(ref_mesh, r);
        const int c = locator.try_locate(p);
        if (c < 0)
            failed[r] = r;
        else
            out[r] = coarse_pressure(c);
    }
    for (int r = 0; r < n_ref; ++r)
        if (failed[r] >= 0)
            throw AnalysisError("transfer: failed to locate the sample point of reference cell " +
                                std::to_string(r));
    return out;
}

ErrorResult relative_l2_error(const std::vector<double>& p_transferred,
                              const Eigen::VectorXd& p_ref, const PolyMesh& ref_mesh,
                              bool parallel) {
#ifndef _OPENMP
    (void)parallel;
#endif
    const int n = ref_mesh.n_cells();
    if (static_cast<int>(p_transferred.size()) != n || p_ref.size() != n)
        throw AnalysisError("error norm: field lengths do not match the reference mesh");
    const double range = p_ref.maxCoeff() - p_ref.minCoeff();
    if (!(range > 0.0))
        throw AnalysisError("error norm: reference pressure range is zero");

    ErrorResult res;
    res.cell_error.resize(n);
    std::vector<double> terms(n);
#pragma omp parallel for schedule(static) if (parallel)
    for (int c = 0; c < n; ++c) {
        const double d = p_transferred[c] - p_ref(c);
        res.cell_error[c] = std::abs(d);
        terms[c] = ref_mesh.cells[c].measure * d * d;
    }
    res.err = std::sqrt(pairwise_sum(terms)) / range;
    return res;
}

std::vector<ConvergenceRecord> convergence_records(const std::vector<double>& h,
                                                   const std::vector<double>& err) {
    if (h.size() != err.size())
        throw AnalysisError("convergence table: h and err lengths differ");
    if (h.empty())
        throw AnalysisError("convergence table: no records");
    std::vector<ConvergenceRecord> records(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (i > 0 && !(h[i] < h[i - 1]))
            throw AnalysisError("convergence table: mesh sizes must strictly decrease");
        records[i].h = h[i];
        records[i].err = err[i];
        if (i > 0)
            records[i].rate = std::log(err[i - 1] / err[i]) / std::log(h[i - 1] / h[i]);
    }
    return records;
}

std::string format_convergence_table(const std::vector<ConvergenceRecord>& records) {
    std::ostringstream os;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%12s %12s %8s\n", "h", "err(p)", "rate");
    os << buf;
    for (const auto& r : records) {
        if (r.rate)
            std::snprintf(buf, sizeof(buf), "%12.4e %12.4e %8.2f\n", r.h, r.err, *r.rate);
        else
            std::snprintf(buf, sizeof(buf), "%12.4e %12.4e %8s\n", r.h, r.err, "-");
        os << buf;
    }
    return os.str();
}

void write_convergence_csv(const std::vector<ConvergenceRecord>& records,
                           const std::string& path) {
    std::ofstream os(path);
    if (!os)
        throw AnalysisError("cannot open " + path + " for writing");
    os << "h,err,rate\n";
    char buf[96];
    for (const auto& r : records) {
        if (r.rate)
            std::snprintf(buf, sizeof(buf), "%.6e,%.6e,%.6f\n", r.h, r.err, *r.rate);
        else
            std::snprintf(buf, sizeof(buf), "%.6e,%.6e,\n", r.h, r.err);
        os << buf;
    }
    if (!os)
        throw AnalysisError("write failed for " + path);
}

} // namespace polydarcy
