#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polydarcy/analysis.hpp"
#include "polydarcy/mesh.hpp"
#include "polydarcy/problem.hpp"
#include "polydarcy/solve.hpp"
#include "polydarcy/vem.hpp"

namespace polydarcy {

struct LevelSpec {
    int base_resolution = 8;
    int tip_refinement_levels = 0;
    double measure_threshold_ratio = 0.0;
};

struct ReferenceSpec {
    int base_resolution = 192;
    int tip_refinement_levels = 6;
};

// One JSON document (schema "polydarcy-config/1") describing a full
// experiment: domain, inclusion data, coefficients, the mesh family and the
// reference grid.
struct RunConfig {
    Rect domain{{0.0, 0.0}, {1.0, 1.0}};
    std::optional<Inclusion> inclusion;
    Eigen::Matrix2d permeability = Eigen::Matrix2d::Identity();
    double source = 0.0;
    std::vector<LevelSpec> levels;
    ReferenceSpec reference;
    bool force_tip_cuts = true;
    StabilizationScaling stabilization = StabilizationScaling::trace_scaled;
    SolverKind solver = SolverKind::direct;
    std::string output_dir = "out";
};

RunConfig load_run_config(const std::string& path);  // throws ConfigError
RunConfig parse_run_config(const std::string& json_text, const std::string& origin);
// Field checks + output directory creation/writability probe.
void validate_config(const RunConfig& cfg);

// Hash of the solve-relevant fields (domain, inclusion, coefficients,
// reference spec, stabilization, solver); keys the on-disk reference cache.
std::uint64_t config_hash(const RunConfig& cfg);

DarcyProblem make_problem(const RunConfig& cfg);
StabilizationParams make_stabilization(const RunConfig& cfg);

// generate -> embed -> agglomerate for one family level.
PolyMesh build_level_mesh(const RunConfig& cfg, const LevelSpec& level);
// Fine triangular grid with the inclusion embedded; never agglomerated.
PolyMesh build_reference_mesh(const RunConfig& cfg);

DiscreteSolution solve_on_mesh(const RunConfig& cfg, const PolyMesh& mesh);

// Reference solution, cached on disk under <output_dir>/cache keyed by
// config_hash; the cached pressures are revalidated against the
// deterministically rebuilt mesh.
ReferenceSolution compute_reference(const RunConfig& cfg, bool use_cache = true);

struct LevelResult {
    LevelSpec spec;
    double h = 0.0;
    double err = 0.0;
    int n_cells = 0;
    int n_cut_cells = 0;
    double solver_residual = 0.0;
    double conservation_residual = 0.0;
    // Measured spectral-equivalence constants of the stabilization on this
    // mesh (reported in run metadata, never asserted).
    double iota_star_est = 0.0;
    double iota_sup_est = 0.0;
};

struct ConvergenceStudy {
    std::vector<LevelResult> levels;
    std::vector<ConvergenceRecord> records;
    ReferenceSolution reference;
    // Per level: |p_T - p_ref| on the reference cells (the err_p field).
    std::vector<std::vector<double>> level_cell_error;
    std::string table_text;
};

// Runs every level plus the reference and emits convergence.csv,
// convergence.txt, run_metadata.json and per-level VTK files into output_dir
// when write_outputs is set. Levels run concurrently with parallel_levels
// (they share no mutable state). On a level failure the records gathered so
// far are still written.
ConvergenceStudy run_convergence(const RunConfig& cfg, bool parallel_levels = false,
                                 bool write_outputs = true);

// Reference spec, mesh-size definition, per-level stats and residuals of a
// finished study, as a small JSON document.
void write_run_metadata(const RunConfig& cfg, const ConvergenceStudy& study,
                        const std::string& path);

} // namespace polydarcy
