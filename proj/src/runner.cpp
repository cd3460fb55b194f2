#include "polydarcy/runner.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "polydarcy/assemble.hpp"
#include "polydarcy/dof_map.hpp"
#include "polydarcy/errors.hpp"
#include "polydarcy/generate.hpp"
#include "polydarcy/mesh_io.hpp"

namespace polydarcy {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Point2 parse_point(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(what + " must be a [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void fnv_append(std::uint64_t& h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
}

} // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& origin) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }

    try {
        RunConfig cfg;
        if (j.value("schema", "") != "polydarcy-config/1")
            throw ConfigError(origin + ": missing or unsupported schema (expected "
                              "\"polydarcy-config/1\")");

        if (j.contains("domain")) {
            cfg.domain.lo = parse_point(j["domain"].at("min"), "domain.min");
            cfg.domain.hi = parse_point(j["domain"].at("max"), "domain.max");
        }
        if (j.contains("inclusion") && !j["inclusion"].is_null()) {
            const json& ji = j["inclusion"];
            Inclusion inc;
            inc.endpoint_a = parse_point(ji.at("a"), "inclusion.a");
            inc.endpoint_b = parse_point(ji.at("b"), "inclusion.b");
            inc.p_plus = ji.at("p_plus").get<double>();
            inc.p_minus = ji.at("p_minus").get<double>();
            cfg.inclusion = inc;
        }
        if (j.contains("permeability")) {
            const json& jk = j["permeability"];
            if (jk.is_number()) {
                cfg.permeability = jk.get<double>() * Eigen::Matrix2d::Identity();
            } else if (jk.is_array() && jk.size() == 2) {
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c)
                        cfg.permeability(r, c) = jk.at(r).at(c).get<double>();
            } else {
                throw ConfigError("permeability must be a number or a 2x2 array");
            }
        }
        cfg.source = j.value("source", 0.0);

        if (!j.contains("levels") || !j["levels"].is_array() || j["levels"].empty())
            throw ConfigError(origin + ": levels must be a non-empty array");
        for (const json& jl : j["levels"]) {
            LevelSpec lvl;
            lvl.base_resolution = jl.at("base_resolution").get<int>();
            lvl.tip_refinement_levels = jl.value("tip_refinement_levels", 0);
            lvl.measure_threshold_ratio = jl.value("measure_threshold_ratio", 0.0);
            cfg.levels.push_back(lvl);
        }
        if (j.contains("reference")) {
            cfg.reference.base_resolution = j["reference"].at("base_resolution").get<int>();
            cfg.reference.tip_refinement_levels = j["reference"].value("tip_refinement_levels", 0);
        }
        cfg.force_tip_cuts = j.value("force_tip_cuts", true);

        const std::string stab = j.value("stabilization", "trace");
        if (stab == "trace")
            cfg.stabilization = StabilizationScaling::trace_scaled;
        else if (stab == "measure")
            cfg.stabilization = StabilizationScaling::measure_scaled;
        else
            throw ConfigError("stabilization must be \"trace\" or \"measure\"");

        const std::string solver = j.value("solver", "direct");
        if (solver == "direct")
            cfg.solver = SolverKind::direct;
        else if (solver == "schur")
            cfg.solver = SolverKind::schur;
        else
            throw ConfigError("solver must be \"direct\" or \"schur\"");

        cfg.output_dir = j.value("output_dir", "out");
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_run_config(ss.str(), path);
}

void validate_config(const RunConfig& cfg) {
    if (!(cfg.domain.width() > 0.0 && cfg.domain.height() > 0.0))
        throw ConfigError("domain rectangle is degenerate");
    if (cfg.inclusion) {
        if (!(cfg.inclusion->length() > 0.0))
            throw ConfigError("inclusion endpoints coincide");
        if (!cfg.domain.strictly_contains(cfg.inclusion->endpoint_a) ||
            !cfg.domain.strictly_contains(cfg.inclusion->endpoint_b))
            throw ConfigError("inclusion endpoints must be strictly inside the domain "
                              "(fully immersed)");
    }
    if (cfg.levels.empty())
        throw ConfigError("at least one level is required");
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
        const LevelSpec& l = cfg.levels[i];
        const std::string where = "levels[" + std::to_string(i) + "]";
        if (l.base_resolution < 2)
            throw ConfigError(where + ".base_resolution must be at least 2");
        if (l.tip_refinement_levels < 0)
            throw ConfigError(where + ".tip_refinement_levels must be non-negative");
        if (l.measure_threshold_ratio < 0.0 || l.measure_threshold_ratio >= 1.0)
            throw ConfigError(where + ".measure_threshold_ratio must lie in [0, 1)");
        if (i > 0 && cfg.levels[i].base_resolution <= cfg.levels[i - 1].base_resolution)
            throw ConfigError("levels must strictly increase in base_resolution "
                              "(strictly decreasing expected h)");
    }
    if (cfg.reference.base_resolution < 2)
        throw ConfigError("reference.base_resolution must be at least 2");
    {
        Eigen::Matrix2d k = cfg.permeability;
        if (std::abs(k(0, 1) - k(1, 0)) > 1e-14 * k.cwiseAbs().maxCoeff())
            throw ConfigError("permeability tensor must be symmetric");
        if (!(k(0, 0) > 0.0) || !(k.determinant() > 0.0))
            throw ConfigError("permeability tensor must be positive definite");
    }
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory " + cfg.output_dir + ": " + ec.message());
    const fs::path probe = fs::path(cfg.output_dir) / ".write-probe";
    std::ofstream os(probe);
    if (!os)
        throw ConfigError("output directory " + cfg.output_dir + " is not writable");
    os.close();
    fs::remove(probe, ec);
}

std::uint64_t config_hash(const RunConfig& cfg) {
    std::uint64_t h = 1469598103934665603ULL;
    fnv_append(h, "polydarcy-config/1");
    fnv_append(h, fmt17(cfg.domain.lo.x) + "," + fmt17(cfg.domain.lo.y) + "," +
                      fmt17(cfg.domain.hi.x) + "," + fmt17(cfg.domain.hi.y));
    if (cfg.inclusion) {
        const Inclusion& inc = *cfg.inclusion;
        fnv_append(h, fmt17(inc.endpoint_a.x) + "," + fmt17(inc.endpoint_a.y) + "," +
                          fmt17(inc.endpoint_b.x) + "," + fmt17(inc.endpoint_b.y) + "," +
                          fmt17(inc.p_plus) + "," + fmt17(inc.p_minus));
    }
    fnv_append(h, fmt17(cfg.permeability(0, 0)) + "," + fmt17(cfg.permeability(0, 1)) + "," +
                      fmt17(cfg.permeability(1, 0)) + "," + fmt17(cfg.permeability(1, 1)));
    fnv_append(h, fmt17(cfg.source));
    fnv_append(h, std::to_string(cfg.reference.base_resolution) + "," +
                      std::to_string(cfg.reference.tip_refinement_levels));
    fnv_append(h, cfg.stabilization == StabilizationScaling::trace_scaled ? "trace" : "measure");
    fnv_append(h, cfg.solver == SolverKind::direct ? "direct" : "schur");
    return h;
}

DarcyProblem make_problem(const RunConfig& cfg) {
    DarcyProblem p;
    p.permeability.tensor = cfg.permeability;
    p.source = constant_field(cfg.source);
    if (cfg.inclusion)
        p.boundary = BoundaryData::from_inclusion(*cfg.inclusion);
    return p;
}

StabilizationParams make_stabilization(const RunConfig& cfg) {
    StabilizationParams sp;
    sp.scaling_mode = cfg.stabilization;
    return sp;
}

PolyMesh build_level_mesh(const RunConfig& cfg, const LevelSpec& level) {
    PolyMesh mesh = generate_triangulation(cfg.domain, cfg.inclusion, level.base_resolution,
                                           cfg.inclusion ? level.tip_refinement_levels : 0);
    if (cfg.inclusion)
        mesh = embed_inclusion(mesh, *cfg.inclusion);
    const bool tip_cuts = cfg.force_tip_cuts && cfg.inclusion.has_value();
    if (tip_cuts || level.measure_threshold_ratio > 0.0)
        mesh = agglomerate(mesh, level.measure_threshold_ratio, tip_cuts);
    mesh.validate();
    return mesh;
}

PolyMesh build_reference_mesh(const RunConfig& cfg) {
    PolyMesh mesh = generate_triangulation(cfg.domain, cfg.inclusion,
                                           cfg.reference.base_resolution,
                                           cfg.inclusion ? cfg.reference.tip_refinement_levels : 0);
    if (cfg.inclusion)
        mesh = embed_inclusion(mesh, *cfg.inclusion);
    mesh.validate();
    return mesh;
}

DiscreteSolution solve_on_mesh(const RunConfig& cfg, const PolyMesh& mesh) {
    const DofMap dm = build_dof_map(mesh);
    const SaddleSystem sys = assemble(mesh, dm, make_problem(cfg), make_stabilization(cfg));
    SolveOptions opts;
    opts.kind = cfg.solver;
    return solve(sys, mesh, opts);
}

ReferenceSolution compute_reference(const RunConfig& cfg, bool use_cache) {
    char hash_hex[24];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016" PRIx64, config_hash(cfg));
    const fs::path cache_dir = fs::path(cfg.output_dir) / "cache";
    const fs::path cache_file = cache_dir / ("reference-" + std::string(hash_hex) + ".dat");

    ReferenceSolution ref;
    ref.mesh = build_reference_mesh(cfg);
    const int n_p = ref.mesh.n_cells();

    if (use_cache && fs::exists(cache_file)) {
        std::ifstream is(cache_file);
        std::string header;
        std::getline(is, header);
        int cells = -1, edges = -1, verts = -1;
        is >> cells >> edges >> verts;
        if (header == "polydarcy-reference-cache 1" && cells == n_p &&
            edges == ref.mesh.edge_count && verts == ref.mesh.n_vertices()) {
            bool ok = static_cast<bool>(is >> ref.solver_residual >> ref.conservation_residual);
            ref.pressure.resize(n_p);
            for (int i = 0; i < n_p && ok; ++i)
                ok = static_cast<bool>(is >> ref.pressure(i));
            if (ok) {
                ref.min_pressure = ref.pressure.minCoeff();
                ref.max_pressure = ref.pressure.maxCoeff();
                return ref;
            }
        }
        // Stale or corrupt cache entry: fall through and recompute.
    }

    const DiscreteSolution sol = solve_on_mesh(cfg, ref.mesh);
    ref.pressure = sol.pressure;
    ref.min_pressure = ref.pressure.minCoeff();
    ref.max_pressure = ref.pressure.maxCoeff();
    ref.solver_residual = sol.solver_residual;
    ref.conservation_residual = sol.conservation_residual;

    if (use_cache) {
        std::error_code ec;
        fs::create_directories(cache_dir, ec);
        std::ofstream os(cache_file);
        if (os) {
            os << "polydarcy-reference-cache 1\n";
            os << n_p << " " << ref.mesh.edge_count << " " << ref.mesh.n_vertices() << "\n";
            os << fmt17(ref.solver_residual) << " " << fmt17(ref.conservation_residual) << "\n";
            for (int i = 0; i < n_p; ++i)
                os << fmt17(ref.pressure(i)) << "\n";
        }
    }
    return ref;
}

ConvergenceStudy run_convergence(const RunConfig& cfg, bool parallel_levels, bool write_outputs) {
    validate_config(cfg);
    ConvergenceStudy study;
    study.reference = compute_reference(cfg);

    struct LevelData {
        PolyMesh mesh;
        DiscreteSolution sol;
    };
    auto run_level = [&](const LevelSpec& spec) {
        LevelData data;
        data.mesh = build_level_mesh(cfg, spec);
        data.sol = solve_on_mesh(cfg, data.mesh);
        return data;
    };

    std::vector<std::future<LevelData>> futures;
    if (parallel_levels) {
        futures.reserve(cfg.levels.size());
        for (const LevelSpec& spec : cfg.levels)
            futures.push_back(std::async(std::launch::async, run_level, spec));
    }

    std::vector<double> hs, errs;
    const fs::path out(cfg.output_dir);
    auto write_partial = [&]() {
        if (!write_outputs || hs.empty())
            return;
        try {
            write_convergence_csv(convergence_records(hs, errs),
                                  (out / "convergence.csv").string());
        } catch (const std::exception&) {
            // Preserving partial results is best effort on the failure path.
        }
    };
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
        LevelData data;
        std::vector<double> p_t;
        ErrorResult er;
        try {
            data = parallel_levels ? futures[i].get() : run_level(cfg.levels[i]);
            p_t = transfer_to_reference(data.mesh, data.sol.pressure, study.reference.mesh);
            er = relative_l2_error(p_t, study.reference.pressure, study.reference.mesh);
        } catch (...) {
            write_partial();
            throw;
        }

        LevelResult lr;
        lr.spec = cfg.levels[i];
        lr.h = data.mesh.mesh_size_h;
        lr.err = er.err;
        lr.n_cells = data.mesh.n_cells();
        for (const Cell& c : data.mesh.cells)
            lr.n_cut_cells += c.is_cut ? 1 : 0;
        lr.solver_residual = data.sol.solver_residual;
        lr.conservation_residual = data.sol.conservation_residual;
        {
            StabilizationParams sp = make_stabilization(cfg);
            CellPermeability k;
            k.tensor = cfg.permeability;
            measure_spectral_equivalence(data.mesh, k, sp);
            lr.iota_star_est = sp.iota_star_est;
            lr.iota_sup_est = sp.iota_sup_est;
        }
        study.levels.push_back(lr);
        study.level_cell_error.push_back(er.cell_error);
        hs.push_back(lr.h);
        errs.push_back(lr.err);

        if (write_outputs) {
            const std::string tag = "level" + std::to_string(i);
            std::vector<double> p(data.sol.pressure.data(),
                                  data.sol.pressure.data() + data.sol.pressure.size());
            write_vtk(data.mesh, (out / (tag + "_solution.vtk")).string(), {{"p", p}});
            write_vtk(study.reference.mesh, (out / (tag + "_error.vtk")).string(),
                      {{"err_p", er.cell_error}, {"p", p_t}});
        }
    }

    study.records = convergence_records(hs, errs);
    study.table_text = format_convergence_table(study.records);

    if (write_outputs) {
        write_convergence_csv(study.records, (out / "convergence.csv").string());
        std::ofstream ts(out / "convergence.txt");
        ts << study.table_text;
        std::vector<double> p_ref(study.reference.pressure.data(),
                                  study.reference.pressure.data() +
                                      study.reference.pressure.size());
        write_vtk(study.reference.mesh, (out / "reference_solution.vtk").string(), {{"p", p_ref}});
        write_run_metadata(cfg, study, (out / "run_metadata.json").string());
    }
    return study;
}

void write_run_metadata(const RunConfig& cfg, const ConvergenceStudy& study,
                        const std::string& path) {
    json meta;
    meta["schema"] = "polydarcy-run-metadata/1";
    char hash_hex[24];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016" PRIx64, config_hash(cfg));
    meta["config_hash"] = hash_hex;
    meta["mesh_size_definition"] =
        "max over cells of max pairwise loop-vertex distance (slit ignored)";
    meta["stabilization"] =
        cfg.stabilization == StabilizationScaling::trace_scaled ? "trace" : "measure";
    meta["solver"] = cfg.solver == SolverKind::direct ? "direct" : "schur";
    meta["reference"] = {{"base_resolution", cfg.reference.base_resolution},
                         {"tip_refinement_levels", cfg.reference.tip_refinement_levels},
                         {"cells", study.reference.mesh.n_cells()},
                         {"pressure_min", study.reference.min_pressure},
                         {"pressure_max", study.reference.max_pressure},
                         {"solver_residual", study.reference.solver_residual},
                         {"conservation_residual", study.reference.conservation_residual}};
    meta["levels"] = json::array();
    for (const LevelResult& l : study.levels)
        meta["levels"].push_back({{"base_resolution", l.spec.base_resolution},
                                  {"tip_refinement_levels", l.spec.tip_refinement_levels},
                                  {"measure_threshold_ratio", l.spec.measure_threshold_ratio},
                                  {"cells", l.n_cells},
                                  {"cut_cells", l.n_cut_cells},
                                  {"h", l.h},
                                  {"err", l.err},
                                  {"solver_residual", l.solver_residual},
                                  {"conservation_residual", l.conservation_residual},
                                  {"iota_star_est", l.iota_star_est},
                                  {"iota_sup_est", l.iota_sup_est}});
    std::ofstream os(path);
    if (os)
        os << meta.dump(2) << "\n";
}

} // namespace polydarcy
