#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "polydarcy/assemble.hpp"
#include "polydarcy/dof_map.hpp"
#include "polydarcy/errors.hpp"
#include "polydarcy/mesh_io.hpp"
#include "polydarcy/runner.hpp"

namespace fs = std::filesystem;
using namespace polydarcy;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::string stabilization;
    std::string solver;
    std::string export_matrix;
    int level = 0;
    bool parallel_levels = false;
};

RunConfig load_and_override(const CliOptions& cli) {
    RunConfig cfg = load_run_config(cli.config_path);
    if (!cli.out_dir.empty())
        cfg.output_dir = cli.out_dir;
    if (cli.stabilization == "trace")
        cfg.stabilization = StabilizationScaling::trace_scaled;
    else if (cli.stabilization == "measure")
        cfg.stabilization = StabilizationScaling::measure_scaled;
    else if (!cli.stabilization.empty())
        throw ConfigError("--stabilization must be 'trace' or 'measure'");
    if (cli.solver == "direct")
        cfg.solver = SolverKind::direct;
    else if (cli.solver == "schur")
        cfg.solver = SolverKind::schur;
    else if (!cli.solver.empty())
        throw ConfigError("--solver must be 'direct' or 'schur'");
    validate_config(cfg);
    return cfg;
}

int count_cut_cells(const PolyMesh& mesh) {
    int n = 0;
    for (const Cell& c : mesh.cells)
        n += c.is_cut ? 1 : 0;
    return n;
}

void cmd_mesh(const CliOptions& cli) {
    const RunConfig cfg = load_and_override(cli);
    const fs::path out(cfg.output_dir);
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
        const PolyMesh mesh = build_level_mesh(cfg, cfg.levels[i]);
        mesh.validate();
        const std::string tag = "level" + std::to_string(i);
        write_poly_mesh(mesh, (out / (tag + ".polymesh")).string());
        write_vtk(mesh, (out / (tag + "_mesh.vtk")).string());
        std::printf("%s: cells %d  edges %d  h %.6e  cut-cells %d\n", tag.c_str(), mesh.n_cells(),
                    mesh.edge_count, mesh.mesh_size_h, count_cut_cells(mesh));
    }
}

void cmd_solve(const CliOptions& cli) {
    const RunConfig cfg = load_and_override(cli);
    if (cli.level < 0 || cli.level >= static_cast<int>(cfg.levels.size()))
        throw ConfigError("--level " + std::to_string(cli.level) + " out of range (config has " +
                          std::to_string(cfg.levels.size()) + " levels)");
    const PolyMesh mesh = build_level_mesh(cfg, cfg.levels[cli.level]);
    const DofMap dm = build_dof_map(mesh);
    const SaddleSystem sys = assemble(mesh, dm, make_problem(cfg), make_stabilization(cfg));
    if (!cli.export_matrix.empty())
        write_matrix_market(sys, cli.export_matrix);
    SolveOptions opts;
    opts.kind = cfg.solver;
    const DiscreteSolution sol = solve(sys, mesh, opts);

    const fs::path out(cfg.output_dir);
    const std::string tag = "level" + std::to_string(cli.level);
    std::vector<double> p(sol.pressure.data(), sol.pressure.data() + sol.pressure.size());
    write_vtk(mesh, (out / (tag + "_solution.vtk")).string(), {{"p", p}});

    std::printf("%s: dofs %d (velocity %d + pressure %d)\n", tag.c_str(), sys.n_u + sys.n_p,
                sys.n_u, sys.n_p);
    std::printf("%s: pressure range [%.6e, %.6e]\n", tag.c_str(), sol.pressure.minCoeff(),
                sol.pressure.maxCoeff());
    std::printf("%s: solver residual %.3e  max conservation residual %.3e\n", tag.c_str(),
                sol.solver_residual, sol.conservation_residual);
}

void cmd_convergence(const CliOptions& cli) {
    const RunConfig cfg = load_and_override(cli);
    const ConvergenceStudy study = run_convergence(cfg, cli.parallel_levels, true);
    std::fputs(study.table_text.c_str(), stdout);
    std::printf("reference: %d cells, pressure range [%.6e, %.6e]\n",
                study.reference.mesh.n_cells(), study.reference.min_pressure,
                study.reference.max_pressure);
    for (std::size_t i = 0; i < study.levels.size(); ++i)
        std::printf("level%zu: cells %d  cut-cells %d  conservation %.3e\n", i,
                    study.levels[i].n_cells, study.levels[i].n_cut_cells,
                    study.levels[i].conservation_residual);
    std::printf("wrote %s/convergence.csv\n", cfg.output_dir.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed virtual element solver for Darcy flow with an immersed inclusion"};
    app.require_subcommand(1);

    CliOptions cli;

    CLI::App* mesh_cmd = app.add_subcommand("mesh", "Generate the mesh family and write "
                                                    "poly-mesh + VTK files");
    CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one family level and write the "
                                                      "pressure field");
    CLI::App* conv_cmd = app.add_subcommand("convergence", "Run all levels against the reference "
                                                           "and emit the error table");
    for (CLI::App* sub : {mesh_cmd, solve_cmd, conv_cmd}) {
        sub->add_option("--config", cli.config_path, "JSON run configuration")->required();
        sub->add_option("--out", cli.out_dir, "Output directory (overrides config)");
        sub->add_option("--stabilization", cli.stabilization,
                        "Stabilization scaling: trace | measure");
        sub->add_option("--solver", cli.solver, "Linear solver: direct | schur");
    }
    solve_cmd->add_option("--level", cli.level, "Family level index (default 0)");
    solve_cmd->add_option("--export-matrix", cli.export_matrix,
                          "Write the assembled block system in MatrixMarket format");
    conv_cmd->add_flag("--parallel-levels", cli.parallel_levels, "Run family levels concurrently");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_config;
    }

    try {
        if (mesh_cmd->parsed())
            cmd_mesh(cli);
        else if (solve_cmd->parsed())
            cmd_solve(cli);
        else if (conv_cmd->parsed())
            cmd_convergence(cli);
        return exit_ok;
    } catch (const ConfigError& e) {
        std::cerr << "error (config): " << e.what() << "\n";
        return exit_config;
    } catch (const MeshError& e) {
        std::cerr << "error (mesh): " << e.what() << "\n";
        return exit_mesh;
    } catch (const SolverError& e) {
        std::cerr << "error (solver): " << e.what() << "\n";
        return exit_solver;
    } catch (const AnalysisError& e) {
        std::cerr << "error (analysis): " << e.what() << "\n";
        return exit_analysis;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
