// Command-line front end: runs a configured benchmark with one of the three
// drivers and writes the trace, summary and field dumps.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>

#include "pfrac/pfrac.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitSolverFailure = 2;

std::string step_file(const fs::path& dir, int step) {
    char name[32];
    std::snprintf(name, sizeof(name), "step_%04d.vtk", step);
    return (dir / name).string();
}

int run_command(const std::string& config_path) {
    pfrac::RunConfig cfg;
    pfrac::ProblemSetup problem;
    try {
        cfg = pfrac::parse_config_file(config_path);
        problem = pfrac::materialize(cfg);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    const fs::path out_dir = pfrac::resolve_output_dir(cfg);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "config error: cannot create output directory '" << out_dir.string()
                  << "'\n";
        return kExitConfigError;
    }

    pfrac::AssemblyContext ctx(problem.mesh, problem.material.kind);
    pfrac::DriverOptions options = pfrac::driver_options(cfg, problem);

    // Field dumps every dump_stride steps, plus forced dumps at the
    // vigilance and acceptance steps.
    bool seen_vigilance = false, seen_cracked = false;
    options.on_step = [&](const pfrac::Mesh& mesh, const pfrac::FieldState& state,
                          const pfrac::StepRecord& rec) {
        bool forced = false;
        if (rec.vigilance && !seen_vigilance) {
            seen_vigilance = true;
            forced = true;
        }
        if (rec.accepted == pfrac::UniverseLabel::Cracked && !seen_cracked) {
            seen_cracked = true;
            forced = true;
        }
        if (forced || rec.step % cfg.dump_stride == 0)
            pfrac::write_vtk(mesh, state, problem.material.kind, step_file(out_dir, rec.step));
    };

    if (!options.domain_length || problem.material.kind != pfrac::ModelKind::PlaneStrainVector) {
        // applicability advisory only applies to the plane-strain bound
    }

    pfrac::RunTrace trace;
    try {
        switch (cfg.driver) {
            case pfrac::DriverName::ParallelUniverse:
                trace = pfrac::parallel_universe_run(ctx, problem.material, problem.schedule,
                                                     options);
                break;
            case pfrac::DriverName::Standard:
                trace = pfrac::standard_newton_run(ctx, problem.material, problem.schedule,
                                                   options);
                break;
            case pfrac::DriverName::Backtracking:
                trace = pfrac::backtracking_run(ctx, problem.material, problem.schedule,
                                                options);
                break;
        }
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolverFailure;
    }

    if (!trace.applicability_ok)
        std::cerr << "advisory: L/ell = " << trace.applicability_ratio
                  << " exceeds the vigilance applicability bound " << trace.applicability_bound
                  << "; the vigilance load may come late\n";

    pfrac::write_trace_csv(trace, (out_dir / "trace.csv").string());
    pfrac::write_summary(trace, (out_dir / "summary.txt").string(), cfg.source_text);
    if (!trace.steps.empty())
        pfrac::write_vtk(problem.mesh, trace.final_state, problem.material.kind,
                         step_file(out_dir, trace.last().step));

    if (trace.aborted) {
        std::cerr << "solver failure: " << trace.abort_reason << "\n";
        return kExitSolverFailure;
    }

    std::cout << "driver " << trace.driver << " finished " << trace.steps.size()
              << " steps in " << trace.total_wall_s << " s\n";
    if (trace.vigilance_load) std::cout << "  vigilance load: " << *trace.vigilance_load << "\n";
    if (trace.acceptance_load)
        std::cout << "  critical (acceptance) load: " << *trace.acceptance_load << "\n";
    if (trace.nucleation_load)
        std::cout << "  nucleation load: " << *trace.nucleation_load << "\n";
    for (const auto& r : trace.retraces)
        std::cout << "  retrace: " << r.from_load << " -> " << r.to_load << "\n";
    std::cout << "  outputs in " << out_dir.string() << "\n";
    return kExitOk;
}

int mesh_info_command(const std::string& config_path) {
    try {
        const pfrac::RunConfig cfg = pfrac::parse_config_file(config_path);
        const pfrac::ProblemSetup problem = pfrac::materialize(cfg);
        const pfrac::Mesh& mesh = problem.mesh;
        std::cout << "nodes: " << mesh.num_nodes() << "\n";
        std::cout << "elements: " << mesh.num_triangles() << "\n";
        std::cout << "h: " << mesh.h << "\n";
        std::cout << "area: " << pfrac::mesh_area(mesh) << "\n";
        std::cout << "max aspect ratio: " << pfrac::max_aspect_ratio(mesh) << "\n";
        for (const auto& [name, ids] : mesh.node_sets)
            std::cout << "set " << name << ": " << ids.size() << " nodes\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

int list_presets_command() {
    for (const auto& name : pfrac::preset_names())
        std::cout << name << "  " << pfrac::preset_description(name) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phase-field fracture solver with parallel-universe crack nucleation"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run a benchmark from a config file");
    run->add_option("config", config_path, "config file")->required();
    auto* info = app.add_subcommand("mesh-info", "describe the mesh a config produces");
    info->add_option("config", config_path, "config file")->required();
    app.add_subcommand("list-presets", "list built-in benchmark presets");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return run_command(config_path);
    if (info->parsed()) return mesh_info_command(config_path);
    return list_presets_command();
}
