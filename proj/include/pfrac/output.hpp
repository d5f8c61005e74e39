#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

#include "pfrac/config.hpp"

namespace pfrac {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Legacy-VTK unstructured grid (ASCII) with point data `displacement`
/// (3 components; u_z for the anti-plane model) and `phase`.
inline void write_vtk(const Mesh& mesh, const FieldState& state, ModelKind kind,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << std::setprecision(12);
    out << "# vtk DataFile Version 3.0\n";
    out << "phase-field fracture state\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_nodes() << " double\n";
    for (const auto& p : mesh.nodes) out << p.x << " " << p.y << " 0\n";
    out << "CELLS " << mesh.num_triangles() << " " << 4 * mesh.num_triangles() << "\n";
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "CELL_TYPES " << mesh.num_triangles() << "\n";
    for (int t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
    out << "POINT_DATA " << mesh.num_nodes() << "\n";
    out << "VECTORS displacement double\n";
    for (int i = 0; i < mesh.num_nodes(); ++i) {
        if (kind == ModelKind::PlaneStrainVector)
            out << state.u[2 * i] << " " << state.u[2 * i + 1] << " 0\n";
        else
            out << "0 0 " << state.u[i] << "\n";
    }
    out << "SCALARS phase double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int i = 0; i < mesh.num_nodes(); ++i) out << state.d[i] << "\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

/// Per-step trace in CSV form. Energy columns of a universe that does not
/// exist at a step are left empty.
inline void write_trace_csv(const RunTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << std::setprecision(15);
    out << "step,u_b,sigma_max,vigilance,pi_nc_elastic,pi_nc_surface,"
           "pi_c_elastic,pi_c_surface,accepted,wall_s\n";
    for (const auto& s : trace.steps) {
        out << s.step << "," << s.u_b << "," << s.sigma_max << "," << (s.vigilance ? 1 : 0)
            << ",";
        if (s.crackless) out << s.crackless->elastic << "," << s.crackless->surface << ",";
        else out << ",,";
        if (s.cracked) out << s.cracked->elastic << "," << s.cracked->surface << ",";
        else out << ",,";
        out << to_string(s.accepted) << "," << s.wall_s << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline void write_summary(const RunTrace& trace, const std::string& path,
                          const std::string& config_echo = "") {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << std::setprecision(15);
    out << "driver: " << trace.driver << "\n";
    out << "steps_completed: " << trace.steps.size() << "\n";
    auto opt = [&](const char* name, const std::optional<double>& v) {
        out << name << ": ";
        if (v) out << *v;
        else out << "none";
        out << "\n";
    };
    opt("vigilance_load", trace.vigilance_load);
    opt("acceptance_load", trace.acceptance_load);
    opt("nucleation_load", trace.nucleation_load);
    out << "complete_fracture: " << (trace.complete_fracture ? "yes" : "no") << "\n";
    out << "aborted: " << (trace.aborted ? "yes" : "no") << "\n";
    if (trace.aborted) out << "abort_reason: " << trace.abort_reason << "\n";
    out << "total_wall_s: " << trace.total_wall_s << "\n";
    out << "applicability_ok: " << (trace.applicability_ok ? "yes" : "no") << "\n";
    out << "applicability_bound: " << trace.applicability_bound << "\n";
    out << "applicability_ratio: " << trace.applicability_ratio << "\n";
    out << "retraces: " << trace.retraces.size() << "\n";
    for (const auto& r : trace.retraces)
        out << "retrace: from_load " << r.from_load << " to_load " << r.to_load << "\n";
    for (const auto& [name, load] : trace.boundary_reach)
        out << "crack_reached_" << name << ": " << load << "\n";
    if (!config_echo.empty()) {
        out << "config_echo_begin\n" << config_echo;
        if (config_echo.back() != '\n') out << "\n";
        out << "config_echo_end\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

/// Output directory for a run: the config value unless the environment
/// variable PFRAC_OUTPUT_DIR overrides it.
inline std::string resolve_output_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv("PFRAC_OUTPUT_DIR"); env && *env) return env;
    return cfg.output_dir;
}

}  // namespace pfrac
