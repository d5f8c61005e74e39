#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pfrac/presets.hpp"

namespace pfrac {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class DriverName { ParallelUniverse, Standard, Backtracking };

inline const char* to_string(DriverName d) {
    switch (d) {
        case DriverName::ParallelUniverse: return "parallel_universe";
        case DriverName::Standard: return "standard";
        case DriverName::Backtracking: return "backtracking";
    }
    return "?";
}

/// Parsed run configuration. Either `preset` is set, or the explicit
/// geometry/material/schedule keys are, never a mix of absent halves.
struct RunConfig {
    std::string source_text;  // verbatim config, echoed into the summary

    std::string preset;
    DriverName driver = DriverName::ParallelUniverse;
    std::string output_dir = "out";
    int dump_stride = 10;
    double alpha = 1.0;
    double stress_concentration = 1.0;

    SolveSettings solver;

    // optional overrides
    std::optional<double> mesh_h;
    std::optional<std::string> mesh_file;
    std::optional<double> schedule_max_load;
    std::optional<int> schedule_steps;

    // explicit problem (used when preset is empty)
    std::optional<std::string> geometry;  // square | square_hole | fiber_composite | square_split_top
    std::optional<double> geometry_L;
    std::optional<double> geometry_R;
    std::optional<std::string> material_kind;  // plane_strain | anti_plane
    std::optional<double> material_E, material_nu, material_mu, material_Gc, material_ell;
    std::optional<double> material_k_res, material_xi, material_beta_deg;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& value, int line) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": expected a number, got '" +
                          value + "'");
    }
    if (pos != value.size())
        throw ConfigError("line " + std::to_string(line) + ": trailing junk in number '" +
                          value + "'");
    return v;
}

inline int parse_int(const std::string& value, int line) {
    const double v = parse_double(value, line);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError("line " + std::to_string(line) + ": expected an integer, got '" +
                          value + "'");
    return i;
}

}  // namespace detail

/// Parses the flat `key = value` configuration format ('#' starts a
/// comment, sections are spelled `section.key`). Unknown keys and malformed
/// values are rejected with their line number.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    cfg.source_text = text;

    bool driver_seen = false;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + raw + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
        const int ln = line_no;

        if (key == "preset") cfg.preset = value;
        else if (key == "driver") {
            driver_seen = true;
            if (value == "parallel_universe") cfg.driver = DriverName::ParallelUniverse;
            else if (value == "standard") cfg.driver = DriverName::Standard;
            else if (value == "backtracking") cfg.driver = DriverName::Backtracking;
            else
                throw ConfigError("line " + std::to_string(ln) + ": unknown driver '" + value +
                                  "' (parallel_universe | standard | backtracking)");
        } else if (key == "output_dir") cfg.output_dir = value;
        else if (key == "dump_stride") cfg.dump_stride = detail::parse_int(value, ln);
        else if (key == "alpha") cfg.alpha = detail::parse_double(value, ln);
        else if (key == "stress_concentration")
            cfg.stress_concentration = detail::parse_double(value, ln);
        else if (key == "solver.tol_stagger")
            cfg.solver.tol_stagger = detail::parse_double(value, ln);
        else if (key == "solver.tol_newton_u")
            cfg.solver.tol_newton_u = detail::parse_double(value, ln);
        else if (key == "solver.max_stagger") cfg.solver.max_stagger = detail::parse_int(value, ln);
        else if (key == "solver.max_newton_u")
            cfg.solver.max_newton_u = detail::parse_int(value, ln);
        else if (key == "mesh.h") cfg.mesh_h = detail::parse_double(value, ln);
        else if (key == "mesh.file") cfg.mesh_file = value;
        else if (key == "schedule.max_load")
            cfg.schedule_max_load = detail::parse_double(value, ln);
        else if (key == "schedule.steps") cfg.schedule_steps = detail::parse_int(value, ln);
        else if (key == "geometry") cfg.geometry = value;
        else if (key == "geometry.L") cfg.geometry_L = detail::parse_double(value, ln);
        else if (key == "geometry.R") cfg.geometry_R = detail::parse_double(value, ln);
        else if (key == "material.kind") cfg.material_kind = value;
        else if (key == "material.E") cfg.material_E = detail::parse_double(value, ln);
        else if (key == "material.nu") cfg.material_nu = detail::parse_double(value, ln);
        else if (key == "material.mu") cfg.material_mu = detail::parse_double(value, ln);
        else if (key == "material.Gc") cfg.material_Gc = detail::parse_double(value, ln);
        else if (key == "material.ell") cfg.material_ell = detail::parse_double(value, ln);
        else if (key == "material.k_res") cfg.material_k_res = detail::parse_double(value, ln);
        else if (key == "material.xi") cfg.material_xi = detail::parse_double(value, ln);
        else if (key == "material.beta_deg")
            cfg.material_beta_deg = detail::parse_double(value, ln);
        else
            throw ConfigError("line " + std::to_string(ln) + ": unknown key '" + key + "'");
    }

    if (!driver_seen) throw ConfigError("missing driver");
    if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (!(cfg.stress_concentration >= 1.0))
        throw ConfigError("stress_concentration must be >= 1");
    if (cfg.dump_stride < 1) throw ConfigError("dump_stride must be >= 1");
    if (cfg.schedule_steps && *cfg.schedule_steps < 1)
        throw ConfigError("schedule.steps must be >= 1");
    cfg.solver.check();
    if (cfg.preset.empty() && !cfg.geometry)
        throw ConfigError("either 'preset' or an explicit 'geometry' is required");
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace detail {

inline std::vector<DirichletSpec> bc_for_geometry(const std::string& geometry) {
    if (geometry == "square" || geometry == "square_hole")
        return {{"top", 0, 0.0}, {"top", 1, 1.0}, {"bottom", 0, 0.0}, {"bottom", 1, -1.0}};
    if (geometry == "fiber_composite")
        return {{"fiber", 0, 0.0}, {"fiber", 1, 0.0}, {"top", 0, 0.0}, {"top", 1, 1.0}};
    if (geometry == "square_split_top")
        return {{"top_left_half", 0, 1.0}, {"top_right_half", 0, -1.0}};
    throw ConfigError("unknown geometry '" + geometry + "'");
}

}  // namespace detail

/// Builds the concrete problem a config describes: a preset (with optional
/// overrides) or an explicit geometry/material description.
inline ProblemSetup materialize(const RunConfig& cfg) {
    ProblemSetup p;
    if (!cfg.preset.empty()) {
        p = make_preset(cfg.preset, cfg.mesh_h.value_or(0.0));
    } else {
        const std::string geom = *cfg.geometry;
        if (!cfg.material_kind) throw ConfigError("material.kind is required");
        if (!cfg.material_Gc || !cfg.material_ell)
            throw ConfigError("material.Gc and material.ell are required");
        if (!cfg.geometry_L) throw ConfigError("geometry.L is required");
        const double L = *cfg.geometry_L;

        if (*cfg.material_kind == "plane_strain") {
            if (!cfg.material_E || !cfg.material_nu)
                throw ConfigError("material.E and material.nu are required for plane_strain");
            p.material = MaterialParams::plane_strain(*cfg.material_E, *cfg.material_nu,
                                                      *cfg.material_Gc, *cfg.material_ell,
                                                      cfg.material_k_res.value_or(1e-10));
        } else if (*cfg.material_kind == "anti_plane") {
            if (!cfg.material_mu)
                throw ConfigError("material.mu is required for anti_plane");
            p.material = MaterialParams::anti_plane(*cfg.material_mu, *cfg.material_Gc,
                                                    *cfg.material_ell,
                                                    cfg.material_k_res.value_or(1e-10));
        } else {
            throw ConfigError("unknown material.kind '" + *cfg.material_kind + "'");
        }
        if (cfg.material_xi)
            p.material = p.material.with_anisotropy(
                *cfg.material_xi, cfg.material_beta_deg.value_or(0.0) * kPi / 180.0);

        const double h = cfg.mesh_h.value_or(0.5 * p.material.ell);
        if (cfg.mesh_file) {
            std::ifstream in(*cfg.mesh_file);
            if (!in) throw ConfigError("cannot open mesh file '" + *cfg.mesh_file + "'");
            p.mesh = read_mesh_text(in);
        } else if (geom == "square") {
            p.mesh = generate_square(L, h);
        } else if (geom == "square_hole") {
            if (!cfg.geometry_R) throw ConfigError("geometry.R is required for square_hole");
            p.mesh = generate_square(L, h, *cfg.geometry_R);
        } else if (geom == "fiber_composite") {
            if (!cfg.geometry_R)
                throw ConfigError("geometry.R is required for fiber_composite");
            p.mesh = generate_fiber_composite(L, *cfg.geometry_R, h);
        } else if (geom == "square_split_top") {
            p.mesh = split_top_edge(generate_square(L, h));
        } else {
            throw ConfigError("unknown geometry '" + geom + "'");
        }
        p.schedule.bc_template = detail::bc_for_geometry(geom);
        p.domain_length = L;
        p.name = "custom";
        if (!cfg.schedule_max_load || !cfg.schedule_steps)
            throw ConfigError("schedule.max_load and schedule.steps are required");
    }

    if (cfg.schedule_max_load || cfg.schedule_steps) {
        const double max_load = cfg.schedule_max_load.value_or(p.schedule.loads.back());
        const int steps =
            cfg.schedule_steps.value_or(static_cast<int>(p.schedule.loads.size()));
        p.schedule.loads = LoadSchedule::ramp(max_load, steps);
    }
    p.schedule.check();
    return p;
}

inline DriverOptions driver_options(const RunConfig& cfg, const ProblemSetup& p) {
    DriverOptions opt;
    opt.alpha = cfg.alpha;
    opt.stress_concentration = cfg.stress_concentration;
    opt.domain_length = p.domain_length;
    opt.solve = cfg.solver;
    return opt;
}

}  // namespace pfrac
