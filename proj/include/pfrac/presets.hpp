#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pfrac/baselines.hpp"

namespace pfrac {

/// A fully specified benchmark problem: geometry, material, loading program
/// and the Dirichlet template tied to the geometry.
struct ProblemSetup {
    std::string name;
    Mesh mesh;
    MaterialParams material;
    LoadSchedule schedule;
    double domain_length = 0.0;
    double theory_critical_load = 0.0;  // sqrt(Gc L / 2E) when meaningful
};

inline constexpr double kPi = 3.14159265358979323846;

namespace presets {

/// Tension on a square matrix around a rigid circular fiber
/// (non-dimensional units). The fiber interface is pinned, the top edge is
/// pulled vertically.
inline ProblemSetup fiber_composite_tension(double h_override = 0.0) {
    ProblemSetup p;
    p.name = "ex1";
    const double L = 3.0, R = 0.5, ell = 0.1;
    const double h = h_override > 0.0 ? h_override : 0.5 * ell;
    p.mesh = generate_fiber_composite(L, R, h);
    p.material = MaterialParams::plane_strain(4000.0, 0.2, 100.0, ell);
    p.domain_length = L;
    p.schedule.loads = LoadSchedule::ramp(0.55, 44);
    p.schedule.bc_template = {{"fiber", 0, 0.0},
                              {"fiber", 1, 0.0},
                              {"top", 0, 0.0},
                              {"top", 1, 1.0}};
    return p;
}

/// Plane-strain square with a central hole, stretched vertically
/// (millimetre-newton units: E in MPa, Gc in N/mm).
inline ProblemSetup holed_square_tension(double h_override = 0.0) {
    ProblemSetup p;
    p.name = "ex2";
    const double L = 2000.0, R = 200.0, ell = 40.0;
    const double h = h_override > 0.0 ? h_override : 0.5 * ell;
    p.mesh = generate_square(L, h, R);
    p.material = MaterialParams::plane_strain(210.0e3, 0.3, 6.75, ell);
    p.domain_length = L;
    p.schedule.loads = LoadSchedule::ramp(0.24, 40);
    p.schedule.bc_template = {{"top", 0, 0.0},
                              {"top", 1, 1.0},
                              {"bottom", 0, 0.0},
                              {"bottom", 1, -1.0}};
    return p;
}

/// Homogeneous plane-strain square stretched vertically; the hardest
/// nucleation case (no stress raiser). Default schedule: 40 steps up to
/// 1.5x the closed-form critical load sqrt(Gc L / 2E).
inline ProblemSetup homogeneous_square_tension(double h_override = 0.0,
                                               double max_load_factor = 1.5, int steps = 40) {
    ProblemSetup p;
    p.name = "ex3";
    const double L = 1000.0, ell = 40.0;
    const double h = h_override > 0.0 ? h_override : 0.5 * ell;
    p.mesh = generate_square(L, h);
    p.material = MaterialParams::plane_strain(210.0e3, 0.3, 6.75, ell);
    p.domain_length = L;
    p.theory_critical_load = std::sqrt(p.material.Gc0 * L / (2.0 * p.material.E));
    p.schedule.loads = LoadSchedule::ramp(max_load_factor * p.theory_critical_load, steps);
    p.schedule.bc_template = {{"top", 0, 0.0},
                              {"top", 1, 1.0},
                              {"bottom", 0, 0.0},
                              {"bottom", 1, -1.0}};
    return p;
}

/// Anti-plane tear of a square with direction-dependent toughness. The top
/// edge is split at x = 0 and torn out-of-plane in opposite directions.
inline ProblemSetup antiplane_tear(double xi, double beta_rad, double h_override = 0.0) {
    ProblemSetup p;
    const double L = 2.0, ell = 0.04;
    const double h = h_override > 0.0 ? h_override : 0.5 * ell;
    p.mesh = split_top_edge(generate_square(L, h));
    p.material = MaterialParams::anti_plane(1.0, 1.0, ell).with_anisotropy(xi, beta_rad);
    p.domain_length = L;
    p.schedule.loads = LoadSchedule::ramp(2.4, 48);
    p.schedule.bc_template = {{"top_left_half", 0, 1.0}, {"top_right_half", 0, -1.0}};
    return p;
}

}  // namespace presets

inline std::vector<std::string> preset_names() {
    return {"ex1", "ex2", "ex3", "ex4a", "ex4b", "ex4c", "ex4d", "ex4e"};
}

inline std::string preset_description(const std::string& name) {
    if (name == "ex1") return "fiber-reinforced square matrix under tension";
    if (name == "ex2") return "plane-strain square with a central hole under tension";
    if (name == "ex3") return "homogeneous plane-strain square under tension";
    if (name == "ex4a") return "anisotropic anti-plane tear, xi=0.2, beta=-45 deg";
    if (name == "ex4b") return "anisotropic anti-plane tear, xi=0.2, beta=-22.5 deg";
    if (name == "ex4c") return "anisotropic anti-plane tear, xi=0.2, beta=-67.5 deg";
    if (name == "ex4d") return "anisotropic anti-plane tear, xi=0.5, beta=-45 deg";
    if (name == "ex4e") return "anisotropic anti-plane tear, xi=0.8, beta=-45 deg";
    return "";
}

inline ProblemSetup make_preset(const std::string& name, double h_override = 0.0) {
    ProblemSetup p;
    if (name == "ex1") p = presets::fiber_composite_tension(h_override);
    else if (name == "ex2") p = presets::holed_square_tension(h_override);
    else if (name == "ex3") p = presets::homogeneous_square_tension(h_override);
    else if (name == "ex4a") p = presets::antiplane_tear(0.2, -45.0 * kPi / 180.0, h_override);
    else if (name == "ex4b") p = presets::antiplane_tear(0.2, -22.5 * kPi / 180.0, h_override);
    else if (name == "ex4c") p = presets::antiplane_tear(0.2, -67.5 * kPi / 180.0, h_override);
    else if (name == "ex4d") p = presets::antiplane_tear(0.5, -45.0 * kPi / 180.0, h_override);
    else if (name == "ex4e") p = presets::antiplane_tear(0.8, -45.0 * kPi / 180.0, h_override);
    else throw AssemblyError("unknown preset '" + name + "'");
    p.name = name;
    return p;
}

}  // namespace pfrac
