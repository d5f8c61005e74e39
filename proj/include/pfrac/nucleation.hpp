#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pfrac/staggered.hpp"

namespace pfrac {

constexpr double kCrackThreshold = 0.9;

enum class UniverseLabel { Crackless, Cracked };

inline const char* to_string(UniverseLabel label) {
    return label == UniverseLabel::Crackless ? "crackless" : "cracked";
}

/// One candidate solution tracked across load steps.
struct Universe {
    FieldState state;
    EnergyPair energy;
    UniverseLabel label = UniverseLabel::Crackless;
    bool converged = true;
};

/// Strictly increasing displacement loads plus the Dirichlet template that
/// maps a load value onto the named node sets (value = factor * load).
struct LoadSchedule {
    std::vector<double> loads;
    std::vector<DirichletSpec> bc_template;

    void check() const {
        if (loads.empty()) throw AssemblyError("load schedule is empty");
        if (loads.front() < 0.0) throw AssemblyError("loads must be non-negative");
        for (std::size_t i = 1; i < loads.size(); ++i)
            if (!(loads[i] > loads[i - 1]))
                throw AssemblyError("loads must be strictly increasing");
    }

    static std::vector<double> ramp(double max_load, int steps) {
        std::vector<double> loads(steps);
        for (int i = 0; i < steps; ++i)
            loads[i] = max_load * static_cast<double>(i + 1) / steps;
        return loads;
    }
};

/// Critical stress of the AT2 model; with ell treated as a material
/// parameter it coincides with the tensile strength.
inline double sigma_c(const MaterialParams& mat) {
    return std::sqrt(27.0 * mat.Gc0 * mat.E / (256.0 * mat.ell * (1.0 - mat.nu * mat.nu)));
}

/// Anti-plane analog of sigma_c for the shear stress magnitude, obtained by
/// substituting the uniaxial modulus E/(1-nu^2) with 2 mu.
inline double tau_c(const MaterialParams& mat) {
    return std::sqrt(27.0 * mat.Gc0 * 2.0 * mat.mu / (256.0 * mat.ell));
}

inline double critical_stress(const MaterialParams& mat) {
    return mat.kind == ModelKind::PlaneStrainVector ? sigma_c(mat) : tau_c(mat);
}

/// Vigilance criterion: the measured maximum stress reaches sigma_c / alpha.
inline std::pair<bool, double> vigilance_triggered(const AssemblyContext& ctx,
                                                   const FieldState& state,
                                                   const MaterialParams& mat, double alpha) {
    if (!(alpha > 0.0)) throw AssemblyError("safety factor alpha must be positive");
    const double smax = max_principal_stress(ctx, state, mat);
    return {smax >= critical_stress(mat) / alpha, smax};
}

/// Sufficient condition for the vigilance load to precede the critical load,
/// expressed as a bound on the domain-size ratio L/ell. Advisory only.
inline bool check_applicability(double L, const MaterialParams& mat, double stress_conc,
                                double alpha, double* bound_out = nullptr) {
    if (!(stress_conc >= 1.0)) throw AssemblyError("stress concentration factor must be >= 1");
    const double bound = 512.0 * (1.0 - mat.nu * mat.nu) * stress_conc * stress_conc *
                         alpha * alpha / 27.0;
    if (bound_out) *bound_out = bound;
    return L / mat.ell <= bound;
}

struct GuessSearchSettings {
    double reduction = 0.9;  // Gc multiplier per stage
    int max_stages = 60;
};

struct GuessSearchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Energy-continuation search for a cracked initial guess: repeatedly shrink
/// Gc and re-solve from the latest state until the phase field localizes
/// (max d >= 0.9), then restore Gc and converge once more. Called at most
/// once per run, at the load of vigilance.
inline Universe find_cracked_guess(const AssemblyContext& ctx, const FieldState& at_trigger,
                                   const MaterialParams& mat, const BoundaryCondition& bc,
                                   const SolveSettings& settings,
                                   const GuessSearchSettings& search = {},
                                   int* stages_out = nullptr) {
    FieldState work = at_trigger;
    double gc = mat.Gc0;
    int stage = 0;
    while (max_phase(work) < kCrackThreshold) {
        if (stage >= search.max_stages)
            throw GuessSearchError("no cracked guess within " +
                                   std::to_string(search.max_stages) + " Gc reductions");
        ++stage;
        gc *= search.reduction;
        const StaggerReport rep = staggered_solve(ctx, work, mat.with_Gc(gc), bc, settings);
        if (!rep.converged)
            throw GuessSearchError("staggered solve failed during Gc continuation");
    }
    if (stages_out) *stages_out = stage;

    Universe universe;
    universe.state = std::move(work);
    const StaggerReport rep = staggered_solve(ctx, universe.state, mat, bc, settings);
    if (!rep.converged) throw GuessSearchError("staggered solve failed after restoring Gc");
    universe.energy = rep.energy;
    universe.label = max_phase(universe.state) >= kCrackThreshold ? UniverseLabel::Cracked
                                                                  : UniverseLabel::Crackless;
    return universe;
}

struct StepRecord {
    int step = 0;  // 1-based
    double u_b = 0.0;
    double sigma_max = 0.0;
    bool vigilance = false;  // criterion has fired at or before this step
    std::optional<EnergyPair> crackless;
    std::optional<EnergyPair> cracked;
    UniverseLabel accepted = UniverseLabel::Crackless;
    EnergyPair accepted_energy;
    double max_d = 0.0;
    double wall_s = 0.0;
    double max_energy_rise = 0.0;
};

struct RetraceEvent {
    int from_step = 0;
    int to_step = 0;
    double from_load = 0.0;
    double to_load = 0.0;
};

struct RunTrace {
    std::string driver;
    std::vector<StepRecord> steps;
    std::optional<double> vigilance_load;
    std::optional<double> acceptance_load;  // first accepted cracked candidate
    std::optional<double> nucleation_load;  // first accepted state with max d >= 0.9
    bool aborted = false;
    std::string abort_reason;
    bool complete_fracture = false;
    double total_wall_s = 0.0;
    bool applicability_ok = true;
    double applicability_bound = 0.0;
    double applicability_ratio = 0.0;
    std::map<std::string, double> boundary_reach;  // node set -> first such load
    std::vector<RetraceEvent> retraces;
    int guess_search_stages = 0;
    FieldState final_state;  // accepted state at the last completed step

    const StepRecord& last() const { return steps.back(); }
};

struct DriverOptions {
    double alpha = 1.0;
    double stress_concentration = 1.0;  // for the applicability advisory
    double domain_length = 0.0;         // 0 disables the advisory
    SolveSettings solve;
    GuessSearchSettings guess_search;
    std::function<void(const Mesh&, const FieldState&, const StepRecord&)> on_step;
};

namespace detail {

inline void note_boundary_reach(RunTrace& trace, const Mesh& mesh, const FieldState& state,
                                double load) {
    for (const auto& [name, ids] : mesh.node_sets) {
        if (trace.boundary_reach.count(name)) continue;
        for (int i : ids) {
            if (state.d[i] >= kCrackThreshold) {
                trace.boundary_reach.emplace(name, load);
                break;
            }
        }
    }
}

// Complete fracture: the crack connects two named boundary sets and the
// surface energy has stalled for three consecutive steps.
inline bool complete_fracture(const RunTrace& trace) {
    if (trace.boundary_reach.size() < 2) return false;
    const std::size_t n = trace.steps.size();
    if (n < 4) return false;
    for (std::size_t i = n - 3; i < n; ++i) {
        const double prev = trace.steps[i - 1].accepted_energy.surface;
        const double cur = trace.steps[i].accepted_energy.surface;
        if (std::abs(cur - prev) > 1e-6 * std::max(std::abs(cur), 1e-300)) return false;
    }
    return true;
}

enum class DriverKind { ParallelUniverse, StandardNewton };

/// Shared load-stepping core. The standard-Newton baseline is this driver
/// with the cracked branch disabled, so a parallel-universe run in which the
/// vigilance criterion never fires reproduces the baseline bit for bit.
inline RunTrace run_load_stepping(const AssemblyContext& ctx, const MaterialParams& mat,
                                  const LoadSchedule& schedule, const DriverOptions& options,
                                  DriverKind kind) {
    schedule.check();
    if (!(options.alpha > 0.0)) throw AssemblyError("safety factor alpha must be positive");

    RunTrace trace;
    trace.driver = kind == DriverKind::ParallelUniverse ? "parallel_universe" : "standard";
    if (options.domain_length > 0.0 && mat.kind == ModelKind::PlaneStrainVector) {
        trace.applicability_ok =
            check_applicability(options.domain_length, mat, options.stress_concentration,
                                options.alpha, &trace.applicability_bound);
        trace.applicability_ratio = options.domain_length / mat.ell;
    }

    const Mesh& mesh = *ctx.mesh;
    Universe live;  // crackless until nucleation, then the single universe
    live.state = FieldState::zero(mesh, mat.kind);
    std::optional<Universe> cracked;
    bool vigilance_fired = false;
    bool nucleated = false;
    VecX floor;

    const auto run_start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < schedule.loads.size(); ++i) {
        const auto step_start = std::chrono::steady_clock::now();
        const double ub = schedule.loads[i];
        const BoundaryCondition bc = build_bc(mesh, mat.kind, schedule.bc_template, ub);

        StepRecord rec;
        rec.step = static_cast<int>(i) + 1;
        rec.u_b = ub;

        auto abort = [&](const std::string& why) {
            trace.aborted = true;
            trace.abort_reason = why;
            rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                       step_start)
                             .count();
            trace.steps.push_back(rec);
        };

        if (!nucleated) {
            StaggerReport nc_rep = staggered_solve(ctx, live.state, mat, bc, options.solve);
            rec.max_energy_rise = nc_rep.max_energy_rise;
            live.energy = nc_rep.energy;
            if (!nc_rep.converged) {
                abort("staggered solve did not converge (crackless universe, u_b = " +
                      std::to_string(ub) + ")");
                break;
            }
            if (max_phase(live.state) >= kCrackThreshold)
                live.label = UniverseLabel::Cracked;  // spontaneous nucleation

            rec.sigma_max = max_principal_stress(ctx, live.state, mat);
            bool cracked_created_now = false;
            if (kind == DriverKind::ParallelUniverse && !vigilance_fired) {
                if (rec.sigma_max >= critical_stress(mat) / options.alpha) {
                    vigilance_fired = true;
                    trace.vigilance_load = ub;
                    try {
                        cracked = find_cracked_guess(ctx, live.state, mat, bc, options.solve,
                                                     options.guess_search,
                                                     &trace.guess_search_stages);
                    } catch (const std::exception& e) {
                        abort(std::string("cracked-guess search failed: ") + e.what());
                        break;
                    }
                    cracked_created_now = true;
                }
            }
            rec.vigilance = vigilance_fired;

            if (cracked && !cracked_created_now) {
                StaggerReport c_rep =
                    staggered_solve(ctx, cracked->state, mat, bc, options.solve);
                rec.max_energy_rise = std::max(rec.max_energy_rise, c_rep.max_energy_rise);
                cracked->energy = c_rep.energy;
                if (!c_rep.converged) {
                    abort("staggered solve did not converge (cracked universe, u_b = " +
                          std::to_string(ub) + ")");
                    break;
                }
                cracked->label = max_phase(cracked->state) >= kCrackThreshold
                                     ? UniverseLabel::Cracked
                                     : UniverseLabel::Crackless;
            }

            // Acceptance: lowest total energy wins; ties stay crackless.
            // (Pi >= 0 by construction, so a relative margin is sound.)
            const Universe* winner = &live;
            if (cracked && cracked->energy.total() < live.energy.total() * (1.0 - 1e-10))
                winner = &*cracked;

            if (live.label == UniverseLabel::Crackless) rec.crackless = live.energy;
            else rec.cracked = live.energy;
            if (cracked) rec.cracked = cracked->energy;

            rec.accepted = winner->label;
            rec.accepted_energy = winner->energy;
            rec.max_d = max_phase(winner->state);

            if (winner->label == UniverseLabel::Cracked) {
                // First cracked acceptance: keep one universe, switch on
                // irreversibility, and never search again.
                if (winner != &live) live = *winner;
                cracked.reset();
                nucleated = true;
                trace.acceptance_load = ub;
                trace.nucleation_load = ub;
                floor = live.state.d;
            } else if (winner != &live) {
                live = *winner;
            }
        } else {
            StaggerReport rep = staggered_solve(ctx, live.state, mat, bc, options.solve,
                                                Irreversibility::lower_bound(floor));
            rec.max_energy_rise = rep.max_energy_rise;
            live.energy = rep.energy;
            if (!rep.converged) {
                abort("staggered solve did not converge (post-nucleation, u_b = " +
                      std::to_string(ub) + ")");
                break;
            }
            floor = live.state.d;
            rec.sigma_max = max_principal_stress(ctx, live.state, mat);
            rec.vigilance = vigilance_fired;
            rec.cracked = live.energy;
            rec.accepted = UniverseLabel::Cracked;
            rec.accepted_energy = live.energy;
            rec.max_d = max_phase(live.state);
        }

        detail::note_boundary_reach(trace, mesh, live.state, ub);
        rec.wall_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - step_start)
                .count();
        trace.steps.push_back(rec);
        if (options.on_step) options.on_step(mesh, live.state, trace.steps.back());

        trace.final_state = live.state;

        if (detail::complete_fracture(trace)) {
            trace.complete_fracture = true;
            break;
        }
    }
    trace.total_wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();
    return trace;
}

}  // namespace detail

/// Load-stepping driver that tracks a crackless and (after the vigilance
/// criterion fires) a cracked candidate in parallel, accepting whichever has
/// the lower total energy. The crackless candidate is discarded permanently
/// at the first cracked acceptance.
inline RunTrace parallel_universe_run(const AssemblyContext& ctx, const MaterialParams& mat,
                                      const LoadSchedule& schedule,
                                      const DriverOptions& options = {}) {
    return detail::run_load_stepping(ctx, mat, schedule, options,
                                     detail::DriverKind::ParallelUniverse);
}

inline RunTrace parallel_universe_run(const Mesh& mesh, const MaterialParams& mat,
                                      const LoadSchedule& schedule,
                                      const DriverOptions& options = {}) {
    return parallel_universe_run(AssemblyContext(mesh, mat.kind), mat, schedule, options);
}

}  // namespace pfrac
