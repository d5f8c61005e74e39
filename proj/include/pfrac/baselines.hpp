#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

#include "pfrac/nucleation.hpp"

namespace pfrac {

/// Standard staggered-Newton load stepping: each step starts from the
/// previous step's state, with no cracked-guess machinery. Crack nucleation
/// is reported (late) at the first step whose solution has max d >= 0.9.
inline RunTrace standard_newton_run(const AssemblyContext& ctx, const MaterialParams& mat,
                                    const LoadSchedule& schedule,
                                    const DriverOptions& options = {}) {
    return detail::run_load_stepping(ctx, mat, schedule, options,
                                     detail::DriverKind::StandardNewton);
}

inline RunTrace standard_newton_run(const Mesh& mesh, const MaterialParams& mat,
                                    const LoadSchedule& schedule,
                                    const DriverOptions& options = {}) {
    return standard_newton_run(AssemblyContext(mesh, mat.kind), mat, schedule, options);
}

/// Checkpoint of one completed backtracking step.
struct BacktrackRecord {
    double load = 0.0;
    EnergyPair energy;
    FieldState state;
    double sigma_max = 0.0;
    double max_energy_rise = 0.0;
    double wall_s = 0.0;
};

struct BacktrackSettings {
    int max_restarts = 100;
    double tol_rel = 1e-8;  // optimality slack relative to the stored energy
};

/// Backtracking load stepping under proportional displacement loading.
/// After each converged step i, every earlier step j is tested with the
/// scaled candidate (t_j/t_i)^2 * elastic_i + surface_i; the first violated
/// step is recomputed from the scaled state and the walk resumes there.
/// Each restart strictly lowers a stored energy, so the walk terminates.
inline RunTrace backtracking_run(const AssemblyContext& ctx, const MaterialParams& mat,
                                 const LoadSchedule& schedule,
                                 const DriverOptions& options = {},
                                 const BacktrackSettings& bt = {}) {
    schedule.check();
    const Mesh& mesh = *ctx.mesh;

    RunTrace trace;
    trace.driver = "backtracking";
    if (options.domain_length > 0.0 && mat.kind == ModelKind::PlaneStrainVector) {
        trace.applicability_ok =
            check_applicability(options.domain_length, mat, options.stress_concentration,
                                options.alpha, &trace.applicability_bound);
        trace.applicability_ratio = options.domain_length / mat.ell;
    }

    const std::size_t n_steps = schedule.loads.size();
    std::vector<BacktrackRecord> records(n_steps);
    std::vector<char> valid(n_steps, 0);

    int restarts = 0;
    std::optional<FieldState> pending_init;
    std::size_t i = 0;
    std::size_t frontier = 0;  // highest step computed so far

    const auto run_start = std::chrono::steady_clock::now();
    while (i < n_steps) {
        const auto step_start = std::chrono::steady_clock::now();
        const double t_i = schedule.loads[i];
        const BoundaryCondition bc = build_bc(mesh, mat.kind, schedule.bc_template, t_i);

        FieldState state;
        if (pending_init) {
            state = std::move(*pending_init);
            pending_init.reset();
        } else if (i == 0) {
            state = FieldState::zero(mesh, mat.kind);
        } else {
            state = records[i - 1].state;
        }

        const StaggerReport rep = staggered_solve(ctx, state, mat, bc, options.solve);
        if (!rep.converged) {
            trace.aborted = true;
            trace.abort_reason =
                "staggered solve did not converge (backtracking, t = " + std::to_string(t_i) +
                ")";
            break;
        }

        BacktrackRecord& rec = records[i];
        rec.load = t_i;
        rec.energy = rep.energy;
        rec.state = std::move(state);
        rec.sigma_max = max_principal_stress(ctx, rec.state, mat);
        rec.max_energy_rise = rep.max_energy_rise;
        rec.wall_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - step_start)
                .count();
        valid[i] = 1;
        frontier = std::max(frontier, i);

        // Optimality scan over earlier steps, smallest load first.
        std::optional<std::size_t> retrace_to;
        for (std::size_t j = 0; j < i; ++j) {
            if (!valid[j]) continue;
            const double scale = schedule.loads[j] / t_i;
            const double candidate = scale * scale * rec.energy.elastic + rec.energy.surface;
            if (candidate < records[j].energy.total() -
                                bt.tol_rel * std::abs(records[j].energy.total())) {
                retrace_to = j;
                break;
            }
        }

        if (retrace_to) {
            if (++restarts > bt.max_restarts) {
                trace.aborted = true;
                trace.abort_reason = "backtracking restart cap exceeded";
                break;
            }
            const std::size_t j = *retrace_to;
            trace.retraces.push_back({static_cast<int>(i) + 1, static_cast<int>(j) + 1, t_i,
                                      schedule.loads[j]});
            FieldState init = rec.state;
            init.u *= schedule.loads[j] / t_i;  // d carried unscaled
            pending_init = std::move(init);
            i = j;
            continue;
        }

        // Completion on the current final sequence 0..i.
        bool spans = false;
        {
            std::map<std::string, char> reached;
            for (const auto& [name, ids] : mesh.node_sets)
                for (int k : ids)
                    if (rec.state.d[k] >= kCrackThreshold) {
                        reached[name] = 1;
                        break;
                    }
            spans = reached.size() >= 2;
        }
        if (spans && i >= 3) {
            bool plateau = true;
            for (std::size_t k = i - 2; k <= i; ++k) {
                const double prev = records[k - 1].energy.surface;
                const double cur = records[k].energy.surface;
                if (std::abs(cur - prev) > 1e-6 * std::max(std::abs(cur), 1e-300)) {
                    plateau = false;
                    break;
                }
            }
            if (plateau) {
                trace.complete_fracture = true;
                ++i;
                break;
            }
        }
        ++i;
    }
    trace.total_wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();

    // Publish the final (backtracking-optimal) sequence.
    const std::size_t n_final = trace.aborted ? i : std::min(i, n_steps);
    for (std::size_t k = 0; k < n_final && valid[k]; ++k) {
        const BacktrackRecord& rec = records[k];
        StepRecord sr;
        sr.step = static_cast<int>(k) + 1;
        sr.u_b = rec.load;
        sr.sigma_max = rec.sigma_max;
        sr.max_d = max_phase(rec.state);
        sr.accepted = sr.max_d >= kCrackThreshold ? UniverseLabel::Cracked
                                                  : UniverseLabel::Crackless;
        sr.accepted_energy = rec.energy;
        if (sr.accepted == UniverseLabel::Cracked) sr.cracked = rec.energy;
        else sr.crackless = rec.energy;
        sr.wall_s = rec.wall_s;
        sr.max_energy_rise = rec.max_energy_rise;
        trace.steps.push_back(sr);
        if (!trace.nucleation_load && sr.accepted == UniverseLabel::Cracked) {
            trace.nucleation_load = rec.load;
            trace.acceptance_load = rec.load;
        }
        detail::note_boundary_reach(trace, mesh, rec.state, rec.load);
        if (options.on_step) options.on_step(mesh, rec.state, trace.steps.back());
        trace.final_state = rec.state;
    }
    return trace;
}

inline RunTrace backtracking_run(const Mesh& mesh, const MaterialParams& mat,
                                 const LoadSchedule& schedule,
                                 const DriverOptions& options = {},
                                 const BacktrackSettings& bt = {}) {
    return backtracking_run(AssemblyContext(mesh, mat.kind), mat, schedule, options, bt);
}

}  // namespace pfrac
