#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pfrac/assembly.hpp"

namespace pfrac {

struct SolveSettings {
    double tol_stagger = 1e-6;   // relative total-energy change per alternation
    double tol_newton_u = 1e-8;  // relative residual for the u-subproblem
    int max_stagger = 500;
    int max_newton_u = 50;

    void check() const {
        if (!(tol_stagger > 0.0) || !(tol_newton_u > 0.0))
            throw AssemblyError("solver tolerances must be positive");
        if (max_stagger < 1 || max_newton_u < 1)
            throw AssemblyError("solver iteration caps must be >= 1");
    }
};

/// Crack irreversibility: Off lets candidate solves heal freely (used while
/// competing universes are tracked); LowerBound pins d >= floor nodally.
struct Irreversibility {
    enum class Kind { Off, LowerBound };
    Kind kind = Kind::Off;
    VecX floor;

    static Irreversibility off() { return {}; }
    static Irreversibility lower_bound(VecX floor_values) {
        Irreversibility irr;
        irr.kind = Kind::LowerBound;
        irr.floor = std::move(floor_values);
        return irr;
    }
};

struct SubSolveReport {
    bool converged = true;
    int iterations = 0;
    std::vector<double> residual_history;
};

struct StaggerReport {
    bool converged = true;
    int alternations = 0;
    EnergyPair energy;
    double max_energy_rise = 0.0;  // worst relative Pi increase seen
    std::vector<double> pi_history;
};

/// Newton on u at fixed d with a halving line search on the total energy.
/// The energy is piecewise quadratic in u (the |tr eps| kink), so one step
/// suffices whenever no element flips its trace sign.
inline SubSolveReport solve_u_subproblem(const AssemblyContext& ctx, FieldState& state,
                                         const MaterialParams& mat,
                                         const BoundaryCondition& bc,
                                         const SolveSettings& settings) {
    settings.check();
    bc.apply(state);

    SubSolveReport report;
    VecX r = assemble_residual_u(ctx, state, mat);
    double rnorm = bc.free_norm(r);
    const double r0 = rnorm;
    report.residual_history.push_back(rnorm);
    if (r0 == 0.0) return report;

    double u_scale = state.u.size() ? state.u.cwiseAbs().maxCoeff() : 0.0;
    for (int i = 0; i < bc.n_dofs(); ++i)
        if (bc.is_constrained(i)) u_scale = std::max(u_scale, std::abs(bc.values[i]));

    FieldState trial = state;
    for (int it = 1; it <= settings.max_newton_u; ++it) {
        report.iterations = it;
        const SparseSym K = assemble_K_u(ctx, state, mat, &bc);
        const VecX du = solve_spd(K, -r);

        const double pi0 = total_energy(ctx, state, mat).total();
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls <= 20; ++ls) {
            trial.u = state.u + step * du;
            if (total_energy(ctx, trial, mat).total() <= pi0) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) return report;  // stationary within round-off
        state.u.swap(trial.u);

        r = assemble_residual_u(ctx, state, mat);
        rnorm = bc.free_norm(r);
        report.residual_history.push_back(rnorm);
        if (rnorm <= settings.tol_newton_u * r0) return report;
        if (step * du.cwiseAbs().maxCoeff() <= 1e-14 * std::max(u_scale, 1e-300))
            return report;  // stagnation at machine precision
    }
    report.converged = false;
    return report;
}

/// One exact linear solve (Pi is quadratic in d at fixed u), then projection
/// onto [0,1] and the irreversibility floor.
inline SubSolveReport solve_d_subproblem(const AssemblyContext& ctx, FieldState& state,
                                         const MaterialParams& mat,
                                         const SolveSettings& settings,
                                         const Irreversibility& irr = {}) {
    settings.check();
    SubSolveReport report;
    report.iterations = 1;

    const VecX r = assemble_residual_d(ctx, state, mat);
    const SparseSym K = assemble_K_d(ctx, state, mat);
    state.d += solve_spd(K, -r);

    for (Eigen::Index i = 0; i < state.d.size(); ++i)
        state.d[i] = std::clamp(state.d[i], 0.0, 1.0);
    if (irr.kind == Irreversibility::Kind::LowerBound) {
        if (irr.floor.size() != state.d.size())
            throw AssemblyError("irreversibility floor size mismatch");
        state.d = state.d.cwiseMax(irr.floor);
    }
    return report;
}

/// Alternating exact minimization over u and d until the relative
/// total-energy change over one full alternation drops below tol_stagger.
inline StaggerReport staggered_solve(const AssemblyContext& ctx, FieldState& state,
                                     const MaterialParams& mat, const BoundaryCondition& bc,
                                     const SolveSettings& settings,
                                     const Irreversibility& irr = {}) {
    settings.check();
    bc.apply(state);

    StaggerReport report;
    double pi_prev = total_energy(ctx, state, mat).total();
    report.pi_history.push_back(pi_prev);

    for (int s = 1; s <= settings.max_stagger; ++s) {
        report.alternations = s;
        const SubSolveReport u_rep = solve_u_subproblem(ctx, state, mat, bc, settings);
        if (!u_rep.converged) {
            report.converged = false;
            report.energy = total_energy(ctx, state, mat);
            break;
        }
        solve_d_subproblem(ctx, state, mat, settings, irr);

        const EnergyPair e = total_energy(ctx, state, mat);
        const double pi = e.total();
        report.pi_history.push_back(pi);
        const double denom = std::max(std::abs(pi_prev), std::numeric_limits<double>::min());
        report.max_energy_rise = std::max(report.max_energy_rise, (pi - pi_prev) / denom);
        report.energy = e;
        if (std::abs(pi - pi_prev) <=
            settings.tol_stagger * std::max(std::abs(pi), std::numeric_limits<double>::min()))
            return report;
        pi_prev = pi;
    }
    if (report.alternations >= settings.max_stagger) report.converged = false;
    return report;
}

inline double max_phase(const FieldState& state) {
    return state.d.size() ? state.d.maxCoeff() : 0.0;
}

}  // namespace pfrac
