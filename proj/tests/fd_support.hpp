// Test-only finite-difference oracles for the assembled residuals and
// tangents. Central differences of the total energy are exact for the
// d-subproblem (quadratic) and exact up to round-off in u wherever no
// element changes the sign of its strain trace (the guard below).
#pragma once

#include <random>

#include "pfrac/assembly.hpp"

namespace pfrac::testing {

/// Structured square mesh with interior nodes jittered deterministically.
inline Mesh jittered_square(double L, double h, unsigned seed, double amount = 0.25) {
    Mesh mesh = generate_square(L, h);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-amount * h, amount * h);
    const double tol = 1e-9 * L;
    for (auto& p : mesh.nodes) {
        const bool boundary =
            std::abs(std::abs(p.x) - 0.5 * L) <= tol || std::abs(std::abs(p.y) - 0.5 * L) <= tol;
        if (boundary) continue;
        p.x += u(rng);
        p.y += u(rng);
    }
    validate(mesh);
    return mesh;
}

inline FieldState random_state(const Mesh& mesh, ModelKind kind, unsigned seed,
                               double u_scale = 0.05, double d_max = 0.9) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uu(-u_scale, u_scale);
    std::uniform_real_distribution<double> ud(0.0, d_max);
    FieldState s = FieldState::zero(mesh, kind);
    for (Eigen::Index i = 0; i < s.u.size(); ++i) s.u[i] = uu(rng);
    for (Eigen::Index i = 0; i < s.d.size(); ++i) s.d[i] = ud(rng);
    return s;
}

inline std::vector<int> trace_signs(const AssemblyContext& ctx, const VecX& u) {
    std::vector<int> signs;
    signs.reserve(ctx.elements.size());
    for (const auto& g : ctx.elements) {
        if (ctx.kind == ModelKind::PlaneStrainVector) {
            const VoigtStrain eps = detail::element_strain(g, u);
            signs.push_back(eps.exx + eps.eyy >= 0.0 ? 1 : -1);
        } else {
            signs.push_back(1);  // the anti-plane energy has no kink
        }
    }
    return signs;
}

struct FdReport {
    double max_rel_err = 0.0;  // relative to the residual's max magnitude
    int tested = 0;
    int skipped = 0;  // guard hits
};

/// FD of the total energy versus the assembled u-residual.
inline FdReport fd_check_residual_u(const AssemblyContext& ctx, const FieldState& state,
                                    const MaterialParams& mat) {
    const VecX r = assemble_residual_u(ctx, state, mat);
    const double scale = std::max(r.cwiseAbs().maxCoeff(), 1e-12);
    const std::vector<int> signs = trace_signs(ctx, state.u);
    const double step = 1e-6 * std::max(state.u.cwiseAbs().maxCoeff(), 1.0);

    FdReport rep;
    FieldState work = state;
    for (Eigen::Index i = 0; i < state.u.size(); ++i) {
        work.u[i] = state.u[i] + step;
        const bool hi_ok = trace_signs(ctx, work.u) == signs;
        const double pi_hi = total_energy(ctx, work, mat).total();
        work.u[i] = state.u[i] - step;
        const bool lo_ok = trace_signs(ctx, work.u) == signs;
        const double pi_lo = total_energy(ctx, work, mat).total();
        work.u[i] = state.u[i];
        if (!hi_ok || !lo_ok) {
            ++rep.skipped;
            continue;
        }
        const double fd = (pi_hi - pi_lo) / (2.0 * step);
        rep.max_rel_err = std::max(rep.max_rel_err, std::abs(fd - r[i]) / scale);
        ++rep.tested;
    }
    return rep;
}

/// FD of the total energy versus the assembled d-residual (no guard needed:
/// the energy is smooth in d).
inline FdReport fd_check_residual_d(const AssemblyContext& ctx, const FieldState& state,
                                    const MaterialParams& mat) {
    const VecX r = assemble_residual_d(ctx, state, mat);
    const double scale = std::max(r.cwiseAbs().maxCoeff(), 1e-12);
    const double step = 1e-6;

    FdReport rep;
    FieldState work = state;
    for (Eigen::Index i = 0; i < state.d.size(); ++i) {
        work.d[i] = state.d[i] + step;
        const double pi_hi = total_energy(ctx, work, mat).total();
        work.d[i] = state.d[i] - step;
        const double pi_lo = total_energy(ctx, work, mat).total();
        work.d[i] = state.d[i];
        const double fd = (pi_hi - pi_lo) / (2.0 * step);
        rep.max_rel_err = std::max(rep.max_rel_err, std::abs(fd - r[i]) / scale);
        ++rep.tested;
    }
    return rep;
}

/// Directional FD of the u-residual versus the assembled tangent K_u.
inline FdReport fd_check_K_u(const AssemblyContext& ctx, const FieldState& state,
                             const MaterialParams& mat, unsigned seed, int directions = 5) {
    const SparseSym K = assemble_K_u(ctx, state, mat);
    const std::vector<int> signs = trace_signs(ctx, state.u);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double t = 1e-7 * std::max(state.u.cwiseAbs().maxCoeff(), 1.0);

    FdReport rep;
    FieldState work = state;
    for (int k = 0; k < directions; ++k) {
        VecX dir(state.u.size());
        for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = u(rng);
        work.u = state.u + t * dir;
        const bool hi_ok = trace_signs(ctx, work.u) == signs;
        const VecX r_hi = assemble_residual_u(ctx, work, mat);
        work.u = state.u - t * dir;
        const bool lo_ok = trace_signs(ctx, work.u) == signs;
        const VecX r_lo = assemble_residual_u(ctx, work, mat);
        work.u = state.u;
        if (!hi_ok || !lo_ok) {
            ++rep.skipped;
            continue;
        }
        const VecX fd = (r_hi - r_lo) / (2.0 * t);
        const VecX kd = K.mat * dir;
        const double scale = std::max(kd.cwiseAbs().maxCoeff(), 1e-12);
        rep.max_rel_err = std::max(rep.max_rel_err, (fd - kd).cwiseAbs().maxCoeff() / scale);
        ++rep.tested;
    }
    return rep;
}

}  // namespace pfrac::testing
