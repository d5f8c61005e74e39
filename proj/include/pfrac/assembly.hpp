#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pfrac/material.hpp"
#include "pfrac/mesh.hpp"

namespace pfrac {

using VecX = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

struct AssemblyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolveError : std::runtime_error {
    SolveError(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
    double residual = 0.0;
};

inline int dofs_per_node(ModelKind kind) {
    return kind == ModelKind::PlaneStrainVector ? 2 : 1;
}

/// Nodal displacement and phase-field vectors for one load level.
/// u has 2*n entries (plane strain) or n entries (anti-plane); d has n.
struct FieldState {
    VecX u;
    VecX d;

    static FieldState zero(const Mesh& mesh, ModelKind kind) {
        FieldState s;
        s.u = VecX::Zero(static_cast<Eigen::Index>(dofs_per_node(kind)) * mesh.num_nodes());
        s.d = VecX::Zero(mesh.num_nodes());
        return s;
    }
};

inline void check_state(const Mesh& mesh, const FieldState& state, ModelKind kind) {
    if (state.u.size() != static_cast<Eigen::Index>(dofs_per_node(kind)) * mesh.num_nodes() ||
        state.d.size() != mesh.num_nodes())
        throw AssemblyError("field state size does not match mesh");
}

struct EnergyPair {
    double elastic = 0.0;
    double surface = 0.0;
    double total() const { return elastic + surface; }
};

/// Dirichlet data on displacement dofs: values are factor * load per spec
/// entry, so proportional loading is a pure rescale.
struct DirichletSpec {
    std::string node_set;
    int component = 0;  // 0 = ux (or uz), 1 = uy
    double factor = 0.0;
};

struct BoundaryCondition {
    std::vector<char> constrained;  // per displacement dof
    VecX values;                    // meaningful where constrained

    int n_dofs() const { return static_cast<int>(constrained.size()); }
    bool is_constrained(int dof) const { return constrained[dof] != 0; }

    void apply(FieldState& state) const {
        for (int i = 0; i < n_dofs(); ++i)
            if (constrained[i]) state.u[i] = values[i];
    }
    double free_norm(const VecX& r) const {
        double s = 0.0;
        for (int i = 0; i < n_dofs(); ++i)
            if (!constrained[i]) s += r[i] * r[i];
        return std::sqrt(s);
    }
    /// Reaction channel: residual entries at constrained dofs.
    VecX reactions(const VecX& r) const {
        VecX out = VecX::Zero(r.size());
        for (int i = 0; i < n_dofs(); ++i)
            if (constrained[i]) out[i] = r[i];
        return out;
    }
};

inline BoundaryCondition build_bc(const Mesh& mesh, ModelKind kind,
                                  const std::vector<DirichletSpec>& specs, double load) {
    const int dpn = dofs_per_node(kind);
    BoundaryCondition bc;
    bc.constrained.assign(static_cast<std::size_t>(dpn) * mesh.num_nodes(), 0);
    bc.values = VecX::Zero(static_cast<Eigen::Index>(dpn) * mesh.num_nodes());
    for (const auto& spec : specs) {
        if (spec.component < 0 || spec.component >= dpn)
            throw AssemblyError("boundary condition component out of range");
        for (int node : mesh.set(spec.node_set)) {
            const int dof = dpn * node + spec.component;
            bc.constrained[dof] = 1;
            bc.values[dof] = spec.factor * load;
        }
    }
    return bc;
}

/// Per-element geometry: area and constant shape-function gradients.
struct ElementGeometry {
    std::array<int, 3> nodes;
    double area;
    std::array<double, 3> dNdx;
    std::array<double, 3> dNdy;
};

struct AssemblyContext {
    const Mesh* mesh = nullptr;
    ModelKind kind = ModelKind::PlaneStrainVector;
    std::vector<ElementGeometry> elements;

    AssemblyContext(const Mesh& m, ModelKind k) : mesh(&m), kind(k) {
        elements.reserve(m.triangles.size());
        for (const auto& tri : m.triangles) {
            ElementGeometry g;
            g.nodes = tri;
            const Vec2& a = m.nodes[tri[0]];
            const Vec2& b = m.nodes[tri[1]];
            const Vec2& c = m.nodes[tri[2]];
            const double two_a = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
            if (two_a <= 0.0) throw AssemblyError("non-positive triangle area");
            g.area = 0.5 * two_a;
            g.dNdx = {(b.y - c.y) / two_a, (c.y - a.y) / two_a, (a.y - b.y) / two_a};
            g.dNdy = {(c.x - b.x) / two_a, (a.x - c.x) / two_a, (b.x - a.x) / two_a};
            elements.push_back(g);
        }
    }
};

namespace detail {

// Consistent mass of a linear triangle, scaled by area: A/12 * [[2,1,1],...].
inline std::array<std::array<double, 3>, 3> mass_matrix(double area) {
    const double o = area / 12.0;
    return {{{2 * o, o, o}, {o, 2 * o, o}, {o, o, 2 * o}}};
}

// Integral of ((1-d)^2 + k) over the element; exact for linear d.
inline double degradation_integral(const ElementGeometry& g, const VecX& d,
                                   const MaterialParams& mat) {
    const auto M = mass_matrix(g.area);
    double e[3];
    for (int i = 0; i < 3; ++i) e[i] = 1.0 - d[g.nodes[i]];
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += e[i] * M[i][j] * e[j];
    return s + mat.k_res * g.area;
}

inline VoigtStrain element_strain(const ElementGeometry& g, const VecX& u) {
    VoigtStrain eps;
    for (int i = 0; i < 3; ++i) {
        const double ux = u[2 * g.nodes[i]];
        const double uy = u[2 * g.nodes[i] + 1];
        eps.exx += g.dNdx[i] * ux;
        eps.eyy += g.dNdy[i] * uy;
        eps.gxy += g.dNdy[i] * ux + g.dNdx[i] * uy;
    }
    return eps;
}

inline std::array<double, 2> element_grad(const ElementGeometry& g, const VecX& v) {
    std::array<double, 2> grad{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        grad[0] += g.dNdx[i] * v[g.nodes[i]];
        grad[1] += g.dNdy[i] * v[g.nodes[i]];
    }
    return grad;
}

// Degraded element stress using the area-mean of the degradation function,
// consistent with the exactly integrated elastic energy.
inline VoigtStress element_stress(const ElementGeometry& g, const FieldState& state,
                                  const MaterialParams& mat) {
    const VoigtStrain eps = element_strain(g, state.u);
    const double g_mean = degradation_integral(g, state.d, mat) / g.area;
    const double tr = eps.exx + eps.eyy;
    const double tr_pos = std::max(tr, 0.0);
    const double tr_neg = std::min(tr, 0.0);
    const auto dev = deviator(eps);
    VoigtStress s;
    s.sxx = g_mean * (mat.K * tr_pos + 2.0 * mat.mu * dev.dxx) + mat.K * tr_neg;
    s.syy = g_mean * (mat.K * tr_pos + 2.0 * mat.mu * dev.dyy) + mat.K * tr_neg;
    s.sxy = g_mean * (2.0 * mat.mu * dev.dxy);
    return s;
}

}  // namespace detail

/// Total energy, split into elastic and crack-surface parts. All element
/// integrands are polynomials of degree <= 2 and are integrated exactly, so
/// the assembled residuals below are the exact gradients of this functional.
inline EnergyPair total_energy(const AssemblyContext& ctx, const FieldState& state,
                               const MaterialParams& mat) {
    check_state(*ctx.mesh, state, ctx.kind);
    EnergyPair e;
    const auto metric = gradient_metric(mat);
    for (const auto& g : ctx.elements) {
        double psi_plus, psi_minus;
        if (ctx.kind == ModelKind::PlaneStrainVector) {
            std::tie(psi_plus, psi_minus) = psi_split(detail::element_strain(g, state.u), mat);
        } else {
            const auto grad = detail::element_grad(g, state.u);
            psi_plus = 0.5 * mat.mu * (grad[0] * grad[0] + grad[1] * grad[1]);
            psi_minus = 0.0;
        }
        const double gint = detail::degradation_integral(g, state.d, mat);
        e.elastic += psi_plus * gint + psi_minus * g.area;

        const auto M = detail::mass_matrix(g.area);
        double dd = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) dd += state.d[g.nodes[i]] * M[i][j] * state.d[g.nodes[j]];
        const auto grad_d = detail::element_grad(g, state.d);
        const double q = metric[0][0] * grad_d[0] * grad_d[0] +
                         2.0 * metric[0][1] * grad_d[0] * grad_d[1] +
                         metric[1][1] * grad_d[1] * grad_d[1];
        e.surface += mat.Gc0 * (dd + mat.ell * mat.ell * q * g.area) / (2.0 * mat.ell);
    }
    return e;
}

inline EnergyPair total_energy(const Mesh& mesh, const FieldState& state,
                               const MaterialParams& mat) {
    return total_energy(AssemblyContext(mesh, mat.kind), state, mat);
}

/// dPi/du. Entries at constrained dofs are the reactions; use
/// BoundaryCondition::free_norm / reactions to split them.
inline VecX assemble_residual_u(const AssemblyContext& ctx, const FieldState& state,
                                const MaterialParams& mat) {
    check_state(*ctx.mesh, state, ctx.kind);
    VecX r = VecX::Zero(state.u.size());
    for (const auto& g : ctx.elements) {
        const double gint = detail::degradation_integral(g, state.d, mat);
        if (ctx.kind == ModelKind::PlaneStrainVector) {
            const VoigtStrain eps = detail::element_strain(g, state.u);
            const double tr = eps.exx + eps.eyy;
            const double tr_pos = std::max(tr, 0.0);
            const double tr_neg = std::min(tr, 0.0);
            const auto dev = detail::deviator(eps);
            // sigma_plus weighted by the degradation integral, sigma_minus by area
            const double sxx = gint * (mat.K * tr_pos + 2.0 * mat.mu * dev.dxx) +
                               g.area * mat.K * tr_neg;
            const double syy = gint * (mat.K * tr_pos + 2.0 * mat.mu * dev.dyy) +
                               g.area * mat.K * tr_neg;
            const double sxy = gint * (2.0 * mat.mu * dev.dxy);
            for (int i = 0; i < 3; ++i) {
                r[2 * g.nodes[i]] += g.dNdx[i] * sxx + g.dNdy[i] * sxy;
                r[2 * g.nodes[i] + 1] += g.dNdy[i] * syy + g.dNdx[i] * sxy;
            }
        } else {
            const auto grad = detail::element_grad(g, state.u);
            for (int i = 0; i < 3; ++i)
                r[g.nodes[i]] += gint * mat.mu * (g.dNdx[i] * grad[0] + g.dNdy[i] * grad[1]);
        }
    }
    return r;
}

/// dPi/dd: crack driving term -2(1-d) psi_plus N_A plus the surface terms.
inline VecX assemble_residual_d(const AssemblyContext& ctx, const FieldState& state,
                                const MaterialParams& mat) {
    check_state(*ctx.mesh, state, ctx.kind);
    VecX r = VecX::Zero(state.d.size());
    const auto metric = gradient_metric(mat);
    for (const auto& g : ctx.elements) {
        double psi_plus;
        if (ctx.kind == ModelKind::PlaneStrainVector) {
            psi_plus = psi_split(detail::element_strain(g, state.u), mat).first;
        } else {
            const auto grad = detail::element_grad(g, state.u);
            psi_plus = 0.5 * mat.mu * (grad[0] * grad[0] + grad[1] * grad[1]);
        }
        const auto M = detail::mass_matrix(g.area);
        const auto grad_d = detail::element_grad(g, state.d);
        const double mg0 = metric[0][0] * grad_d[0] + metric[0][1] * grad_d[1];
        const double mg1 = metric[0][1] * grad_d[0] + metric[1][1] * grad_d[1];
        for (int i = 0; i < 3; ++i) {
            double v = 0.0;
            for (int j = 0; j < 3; ++j) {
                const double dj = state.d[g.nodes[j]];
                v += -2.0 * psi_plus * M[i][j] * (1.0 - dj) + (mat.Gc0 / mat.ell) * M[i][j] * dj;
            }
            v += mat.Gc0 * mat.ell * g.area * (g.dNdx[i] * mg0 + g.dNdy[i] * mg1);
            r[g.nodes[i]] += v;
        }
    }
    return r;
}

/// Symmetric sparse matrix plus the constrained-dof mask used by solve_spd.
struct SparseSym {
    SpMat mat;
    std::vector<char> constrained;  // empty means no constraints

    int dim() const { return static_cast<int>(mat.rows()); }
};

inline SparseSym assemble_K_u(const AssemblyContext& ctx, const FieldState& state,
                              const MaterialParams& mat, const BoundaryCondition* bc = nullptr) {
    check_state(*ctx.mesh, state, ctx.kind);
    const int n = static_cast<int>(state.u.size());
    std::vector<Eigen::Triplet<double>> trip;
    if (ctx.kind == ModelKind::PlaneStrainVector) {
        trip.reserve(ctx.elements.size() * 36);
        for (const auto& g : ctx.elements) {
            const double gint = detail::degradation_integral(g, state.d, mat);
            const VoigtStrain eps = detail::element_strain(g, state.u);
            const double tr = eps.exx + eps.eyy;
            const bool tensile = tr >= 0.0;
            // C = gint * C_plus + area * C_minus, folding the degradation
            // integral into the tensile branch.
            const double kv = mat.K * (tensile ? gint : g.area);
            double C[3][3];
            const double ones[3] = {1.0, 1.0, 0.0};
            const double Pdev[3][3] = {{2.0 / 3.0, -1.0 / 3.0, 0.0},
                                       {-1.0 / 3.0, 2.0 / 3.0, 0.0},
                                       {0.0, 0.0, 0.5}};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    C[a][b] = kv * ones[a] * ones[b] + gint * 2.0 * mat.mu * Pdev[a][b];
            // B_i^T C B_j blocks
            for (int i = 0; i < 3; ++i) {
                const double bxi = g.dNdx[i], byi = g.dNdy[i];
                for (int j = 0; j < 3; ++j) {
                    const double bxj = g.dNdx[j], byj = g.dNdy[j];
                    const double kxx = bxi * (C[0][0] * bxj + C[0][2] * byj) +
                                       byi * (C[2][0] * bxj + C[2][2] * byj);
                    const double kxy = bxi * (C[0][1] * byj + C[0][2] * bxj) +
                                       byi * (C[2][1] * byj + C[2][2] * bxj);
                    const double kyx = byi * (C[1][0] * bxj + C[1][2] * byj) +
                                       bxi * (C[2][0] * bxj + C[2][2] * byj);
                    const double kyy = byi * (C[1][1] * byj + C[1][2] * bxj) +
                                       bxi * (C[2][1] * byj + C[2][2] * bxj);
                    trip.emplace_back(2 * g.nodes[i], 2 * g.nodes[j], kxx);
                    trip.emplace_back(2 * g.nodes[i], 2 * g.nodes[j] + 1, kxy);
                    trip.emplace_back(2 * g.nodes[i] + 1, 2 * g.nodes[j], kyx);
                    trip.emplace_back(2 * g.nodes[i] + 1, 2 * g.nodes[j] + 1, kyy);
                }
            }
        }
    } else {
        trip.reserve(ctx.elements.size() * 9);
        for (const auto& g : ctx.elements) {
            const double gint = detail::degradation_integral(g, state.d, mat);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    trip.emplace_back(g.nodes[i], g.nodes[j],
                                      gint * mat.mu *
                                          (g.dNdx[i] * g.dNdx[j] + g.dNdy[i] * g.dNdy[j]));
        }
    }
    SparseSym K;
    K.mat.resize(n, n);
    K.mat.setFromTriplets(trip.begin(), trip.end());
    if (bc) K.constrained = bc->constrained;
    return K;
}

inline SparseSym assemble_K_d(const AssemblyContext& ctx, const FieldState& state,
                              const MaterialParams& mat) {
    check_state(*ctx.mesh, state, ctx.kind);
    const int n = static_cast<int>(state.d.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(ctx.elements.size() * 9);
    const auto metric = gradient_metric(mat);
    for (const auto& g : ctx.elements) {
        double psi_plus;
        if (ctx.kind == ModelKind::PlaneStrainVector) {
            psi_plus = psi_split(detail::element_strain(g, state.u), mat).first;
        } else {
            const auto grad = detail::element_grad(g, state.u);
            psi_plus = 0.5 * mat.mu * (grad[0] * grad[0] + grad[1] * grad[1]);
        }
        const auto M = detail::mass_matrix(g.area);
        for (int i = 0; i < 3; ++i) {
            const double mgx_i = metric[0][0] * g.dNdx[i] + metric[0][1] * g.dNdy[i];
            const double mgy_i = metric[0][1] * g.dNdx[i] + metric[1][1] * g.dNdy[i];
            for (int j = 0; j < 3; ++j) {
                const double v = (2.0 * psi_plus + mat.Gc0 / mat.ell) * M[i][j] +
                                 mat.Gc0 * mat.ell * g.area *
                                     (mgx_i * g.dNdx[j] + mgy_i * g.dNdy[j]);
                trip.emplace_back(g.nodes[i], g.nodes[j], v);
            }
        }
    }
    SparseSym K;
    K.mat.resize(n, n);
    K.mat.setFromTriplets(trip.begin(), trip.end());
    return K;
}

/// Largest in-plane principal stress over all elements (degraded stress);
/// max |tau| for the anti-plane model. Zero-displacement states return 0.
inline double max_principal_stress(const AssemblyContext& ctx, const FieldState& state,
                                   const MaterialParams& mat) {
    check_state(*ctx.mesh, state, ctx.kind);
    double worst = 0.0;
    bool first = true;
    for (const auto& g : ctx.elements) {
        double value;
        if (ctx.kind == ModelKind::PlaneStrainVector) {
            const VoigtStress s = detail::element_stress(g, state, mat);
            value = 0.5 * (s.sxx + s.syy) +
                    std::sqrt(0.25 * (s.sxx - s.syy) * (s.sxx - s.syy) + s.sxy * s.sxy);
        } else {
            const auto grad = detail::element_grad(g, state.u);
            const double gm = detail::degradation_integral(g, state.d, mat) / g.area;
            value = gm * mat.mu * std::hypot(grad[0], grad[1]);
        }
        worst = first ? value : std::max(worst, value);
        first = false;
    }
    return worst;
}

inline double max_principal_stress(const Mesh& mesh, const FieldState& state,
                                   const MaterialParams& mat) {
    return max_principal_stress(AssemblyContext(mesh, mat.kind), state, mat);
}

/// Solves K x = rhs on the free dofs (x = 0 on constrained dofs). Direct
/// sparse Cholesky first, conjugate gradients with a diagonal preconditioner
/// as fallback; either way the relative-residual contract is verified.
inline VecX solve_spd(const SparseSym& K, const VecX& rhs) {
    const int n = K.dim();
    if (rhs.size() != n) throw AssemblyError("solve_spd: rhs size mismatch");

    std::vector<int> free_index(n, -1);
    int n_free = 0;
    const bool has_mask = !K.constrained.empty();
    for (int i = 0; i < n; ++i)
        if (!has_mask || !K.constrained[i]) free_index[i] = n_free++;

    VecX rhs_f(n_free);
    for (int i = 0; i < n; ++i)
        if (free_index[i] >= 0) rhs_f[free_index[i]] = rhs[i];

    VecX x = VecX::Zero(n);
    const double rhs_norm = rhs_f.norm();
    if (n_free == 0 || rhs_norm == 0.0) return x;

    SpMat A(n_free, n_free);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(K.mat.nonZeros()));
        for (int col = 0; col < K.mat.outerSize(); ++col) {
            if (free_index[col] < 0) continue;
            for (SpMat::InnerIterator it(K.mat, col); it; ++it) {
                if (free_index[it.row()] < 0) continue;
                trip.emplace_back(free_index[it.row()], free_index[col], it.value());
            }
        }
        A.setFromTriplets(trip.begin(), trip.end());
    }

    const double tol = 1e-8;
    VecX x_f;
    bool solved = false;
    {
        Eigen::SimplicialLLT<SpMat> llt(A);
        if (llt.info() == Eigen::Success) {
            x_f = llt.solve(rhs_f);
            solved = llt.info() == Eigen::Success &&
                     (A * x_f - rhs_f).norm() <= tol * rhs_norm;
        }
    }
    if (!solved) {
        Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                                 Eigen::DiagonalPreconditioner<double>>
            cg(A);
        cg.setMaxIterations(10 * n_free);
        cg.setTolerance(0.1 * tol);
        x_f = cg.solve(rhs_f);
        const double res = (A * x_f - rhs_f).norm();
        if (res > tol * rhs_norm)
            throw SolveError("solve_spd: linear solve failed (relative residual " +
                                 std::to_string(res / rhs_norm) + ")",
                             res / rhs_norm);
    }
    for (int i = 0; i < n; ++i)
        if (free_index[i] >= 0) x[i] = x_f[free_index[i]];
    return x;
}

}  // namespace pfrac
