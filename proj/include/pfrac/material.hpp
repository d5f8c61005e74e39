#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pfrac {

enum class ModelKind { PlaneStrainVector, AntiPlaneScalar };

struct MaterialError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pointwise constitutive parameters. K and mu are derived from (E, nu) for
/// plane strain; the anti-plane variant only needs mu. Gc0 is the mean
/// critical energy release rate, (xi, beta) the anisotropy strength and the
/// weakest material angle.
struct MaterialParams {
    double E = 0.0;
    double nu = 0.0;
    double mu = 0.0;
    double K = 0.0;
    double Gc0 = 0.0;
    double ell = 0.0;
    double k_res = 1e-10;
    double xi = 0.0;
    double beta = 0.0;
    ModelKind kind = ModelKind::PlaneStrainVector;

    static MaterialParams plane_strain(double E, double nu, double Gc, double ell,
                                       double k_res = 1e-10) {
        MaterialParams m;
        m.E = E;
        m.nu = nu;
        m.mu = E / (2.0 * (1.0 + nu));
        m.K = E / (3.0 * (1.0 - 2.0 * nu));
        m.Gc0 = Gc;
        m.ell = ell;
        m.k_res = k_res;
        m.kind = ModelKind::PlaneStrainVector;
        m.check();
        return m;
    }

    static MaterialParams anti_plane(double mu, double Gc, double ell,
                                     double k_res = 1e-10) {
        MaterialParams m;
        m.mu = mu;
        m.Gc0 = Gc;
        m.ell = ell;
        m.k_res = k_res;
        m.kind = ModelKind::AntiPlaneScalar;
        m.check();
        return m;
    }

    MaterialParams with_Gc(double Gc) const {
        MaterialParams m = *this;
        m.Gc0 = Gc;
        return m;
    }
    MaterialParams with_anisotropy(double xi_, double beta_) const {
        MaterialParams m = *this;
        m.xi = xi_;
        m.beta = beta_;
        m.check();
        return m;
    }

    void check() const {
        if (kind == ModelKind::PlaneStrainVector) {
            if (!(E > 0.0)) throw MaterialError("E must be positive");
            if (!(nu > -1.0 && nu < 0.5)) throw MaterialError("nu must lie in (-1, 0.5)");
            if (!(K > 0.0)) throw MaterialError("K must be positive");
        }
        if (!(mu > 0.0)) throw MaterialError("mu must be positive");
        if (!(Gc0 > 0.0)) throw MaterialError("Gc must be positive");
        if (!(ell > 0.0)) throw MaterialError("ell must be positive");
        if (!(k_res >= 0.0 && k_res < 1.0)) throw MaterialError("k_res must lie in [0, 1)");
        if (!(xi >= 0.0 && xi <= 1.0)) throw MaterialError("xi must lie in [0, 1]");
    }
};

/// Voigt strain with engineering shear gxy = 2*eps_xy.
struct VoigtStrain {
    double exx = 0.0;
    double eyy = 0.0;
    double gxy = 0.0;
};

struct VoigtStress {
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
};

inline double degradation(double d, const MaterialParams& mat) {
    return (1.0 - d) * (1.0 - d) + mat.k_res;
}

namespace detail {

// Full 3D deviator of the plane-strain tensor (eps_zz = 0): the in-plane
// Voigt components and the norm that includes the zz deviatoric entry.
struct Deviator {
    double dxx, dyy, dzz, dxy;
    double norm_sq() const { return dxx * dxx + dyy * dyy + dzz * dzz + 2.0 * dxy * dxy; }
};

inline Deviator deviator(const VoigtStrain& eps) {
    const double tr = eps.exx + eps.eyy;
    return {eps.exx - tr / 3.0, eps.eyy - tr / 3.0, -tr / 3.0, 0.5 * eps.gxy};
}

}  // namespace detail

/// Amor volumetric/deviatoric split: the degradable part carries the tensile
/// volumetric and all deviatoric energy, the compressive volumetric part is
/// never degraded.
inline std::pair<double, double> psi_split(const VoigtStrain& eps,
                                           const MaterialParams& mat) {
    const double tr = eps.exx + eps.eyy;
    const double tr_pos = std::max(tr, 0.0);
    const double tr_neg = std::min(tr, 0.0);
    const auto dev = detail::deviator(eps);
    const double psi_plus = 0.5 * mat.K * tr_pos * tr_pos + mat.mu * dev.norm_sq();
    const double psi_minus = 0.5 * mat.K * tr_neg * tr_neg;
    return {psi_plus, psi_minus};
}

inline VoigtStress stress(const VoigtStrain& eps, double d, const MaterialParams& mat) {
    const double tr = eps.exx + eps.eyy;
    const double tr_pos = std::max(tr, 0.0);
    const double tr_neg = std::min(tr, 0.0);
    const auto dev = detail::deviator(eps);
    const double g = degradation(d, mat);
    VoigtStress s;
    s.sxx = g * (mat.K * tr_pos + 2.0 * mat.mu * dev.dxx) + mat.K * tr_neg;
    s.syy = g * (mat.K * tr_pos + 2.0 * mat.mu * dev.dyy) + mat.K * tr_neg;
    s.sxy = g * (2.0 * mat.mu * dev.dxy);
    return s;
}

/// Consistent tangent dsigma/deps in Voigt form (engineering shear), so the
/// deviatoric projector carries 1/2 in the shear slot. The trace tie tr = 0
/// routes to the tensile branch (right derivative).
inline std::array<std::array<double, 3>, 3> tangent_C(const VoigtStrain& eps, double d,
                                                      const MaterialParams& mat) {
    const double tr = eps.exx + eps.eyy;
    const bool tensile = tr >= 0.0;
    const double g = degradation(d, mat);

    std::array<std::array<double, 3>, 3> C{};
    const double kv = mat.K * (tensile ? g : 1.0);
    const double ones[3] = {1.0, 1.0, 0.0};
    const double Pdev[3][3] = {{2.0 / 3.0, -1.0 / 3.0, 0.0},
                               {-1.0 / 3.0, 2.0 / 3.0, 0.0},
                               {0.0, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            C[i][j] = kv * ones[i] * ones[j] + g * 2.0 * mat.mu * Pdev[i][j];
    return C;
}

/// Quadratic form acting on grad d in the crack surface density. Isotropic
/// for xi = 0; otherwise its weak eigendirection makes the ridge angle beta
/// the cheapest crack direction, with effective toughness between
/// (1-xi)Gc0 and (1+xi)Gc0.
inline std::array<std::array<double, 2>, 2> gradient_metric(const MaterialParams& mat) {
    const double c = std::cos(2.0 * mat.beta);
    const double s = std::sin(2.0 * mat.beta);
    return {{{1.0 + mat.xi * c, mat.xi * s}, {mat.xi * s, 1.0 - mat.xi * c}}};
}

/// Crack surface energy density Gc0 * (d^2 + ell^2 grad_d.M.grad_d) / (2 ell).
inline double surface_energy_density(double d, const std::array<double, 2>& grad_d,
                                     const MaterialParams& mat) {
    const auto M = gradient_metric(mat);
    const double q = M[0][0] * grad_d[0] * grad_d[0] + 2.0 * M[0][1] * grad_d[0] * grad_d[1] +
                     M[1][1] * grad_d[1] * grad_d[1];
    return mat.Gc0 * (d * d + mat.ell * mat.ell * q) / (2.0 * mat.ell);
}

/// Anti-plane shear: psi has no volumetric part, so the whole strain energy
/// is degradable and psi_minus = 0.
inline std::pair<double, std::array<double, 2>> antiplane_psi(
    const std::array<double, 2>& grad_uz, double d, const MaterialParams& mat) {
    const double psi_plus =
        0.5 * mat.mu * (grad_uz[0] * grad_uz[0] + grad_uz[1] * grad_uz[1]);
    const double g = degradation(d, mat);
    return {psi_plus, {g * mat.mu * grad_uz[0], g * mat.mu * grad_uz[1]}};
}

}  // namespace pfrac
