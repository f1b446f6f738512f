#pragma once

#include <optional>
#include <stdexcept>

#include "g2flow/algebra.hpp"
#include "g2flow/lattice.hpp"

namespace g2flow {

/// Background structure data entering the covariant operators: the torsion
/// 1-form T of the background, its divergence Div T = div T + |T|^2 packed
/// as one octonion per point (real part |T|^2, imaginary part div T), and,
/// when the background was generated from a unit section, that section.
struct BackgroundData {
    bool torsion_free = true;
    TorsionField torsion;
    OctonionField torsion_divergence;
    std::optional<OctonionField> generator;

    static BackgroundData flat(const LatticeSpec& spec) {
        BackgroundData bg;
        bg.torsion_free = true;
        bg.torsion = TorsionField(spec);
        bg.torsion_divergence = OctonionField(spec);
        return bg;
    }

    static BackgroundData from_section(const OctonionField& generator_section);
};

inline void require_unit_field(const OctonionField& V, const char* what) {
    if (max_unit_defect(V) >= kUnitNormTolerance)
        throw std::domain_error(std::string(what) + ": field is not a unit section");
}

/// Centered second-order difference along each active axis, zero along
/// inactive axes, periodic wraparound.
inline OneFormField gradient(const OctonionField& F) {
    OneFormField out(F.spec);
    const double inv2h = 1.0 / (2.0 * F.spec.spacing());
    for (int s = 0; s < F.spec.dim(); ++s) {
        int slot = F.spec.axis(s) - 1;
        for (std::size_t p = 0; p < F.spec.point_count(); ++p) {
            std::size_t fp = F.spec.shifted(p, s, +1);
            std::size_t bp = F.spec.shifted(p, s, -1);
            out.values[p][static_cast<std::size_t>(slot)] = (F.values[fp] - F.values[bp]) * inv2h;
        }
    }
    return out;
}

/// D_a F = grad_a F - F T_a, with the background torsion acting on all seven
/// slots (inactive axes contribute only the algebraic term).
inline OneFormField covariant_derivative(const OctonionField& F, const BackgroundData& bg) {
    OneFormField out = gradient(F);
    if (bg.torsion_free) return out;
    for (std::size_t p = 0; p < F.spec.point_count(); ++p)
        for (std::size_t a = 0; a < 7; ++a) {
            const Octonion& t = bg.torsion.values[p][a];
            out.values[p][a] -= multiply(F.values[p], t);
        }
    return out;
}

/// Standard (2d+1)-point Laplacian stencil plus the two torsion terms of the
/// covariant expansion: Delta F - 2 (grad_a F) T^a - F (Div T).
inline OctonionField covariant_laplacian(const OctonionField& F, const BackgroundData& bg) {
    OctonionField out(F.spec);
    const double invh2 = 1.0 / (F.spec.spacing() * F.spec.spacing());
    for (std::size_t p = 0; p < F.spec.point_count(); ++p) {
        Octonion acc;
        for (int s = 0; s < F.spec.dim(); ++s) {
            std::size_t fp = F.spec.shifted(p, s, +1);
            std::size_t bp = F.spec.shifted(p, s, -1);
            acc += (F.values[fp] - 2.0 * F.values[p] + F.values[bp]) * invh2;
        }
        out.values[p] = acc;
    }
    if (bg.torsion_free) return out;

    OneFormField grad = gradient(F);
    for (std::size_t p = 0; p < F.spec.point_count(); ++p) {
        Octonion acc = out.values[p];
        for (std::size_t a = 0; a < 7; ++a)
            acc -= 2.0 * multiply(grad.values[p][a], bg.torsion.values[p][a]);
        acc -= multiply(F.values[p], bg.torsion_divergence.values[p]);
        out.values[p] = acc;
    }
    return out;
}

/// Torsion of the structure defined by a unit section: T_a = -(D_a V) V^{-1}.
/// The output keeps any real residue of the discretization; it is a
/// diagnostic, not zeroed.
inline TorsionField section_torsion(const OctonionField& V, const BackgroundData& bg) {
    require_unit_field(V, "section_torsion");
    OneFormField d = covariant_derivative(V, bg);
    TorsionField out(V.spec);
    for (std::size_t p = 0; p < V.spec.point_count(); ++p) {
        Octonion vinv = inverse(V.values[p]);
        for (std::size_t a = 0; a < 7; ++a) out.values[p][a] = -multiply(d.values[p][a], vinv);
    }
    return out;
}

/// Pointwise |DV|^2 with centered differences.
inline ScalarField energy_density(const OctonionField& V, const BackgroundData& bg) {
    OneFormField d = covariant_derivative(V, bg);
    ScalarField out(V.spec);
    for (std::size_t p = 0; p < V.spec.point_count(); ++p) {
        double s = 0.0;
        for (const auto& o : d.values[p]) s += norm_sq(o);
        out.values[p] = s;
    }
    return out;
}

namespace detail {

inline OctonionField torsion_divergence_impl(const OctonionField& V, const BackgroundData& bg) {
    OctonionField lap = covariant_laplacian(V, bg);
    ScalarField lam = energy_density(V, bg);
    OctonionField out(V.spec);
    for (std::size_t p = 0; p < V.spec.point_count(); ++p) {
        Octonion q = lap.values[p] + lam.values[p] * V.values[p];
        out.values[p] = -multiply(q, inverse(V.values[p]));
    }
    return out;
}

}  // namespace detail

/// div T of the section's structure, obtained from
/// Delta_D V + |DV|^2 V = -(div T) V. The imaginary part of the result is
/// div T; the real part vanishes in the continuum and is reported as a
/// consistency residual of the discretization.
inline OctonionField torsion_divergence(const OctonionField& V, const BackgroundData& bg) {
    require_unit_field(V, "torsion_divergence");
    return detail::torsion_divergence_impl(V, bg);
}

inline BackgroundData BackgroundData::from_section(const OctonionField& generator_section) {
    require_unit_field(generator_section, "BackgroundData::from_section");
    BackgroundData bg;
    bg.torsion_free = false;
    BackgroundData flat_bg = BackgroundData::flat(generator_section.spec);
    bg.torsion = section_torsion(generator_section, flat_bg);

    // Div T via the transported derivative: D^(U)_a T_a = (grad_a (T_a U)) U^{-1}
    // summed over slots, so the packed real part carries |T|^2 and the
    // imaginary part carries div T.
    const LatticeSpec& spec = generator_section.spec;
    bg.torsion_divergence = OctonionField(spec);
    const double inv2h = 1.0 / (2.0 * spec.spacing());
    std::vector<std::array<Octonion, 7>> tu(spec.point_count());
    for (std::size_t p = 0; p < spec.point_count(); ++p)
        for (std::size_t a = 0; a < 7; ++a)
            tu[p][a] = multiply(bg.torsion.values[p][a], generator_section.values[p]);
    for (std::size_t p = 0; p < spec.point_count(); ++p) {
        Octonion acc;
        for (int s = 0; s < spec.dim(); ++s) {
            std::size_t slot = static_cast<std::size_t>(spec.axis(s) - 1);
            std::size_t fp = spec.shifted(p, s, +1);
            std::size_t bp = spec.shifted(p, s, -1);
            acc += (tu[fp][slot] - tu[bp][slot]) * inv2h;
        }
        bg.torsion_divergence.values[p] = multiply(acc, inverse(generator_section.values[p]));
    }
    bg.generator = generator_section;
    return bg;
}

/// Sup-norm of D^(U)A - (D(AU))U^{-1} over all points and slots, where
/// D^(U) is assembled from the torsion of U over a torsion-free base. Both
/// routes agree in the continuum; the residual measures the stencil error.
inline double covariance_residual(const OctonionField& A, const OctonionField& U) {
    require_unit_field(U, "covariance_residual");
    if (A.spec != U.spec) throw std::invalid_argument("covariance_residual: lattice mismatch");

    BackgroundData bgU = BackgroundData::from_section(U);
    OneFormField lhs = covariant_derivative(A, bgU);

    OctonionField au(A.spec);
    for (std::size_t p = 0; p < A.spec.point_count(); ++p)
        au.values[p] = multiply(A.values[p], U.values[p]);
    OneFormField dau = gradient(au);

    double worst = 0.0;
    for (std::size_t p = 0; p < A.spec.point_count(); ++p) {
        Octonion uinv = inverse(U.values[p]);
        for (std::size_t a = 0; a < 7; ++a) {
            Octonion rhs = multiply(dau.values[p][a], uinv);
            worst = std::max(worst, norm(lhs.values[p][a] - rhs));
        }
    }
    return worst;
}

}  // namespace g2flow
