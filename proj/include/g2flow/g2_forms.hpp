#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "g2flow/algebra.hpp"
#include "g2flow/octonion.hpp"
#include "g2flow/structure_tensors.hpp"
#include "g2flow/tensor7.hpp"

namespace g2flow {

/// Image of the 3-form phi under the isometric-orbit map of a unit octonion
/// V = (v0, v):
///
///   sigma_V(phi) = (v0^2 - |v|^2) phi - 2 v0 (v . psi) + 2 v ^ (v . phi)
///
/// where psi must be the Hodge dual of phi. The result is another positive
/// 3-form inducing the same (Euclidean) metric.
inline ThreeForm sigma_transform(const Octonion& V, const ThreeForm& phi, const FourForm& psi) {
    require_unit(V, "sigma_transform");
    const double v0 = V.re;
    const Vec7& v = V.im;
    double vsq = 0.0;
    for (double x : v) vsq += x * x;

    Mat7 v_hook_phi;  // (v . phi)_{bc} = v^a phi_{abc}
    for (int b = 0; b < 7; ++b)
        for (int c = 0; c < 7; ++c) {
            double s = 0.0;
            for (int a = 0; a < 7; ++a) s += v[static_cast<std::size_t>(a)] * phi(a, b, c);
            v_hook_phi(b, c) = s;
        }

    ThreeForm out;
    for (int a = 0; a < 7; ++a)
        for (int b = a + 1; b < 7; ++b)
            for (int c = b + 1; c < 7; ++c) {
                double hook_psi = 0.0;
                for (int d = 0; d < 7; ++d) hook_psi += v[static_cast<std::size_t>(d)] * psi(d, a, b, c);
                double wedge = v[static_cast<std::size_t>(a)] * v_hook_phi(b, c) -
                               v[static_cast<std::size_t>(b)] * v_hook_phi(a, c) +
                               v[static_cast<std::size_t>(c)] * v_hook_phi(a, b);
                out.set(a, b, c, (v0 * v0 - vsq) * phi(a, b, c) - 2.0 * v0 * hook_psi + 2.0 * wedge);
            }
    return out;
}

inline ThreeForm sigma_transform(const Octonion& V) {
    const auto& st = StructureTensors::standard();
    return sigma_transform(V, st.phi_form(), st.psi_form());
}

struct MetricResult {
    Mat7 metric;
    double volume = 0.0;
};

/// Recover the metric and volume scalar of a positive 3-form from
/// g(u,v) vol = (1/6) (u . phi) ^ (v . phi) ^ phi, normalized so that
/// det(g) = volume^2. Throws std::domain_error when the bilinear form
/// fails the positivity check.
inline MetricResult metric_from_phi(const ThreeForm& phi) {
    Mat7 hooks[7];
    for (int u = 0; u < 7; ++u)
        for (int b = 0; b < 7; ++b)
            for (int c = 0; c < 7; ++c) hooks[u](b, c) = phi(u, b, c);

    Mat7 bform;
    for (int u = 0; u < 7; ++u)
        for (int v = u; v < 7; ++v) {
            double value = wedge_2_2_3_top(hooks[u], hooks[v], phi) / 6.0;
            bform(u, v) = value;
            bform(v, u) = value;
        }

    Mat7 lower;
    if (!cholesky(bform, lower)) throw std::domain_error("metric_from_phi: 3-form is not positive");
    double det = 1.0;
    for (int i = 0; i < 7; ++i) det *= lower(i, i) * lower(i, i);

    MetricResult out;
    double scale = std::pow(det, -1.0 / 9.0);
    out.metric = bform * scale;
    out.volume = std::pow(det, 1.0 / 9.0);
    return out;
}

/// Both eigenspace pieces of an antisymmetric 2-tensor under
/// (P beta)_{ab} = (1/2) psi_{abcd} beta^{cd}: P has eigenvalue 2 on the
/// 7-dimensional piece and -1 on the 14-dimensional piece.
struct Lambda2Split {
    Mat7 part7;
    Mat7 part14;
};

inline Mat7 psi_operator(const Mat7& beta, const StructureTensors& st = StructureTensors::standard()) {
    Mat7 out;
    for (int a = 0; a < 7; ++a)
        for (int b = 0; b < 7; ++b) {
            double s = 0.0;
            for (int c = 0; c < 7; ++c)
                for (int d = 0; d < 7; ++d) s += st.psi(a, b, c, d) * beta(c, d);
            out(a, b) = 0.5 * s;
        }
    return out;
}

inline Lambda2Split lambda2_project(const Mat7& beta) {
    for (int a = 0; a < 7; ++a)
        for (int b = 0; b <= a; ++b)
            if (std::abs(beta(a, b) + beta(b, a)) > 1e-12 * std::max(1.0, max_abs(beta)))
                throw std::invalid_argument("lambda2_project: input is not antisymmetric");
    Mat7 p = psi_operator(beta);
    Lambda2Split out;
    out.part7 = (beta + p) * (1.0 / 3.0);
    out.part14 = beta - out.part7;
    return out;
}

/// Irreducible pieces of a full torsion tensor under
/// 2T = (1/4) tau0 g - tau1 . phi + (1/2) tau2 - (1/3) tau3.
/// tau0 is a scalar, tau1 a vector, tau2 antisymmetric in the 14-dimensional
/// eigenspace, tau3 traceless symmetric. The extraction constants are fixed
/// by requiring the reconstruction identity to hold exactly.
struct TorsionComponents {
    double tau0 = 0.0;
    Vec7 tau1{};
    Mat7 tau2;
    Mat7 tau3;
};

inline TorsionComponents torsion_decompose(const Mat7& T) {
    const auto& st = StructureTensors::standard();
    TorsionComponents out;

    double tr = trace(T);
    out.tau0 = 8.0 * tr / 7.0;

    Mat7 sym, antisym;
    for (int a = 0; a < 7; ++a)
        for (int b = 0; b < 7; ++b) {
            sym(a, b) = 0.5 * (T(a, b) + T(b, a));
            antisym(a, b) = 0.5 * (T(a, b) - T(b, a));
        }

    Mat7 sym0 = sym;
    for (int i = 0; i < 7; ++i) sym0(i, i) -= tr / 7.0;
    out.tau3 = sym0 * (-6.0);

    for (int c = 0; c < 7; ++c) {
        double s = 0.0;
        for (int a = 0; a < 7; ++a)
            for (int b = 0; b < 7; ++b) s += antisym(a, b) * st.phi(c, a, b);
        out.tau1[static_cast<std::size_t>(c)] = -s / 3.0;
    }

    out.tau2 = lambda2_project(antisym).part14 * 4.0;
    return out;
}

inline Mat7 torsion_reconstruct(const TorsionComponents& c) {
    const auto& st = StructureTensors::standard();
    Mat7 T;
    for (int a = 0; a < 7; ++a)
        for (int b = 0; b < 7; ++b) {
            double hook = 0.0;  // (tau1 . phi)_{ab} = tau1^c phi_{cab}
            for (int k = 0; k < 7; ++k) hook += c.tau1[static_cast<std::size_t>(k)] * st.phi(k, a, b);
            double g = (a == b) ? 1.0 : 0.0;
            T(a, b) = 0.5 * (0.25 * c.tau0 * g - hook + 0.5 * c.tau2(a, b) - c.tau3(a, b) / 3.0);
        }
    return T;
}

}  // namespace g2flow
