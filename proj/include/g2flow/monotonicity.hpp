#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "g2flow/field_ops.hpp"
#include "g2flow/lattice.hpp"

namespace g2flow {

/// Backward heat kernel description: a delta at lattice point x0 at
/// reference time t0, evolved backwards. Evaluated analytically as a
/// product of periodized 1D Gaussians.
struct KernelSpec {
    std::vector<int> center;  // one coordinate per active axis
    double t0 = 0.0;
    double tail_tol = 1e-12;  // relative truncation of the image sum
};

struct KernelField {
    ScalarField k;                                  // renormalized to unit lattice mass
    std::vector<std::array<double, 7>> grad_log_k;  // (grad k)/k per slot, analytic
};

/// Periodized Gaussian of variance 2(t0 - t) per active axis, images summed
/// until the relative tail drops below tail_tol, then renormalized so the
/// lattice integral is exactly one.
inline KernelField backward_kernel(const LatticeSpec& spec, const KernelSpec& kspec, double t) {
    if (!(t < kspec.t0)) throw std::domain_error("backward_kernel: requires t < t0");
    if (static_cast<int>(kspec.center.size()) != spec.dim())
        throw std::invalid_argument("backward_kernel: center size must match active axis count");

    const double variance = 2.0 * (kspec.t0 - t);
    const double len = spec.length();
    const int n = spec.points_per_axis();
    const double h = spec.spacing();

    // 1D tables of the periodized Gaussian and its x-derivative.
    std::vector<std::vector<double>> k1(static_cast<std::size_t>(spec.dim()));
    std::vector<std::vector<double>> g1(static_cast<std::size_t>(spec.dim()));
    for (int s = 0; s < spec.dim(); ++s) {
        auto& ks = k1[static_cast<std::size_t>(s)];
        auto& gs = g1[static_cast<std::size_t>(s)];
        ks.resize(static_cast<std::size_t>(n));
        gs.resize(static_cast<std::size_t>(n));
        int c0 = ((kspec.center[static_cast<std::size_t>(s)] % n) + n) % n;
        for (int i = 0; i < n; ++i) {
            double x = (i - c0) * h;
            x -= len * std::round(x / len);  // canonical image in [-L/2, L/2)
            double sum = 0.0, dsum = 0.0;
            for (int j = 0;; ++j) {
                double add = 0.0;
                for (int sgn : {+1, -1}) {
                    if (j == 0 && sgn < 0) continue;
                    double y = x + sgn * j * len;
                    double term = std::exp(-y * y / (2.0 * variance));
                    add += term;
                    dsum += -y / variance * term;
                }
                sum += add;
                if (j > 0 && add <= kspec.tail_tol * sum) break;
            }
            ks[static_cast<std::size_t>(i)] = sum;
            gs[static_cast<std::size_t>(i)] = dsum;
        }
    }

    KernelField out;
    out.k = ScalarField(spec);
    out.grad_log_k.assign(spec.point_count(), {});
    for (std::size_t p = 0; p < spec.point_count(); ++p) {
        double prod = 1.0;
        for (int s = 0; s < spec.dim(); ++s)
            prod *= k1[static_cast<std::size_t>(s)][static_cast<std::size_t>(spec.coordinate(p, s))];
        out.k.values[p] = prod;
        for (int s = 0; s < spec.dim(); ++s) {
            std::size_t slot = static_cast<std::size_t>(spec.axis(s) - 1);
            std::size_t c = static_cast<std::size_t>(spec.coordinate(p, s));
            out.grad_log_k[p][slot] = g1[static_cast<std::size_t>(s)][c] / k1[static_cast<std::size_t>(s)][c];
        }
    }

    double mass = lattice_integral(spec, [&](std::size_t p) { return out.k.values[p]; });
    double inv = 1.0 / mass;
    for (double& v : out.k.values) v *= inv;
    return out;
}

/// Weighted energy Z(t) = (t0 - t) integral of |DV|^2 k.
inline double z_functional(const OctonionField& V, const BackgroundData& bg, const KernelSpec& kspec,
                           double t) {
    KernelField kf = backward_kernel(V.spec, kspec, t);
    ScalarField lam = energy_density(V, bg);
    double integral =
        lattice_integral(V.spec, [&](std::size_t p) { return lam.values[p] * kf.k.values[p]; });
    return (kspec.t0 - t) * integral;
}

/// Concentration monitor: Z with the kernel centered at (x0, t0).
inline double f_functional(const OctonionField& V, const BackgroundData& bg,
                           const std::vector<int>& x0, double t0, double t) {
    return z_functional(V, bg, KernelSpec{x0, t0, 1e-12}, t);
}

/// The nonnegative dissipation term of the monotonicity identity:
/// W = (t0 - t) integral of |Delta_D V + |DV|^2 V + (grad k / k) . DV|^2 k.
inline double w_term(const OctonionField& V, const BackgroundData& bg, const KernelSpec& kspec,
                     double t) {
    KernelField kf = backward_kernel(V.spec, kspec, t);
    OctonionField lap = covariant_laplacian(V, bg);
    OneFormField dv = covariant_derivative(V, bg);
    ScalarField lam(V.spec);
    for (std::size_t p = 0; p < V.spec.point_count(); ++p) {
        double s = 0.0;
        for (const auto& o : dv.values[p]) s += norm_sq(o);
        lam.values[p] = s;
    }
    double integral = lattice_integral(V.spec, [&](std::size_t p) {
        Octonion q = lap.values[p] + lam.values[p] * V.values[p];
        for (std::size_t a = 0; a < 7; ++a) q += kf.grad_log_k[p][a] * dv.values[p][a];
        return norm_sq(q) * kf.k.values[p];
    });
    return (kspec.t0 - t) * integral;
}

}  // namespace g2flow
