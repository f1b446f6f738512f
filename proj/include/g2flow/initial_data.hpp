#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "g2flow/lattice.hpp"
#include "g2flow/octonion.hpp"

namespace g2flow {

/// Deterministic 64-bit generator (splitmix64). Used instead of the
/// standard-library distributions so that seeded runs replay byte-identically
/// across implementations.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [-1, 1).
    double uniform() {
        return 2.0 * (static_cast<double>(next() >> 11) * 0x1.0p-53) - 1.0;
    }
};

inline OctonionField constant_section(const LatticeSpec& spec, const Octonion& value = Octonion::real(1.0)) {
    OctonionField f(spec);
    for (auto& o : f.values) o = value;
    return f;
}

/// Unit section cos(theta) + sin(theta) e_axis with theta winding `twists`
/// times along the given torus axis. A critical point of the energy with
/// constant torsion.
inline OctonionField winding_section(const LatticeSpec& spec, int axis, int twists) {
    int slot = -1;
    for (int s = 0; s < spec.dim(); ++s)
        if (spec.axis(s) == axis) slot = s;
    if (slot < 0) throw std::invalid_argument("winding_section: axis is not active");

    OctonionField f(spec);
    const double rate = 2.0 * std::numbers::pi * twists / spec.length();
    for (std::size_t p = 0; p < spec.point_count(); ++p) {
        double theta = rate * spec.position(p, slot);
        Octonion o;
        o.re = std::cos(theta);
        o.im[static_cast<std::size_t>(axis - 1)] = std::sin(theta);
        f.values[p] = o;
    }
    return f;
}

/// Smooth deterministic field built from a seeded trigonometric polynomial
/// with per-axis frequencies up to max_freq. Evaluating the same seed on a
/// finer lattice samples the same underlying function, which is what the
/// convergence-ratio tests rely on.
inline OctonionField random_smooth_field(const LatticeSpec& spec, std::uint64_t seed,
                                         bool imaginary_only = true, int max_freq = 2) {
    SplitMix64 rng(seed);
    const int d = spec.dim();
    std::vector<std::vector<int>> modes;
    std::vector<int> current(static_cast<std::size_t>(d), -max_freq);
    for (;;) {
        modes.push_back(current);
        int k = d - 1;
        while (k >= 0 && current[static_cast<std::size_t>(k)] == max_freq) {
            current[static_cast<std::size_t>(k)] = -max_freq;
            --k;
        }
        if (k < 0) break;
        ++current[static_cast<std::size_t>(k)];
    }

    struct ModeCoef {
        std::vector<int> k;
        double c, s;
    };
    std::vector<std::vector<ModeCoef>> comp_modes(8);
    for (int comp = 0; comp < 8; ++comp) {
        if (imaginary_only && comp == 0) continue;
        for (const auto& k : modes) {
            double c = rng.uniform();
            double s = rng.uniform();
            comp_modes[static_cast<std::size_t>(comp)].push_back({k, c, s});
        }
    }

    OctonionField f(spec);
    const double two_pi_over_l = 2.0 * std::numbers::pi / spec.length();
    for (std::size_t p = 0; p < spec.point_count(); ++p) {
        std::array<double, 8> vals{};
        for (int comp = 0; comp < 8; ++comp) {
            double acc = 0.0;
            for (const auto& mc : comp_modes[static_cast<std::size_t>(comp)]) {
                double phase = 0.0;
                for (int s = 0; s < d; ++s)
                    phase += mc.k[static_cast<std::size_t>(s)] * spec.position(p, s);
                phase *= two_pi_over_l;
                acc += mc.c * std::cos(phase) + mc.s * std::sin(phase);
            }
            vals[static_cast<std::size_t>(comp)] = acc;
        }
        f.values[p].re = vals[0];
        for (std::size_t i = 0; i < 7; ++i) f.values[p].im[i] = vals[i + 1];
    }
    return f;
}

/// Imaginary (tangent-at-one) smooth field scaled so its pointwise sup norm
/// over this lattice is exactly one.
inline OctonionField random_tangent_field(const LatticeSpec& spec, std::uint64_t seed) {
    OctonionField w = random_smooth_field(spec, seed, /*imaginary_only=*/true);
    double sup = sup_norm(w);
    if (sup > 0.0)
        for (auto& o : w.values) o *= 1.0 / sup;
    return w;
}

/// Unit section (1 + a W) / |1 + a W| for a seeded low-frequency tangent
/// field W with sup |W| = 1. Since W is imaginary, inf_M (Re V)^2 equals
/// exactly 1 / (1 + a^2).
inline OctonionField perturbation_section(const LatticeSpec& spec, double amplitude,
                                          std::uint64_t seed) {
    OctonionField w = random_tangent_field(spec, seed);
    OctonionField f(spec);
    for (std::size_t p = 0; p < spec.point_count(); ++p) {
        Octonion v = Octonion::real(1.0) + amplitude * w.values[p];
        f.values[p] = v * (1.0 / norm(v));
    }
    return f;
}

}  // namespace g2flow
