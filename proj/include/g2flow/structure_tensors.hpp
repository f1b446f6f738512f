#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "g2flow/tensor7.hpp"

namespace g2flow {

/// Dense structure-constant tables of the standard G2 3-form
///
///   phi = e^123 + e^145 + e^167 + e^246 - e^257 - e^347 - e^356
///
/// together with its Hodge dual psi = *phi (Euclidean metric, orientation
/// e^1 ^ ... ^ e^7 positive). psi is always produced by the Hodge-star
/// routine, never entered by hand. The cross-product lookup tables are
/// derived from phi: for each ordered pair (i,j), i != j, exactly one slot
/// k has phi_{ijk} != 0.
class StructureTensors {
public:
    StructureTensors() : StructureTensors(standard_form()) {}

    explicit StructureTensors(const ThreeForm& form) : phi_form_(form), psi_form_(hodge_dual(form)) {
        for (int a = 0; a < 7; ++a)
            for (int b = 0; b < 7; ++b) {
                for (int c = 0; c < 7; ++c) phi_[idx3(a, b, c)] = phi_form_(a, b, c);
                for (int c = 0; c < 7; ++c)
                    for (int d = 0; d < 7; ++d) psi_[idx4(a, b, c, d)] = psi_form_(a, b, c, d);
            }
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j) {
                cross_slot_[i][j] = -1;
                cross_sign_[i][j] = 0.0;
                for (int k = 0; k < 7; ++k) {
                    double v = phi(i, j, k);
                    if (v != 0.0) {
                        cross_slot_[i][j] = static_cast<std::int8_t>(k);
                        cross_sign_[i][j] = v;
                        break;
                    }
                }
            }
    }

    double phi(int a, int b, int c) const { return phi_[idx3(a, b, c)]; }
    double psi(int a, int b, int c, int d) const { return psi_[idx4(a, b, c, d)]; }

    const ThreeForm& phi_form() const { return phi_form_; }
    const FourForm& psi_form() const { return psi_form_; }

    /// Cross product (u x v)_c = phi_{abc} u^a v^b via the pair table.
    /// Accumulated over index pairs i < j so antisymmetry is exact in
    /// floating point, not just up to summation order.
    Vec7 cross(const Vec7& u, const Vec7& v) const {
        Vec7 out{};
        for (int i = 0; i < 7; ++i)
            for (int j = i + 1; j < 7; ++j) {
                int k = cross_slot_[i][j];
                if (k < 0) continue;
                out[static_cast<std::size_t>(k)] +=
                    cross_sign_[i][j] * (u[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)] -
                                         u[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(i)]);
            }
        return out;
    }

    /// Entrywise residual of the contraction identity phi_{apq} phi_{bpq} = 6 delta_{ab}.
    double contraction_identity_residual() const {
        double worst = 0.0;
        for (int a = 0; a < 7; ++a)
            for (int b = 0; b < 7; ++b) {
                double s = 0.0;
                for (int p = 0; p < 7; ++p)
                    for (int q = 0; q < 7; ++q) s += phi(a, p, q) * phi(b, p, q);
                double expected = (a == b) ? 6.0 : 0.0;
                worst = std::max(worst, std::abs(s - expected));
            }
        return worst;
    }

    /// The defining 3-form, spelled out term by term.
    static ThreeForm standard_form() {
        ThreeForm f;
        f.set(0, 1, 2, 1.0);
        f.set(0, 3, 4, 1.0);
        f.set(0, 5, 6, 1.0);
        f.set(1, 3, 5, 1.0);
        f.set(1, 4, 6, -1.0);
        f.set(2, 3, 6, -1.0);
        f.set(2, 4, 5, -1.0);
        return f;
    }

    static const StructureTensors& standard() {
        static const StructureTensors tables;
        return tables;
    }

private:
    static std::size_t idx3(int a, int b, int c) {
        return static_cast<std::size_t>((a * 7 + b) * 7 + c);
    }
    static std::size_t idx4(int a, int b, int c, int d) {
        return static_cast<std::size_t>(((a * 7 + b) * 7 + c) * 7 + d);
    }

    ThreeForm phi_form_;
    FourForm psi_form_;
    std::array<double, 343> phi_{};
    std::array<double, 2401> psi_{};
    std::int8_t cross_slot_[7][7];
    double cross_sign_[7][7];
};

}  // namespace g2flow
