#pragma once

#include <stdexcept>
#include <string>

#include "g2flow/octonion.hpp"
#include "g2flow/structure_tensors.hpp"

namespace g2flow {

/// Absolute tolerance on |norm^2 - 1| for "unit octonion" preconditions.
inline constexpr double kUnitNormTolerance = 1e-9;

inline Vec7 cross(const Vec7& u, const Vec7& v) {
    return StructureTensors::standard().cross(u, v);
}

/// Octonion product: re = ab - <alpha,beta>, im = a beta + b alpha + alpha x beta.
inline Octonion multiply(const Octonion& A, const Octonion& B) {
    Octonion out;
    double dot = 0.0;
    for (std::size_t i = 0; i < 7; ++i) dot += A.im[i] * B.im[i];
    out.re = A.re * B.re - dot;
    Vec7 cr = cross(A.im, B.im);
    for (std::size_t i = 0; i < 7; ++i) out.im[i] = A.re * B.im[i] + B.re * A.im[i] + cr[i];
    return out;
}

inline Octonion operator*(const Octonion& A, const Octonion& B) { return multiply(A, B); }

inline Octonion inverse(const Octonion& A) {
    double n2 = norm_sq(A);
    if (n2 <= 0.0) throw std::domain_error("inverse: zero octonion");
    return conjugate(A) * (1.0 / n2);
}

/// Associator A(BC) - (AB)C. Purely imaginary and alternating; equals
/// 2 psi(. , Im A, Im B, Im C) for the standard tables.
inline Octonion associator(const Octonion& A, const Octonion& B, const Octonion& C) {
    return multiply(A, multiply(B, C)) - multiply(multiply(A, B), C);
}

inline bool is_unit(const Octonion& V, double tol = kUnitNormTolerance) {
    return std::abs(norm_sq(V) - 1.0) < tol;
}

inline void require_unit(const Octonion& V, const char* what) {
    if (!is_unit(V)) throw std::domain_error(std::string(what) + ": octonion is not unit norm");
}

/// Modified product (AV)(V^{-1}B) for a unit octonion V.
inline Octonion modified_product(const Octonion& A, const Octonion& B, const Octonion& V) {
    require_unit(V, "modified_product");
    return multiply(multiply(A, V), multiply(conjugate(V), B));
}

}  // namespace g2flow
