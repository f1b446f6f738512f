#pragma once

#include <array>
#include <cmath>

namespace g2flow {

/// An octonion split into its real part and 7-dimensional imaginary part.
/// Imaginary slot i (0-based) corresponds to the basis unit e_{i+1}.
struct Octonion {
    double re = 0.0;
    std::array<double, 7> im{};

    constexpr Octonion() = default;
    constexpr Octonion(double real, const std::array<double, 7>& imag) : re(real), im(imag) {}

    static constexpr Octonion real(double value) { return Octonion{value, {}}; }

    /// The basis unit e_k, k in 1..7.
    static constexpr Octonion unit(int k) {
        Octonion o;
        o.im[static_cast<std::size_t>(k - 1)] = 1.0;
        return o;
    }

    Octonion& operator+=(const Octonion& rhs) {
        re += rhs.re;
        for (std::size_t i = 0; i < 7; ++i) im[i] += rhs.im[i];
        return *this;
    }
    Octonion& operator-=(const Octonion& rhs) {
        re -= rhs.re;
        for (std::size_t i = 0; i < 7; ++i) im[i] -= rhs.im[i];
        return *this;
    }
    Octonion& operator*=(double s) {
        re *= s;
        for (double& x : im) x *= s;
        return *this;
    }

    friend Octonion operator+(Octonion a, const Octonion& b) { return a += b; }
    friend Octonion operator-(Octonion a, const Octonion& b) { return a -= b; }
    friend Octonion operator*(Octonion a, double s) { return a *= s; }
    friend Octonion operator*(double s, Octonion a) { return a *= s; }
    friend Octonion operator-(Octonion a) { return a *= -1.0; }
};

inline Octonion conjugate(const Octonion& a) {
    Octonion out = a;
    for (double& x : out.im) x = -x;
    return out;
}

inline double norm_sq(const Octonion& a) {
    double s = a.re * a.re;
    for (double x : a.im) s += x * x;
    return s;
}

inline double norm(const Octonion& a) { return std::sqrt(norm_sq(a)); }

/// Euclidean inner product on the 8 components.
inline double inner(const Octonion& a, const Octonion& b) {
    double s = a.re * b.re;
    for (std::size_t i = 0; i < 7; ++i) s += a.im[i] * b.im[i];
    return s;
}

inline bool is_finite(const Octonion& a) {
    if (!std::isfinite(a.re)) return false;
    for (double x : a.im)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace g2flow
