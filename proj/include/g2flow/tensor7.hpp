#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace g2flow {

using Vec7 = std::array<double, 7>;

/// Dense 7x7 matrix with row-major storage.
struct Mat7 {
    std::array<double, 49> a{};

    double& operator()(int r, int c) { return a[static_cast<std::size_t>(7 * r + c)]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(7 * r + c)]; }

    static Mat7 identity() {
        Mat7 m;
        for (int i = 0; i < 7; ++i) m(i, i) = 1.0;
        return m;
    }

    Mat7& operator+=(const Mat7& rhs) {
        for (std::size_t i = 0; i < 49; ++i) a[i] += rhs.a[i];
        return *this;
    }
    Mat7& operator-=(const Mat7& rhs) {
        for (std::size_t i = 0; i < 49; ++i) a[i] -= rhs.a[i];
        return *this;
    }
    Mat7& operator*=(double s) {
        for (double& x : a) x *= s;
        return *this;
    }
    friend Mat7 operator+(Mat7 x, const Mat7& y) { return x += y; }
    friend Mat7 operator-(Mat7 x, const Mat7& y) { return x -= y; }
    friend Mat7 operator*(Mat7 x, double s) { return x *= s; }
    friend Mat7 operator*(double s, Mat7 x) { return x *= s; }
};

inline double trace(const Mat7& m) {
    double t = 0.0;
    for (int i = 0; i < 7; ++i) t += m(i, i);
    return t;
}

inline Mat7 transpose(const Mat7& m) {
    Mat7 out;
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 7; ++c) out(r, c) = m(c, r);
    return out;
}

inline double max_abs(const Mat7& m) {
    double v = 0.0;
    for (double x : m.a) v = std::max(v, std::abs(x));
    return v;
}

namespace detail {

/// Sign of the permutation sending (1..7) to the concatenated index list,
/// 0 if any index repeats. Indices are 0-based here.
inline int permutation_sign(const std::array<int, 7>& p) {
    int sign = 1;
    for (int i = 0; i < 7; ++i)
        for (int j = i + 1; j < 7; ++j) {
            if (p[static_cast<std::size_t>(i)] == p[static_cast<std::size_t>(j)]) return 0;
            if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(j)]) sign = -sign;
        }
    return sign;
}

/// Parity of the 3-index (a,b,c) relative to its sorted order; 0 on repeats.
/// Returns the canonical lexicographic slot through *slot.
inline int sort3(int& a, int& b, int& c) {
    int sign = 1;
    if (a > b) { std::swap(a, b); sign = -sign; }
    if (b > c) { std::swap(b, c); sign = -sign; }
    if (a > b) { std::swap(a, b); sign = -sign; }
    if (a == b || b == c) return 0;
    return sign;
}

inline int sort4(std::array<int, 4>& v) {
    int sign = 1;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            if (v[static_cast<std::size_t>(i)] == v[static_cast<std::size_t>(j)]) return 0;
            if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(j)]) {
                std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
                sign = -sign;
            }
        }
    return sign;
}

/// Lexicographic rank of 0 <= a < b < c < 7 among the 35 sorted triples.
inline constexpr int triple_slot(int a, int b, int c) {
    int idx = 0;
    for (int x = 0; x < 7; ++x)
        for (int y = x + 1; y < 7; ++y)
            for (int z = y + 1; z < 7; ++z) {
                if (x == a && y == b && z == c) return idx;
                ++idx;
            }
    return -1;
}

inline int quad_slot(const std::array<int, 4>& v) {
    int idx = 0;
    for (int x = 0; x < 7; ++x)
        for (int y = x + 1; y < 7; ++y)
            for (int z = y + 1; z < 7; ++z)
                for (int w = z + 1; w < 7; ++w) {
                    if (x == v[0] && y == v[1] && z == v[2] && w == v[3]) return idx;
                    ++idx;
                }
    return -1;
}

}  // namespace detail

/// Totally antisymmetric rank-3 tensor over indices 0..6, stored on the 35
/// canonical triples a<b<c so antisymmetry is structural.
struct ThreeForm {
    std::array<double, 35> canonical{};

    double operator()(int a, int b, int c) const {
        int s = detail::sort3(a, b, c);
        if (s == 0) return 0.0;
        return s * canonical[static_cast<std::size_t>(detail::triple_slot(a, b, c))];
    }

    void set(int a, int b, int c, double value) {
        int s = detail::sort3(a, b, c);
        if (s == 0) throw std::invalid_argument("ThreeForm::set: repeated index");
        canonical[static_cast<std::size_t>(detail::triple_slot(a, b, c))] = s * value;
    }

    ThreeForm& operator+=(const ThreeForm& rhs) {
        for (std::size_t i = 0; i < 35; ++i) canonical[i] += rhs.canonical[i];
        return *this;
    }
    ThreeForm& operator-=(const ThreeForm& rhs) {
        for (std::size_t i = 0; i < 35; ++i) canonical[i] -= rhs.canonical[i];
        return *this;
    }
    ThreeForm& operator*=(double s) {
        for (double& x : canonical) x *= s;
        return *this;
    }
    friend ThreeForm operator+(ThreeForm x, const ThreeForm& y) { return x += y; }
    friend ThreeForm operator-(ThreeForm x, const ThreeForm& y) { return x -= y; }
    friend ThreeForm operator*(ThreeForm x, double s) { return x *= s; }
    friend ThreeForm operator*(double s, ThreeForm x) { return x *= s; }
};

/// Totally antisymmetric rank-4 tensor, stored on the 35 canonical quadruples.
struct FourForm {
    std::array<double, 35> canonical{};

    double operator()(int a, int b, int c, int d) const {
        std::array<int, 4> v{a, b, c, d};
        int s = detail::sort4(v);
        if (s == 0) return 0.0;
        return s * canonical[static_cast<std::size_t>(detail::quad_slot(v))];
    }

    void set(int a, int b, int c, int d, double value) {
        std::array<int, 4> v{a, b, c, d};
        int s = detail::sort4(v);
        if (s == 0) throw std::invalid_argument("FourForm::set: repeated index");
        canonical[static_cast<std::size_t>(detail::quad_slot(v))] = s * value;
    }
};

inline double max_abs(const ThreeForm& f) {
    double v = 0.0;
    for (double x : f.canonical) v = std::max(v, std::abs(x));
    return v;
}

/// Hodge dual of a 3-form for the Euclidean metric and the orientation
/// e^1 ^ ... ^ e^7 > 0: (*w)_{defg} = w_{abc} where (a,b,c) is the sorted
/// complement of (d,e,f,g), weighted by the sign of the full permutation.
inline FourForm hodge_dual(const ThreeForm& w) {
    FourForm out;
    for (int a = 0; a < 7; ++a)
        for (int b = a + 1; b < 7; ++b)
            for (int c = b + 1; c < 7; ++c) {
                std::array<int, 4> comp{};
                int k = 0;
                std::array<int, 7> perm{};
                perm[0] = a;
                perm[1] = b;
                perm[2] = c;
                for (int i = 0; i < 7; ++i)
                    if (i != a && i != b && i != c) comp[static_cast<std::size_t>(k++)] = i;
                for (int i = 0; i < 4; ++i) perm[static_cast<std::size_t>(3 + i)] = comp[static_cast<std::size_t>(i)];
                int sign = detail::permutation_sign(perm);
                out.set(comp[0], comp[1], comp[2], comp[3], sign * w(a, b, c));
            }
    return out;
}

namespace detail {

struct WedgePartition {
    std::array<int, 2> p;
    std::array<int, 2> q;
    std::array<int, 3> r;
    int sign;
};

/// All 210 ways to split {0..6} into a 2+2+3 block with the sign of the
/// concatenated permutation. Used for the top component of 2-form ^ 2-form ^ 3-form.
inline const std::vector<WedgePartition>& wedge223_partitions() {
    static const std::vector<WedgePartition> table = [] {
        std::vector<WedgePartition> out;
        for (int p0 = 0; p0 < 7; ++p0)
            for (int p1 = p0 + 1; p1 < 7; ++p1)
                for (int q0 = 0; q0 < 7; ++q0)
                    for (int q1 = q0 + 1; q1 < 7; ++q1) {
                        if (q0 == p0 || q0 == p1 || q1 == p0 || q1 == p1) continue;
                        std::array<int, 3> rest{};
                        int k = 0;
                        for (int i = 0; i < 7; ++i)
                            if (i != p0 && i != p1 && i != q0 && i != q1)
                                rest[static_cast<std::size_t>(k++)] = i;
                        std::array<int, 7> perm{p0, p1, q0, q1, rest[0], rest[1], rest[2]};
                        int sign = permutation_sign(perm);
                        out.push_back(WedgePartition{{p0, p1}, {q0, q1}, rest, sign});
                    }
        return out;
    }();
    return table;
}

}  // namespace detail

/// Coefficient of e^{1...7} in alpha ^ beta ^ w for antisymmetric 2-forms
/// alpha, beta and a 3-form w.
inline double wedge_2_2_3_top(const Mat7& alpha, const Mat7& beta, const ThreeForm& w) {
    double sum = 0.0;
    for (const auto& part : detail::wedge223_partitions()) {
        sum += part.sign * alpha(part.p[0], part.p[1]) * beta(part.q[0], part.q[1]) *
               w(part.r[0], part.r[1], part.r[2]);
    }
    return sum;
}

/// Cholesky factorization of a symmetric matrix; returns false if not
/// positive definite. On success L is lower triangular with m = L L^T.
inline bool cholesky(const Mat7& m, Mat7& lower) {
    lower = Mat7{};
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) return false;
                lower(i, i) = std::sqrt(s);
            } else {
                lower(i, j) = s / lower(j, j);
            }
        }
    }
    return true;
}

}  // namespace g2flow
