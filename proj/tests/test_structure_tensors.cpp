#include <catch2/catch.hpp>

#include <array>

#include "g2flow/algebra.hpp"
#include "g2flow/initial_data.hpp"
#include "g2flow/structure_tensors.hpp"

using namespace g2flow;

namespace {

// Brute-force Levi-Civita symbol on 7 indices (0-based), independent of the
// library's complement-enumeration Hodge star.
int epsilon7(const std::array<int, 7>& idx) {
    int sign = 1;
    for (int i = 0; i < 7; ++i)
        for (int j = i + 1; j < 7; ++j) {
            if (idx[static_cast<std::size_t>(i)] == idx[static_cast<std::size_t>(j)]) return 0;
            if (idx[static_cast<std::size_t>(i)] > idx[static_cast<std::size_t>(j)]) sign = -sign;
        }
    return sign;
}

double hodge_oracle(const StructureTensors& st, int d, int e, int f, int g) {
    // (*phi)_{defg} = (1/3!) phi_{abc} eps_{abcdefg}
    double sum = 0.0;
    for (int a = 0; a < 7; ++a)
        for (int b = 0; b < 7; ++b)
            for (int c = 0; c < 7; ++c) {
                double p = st.phi(a, b, c);
                if (p == 0.0) continue;
                sum += p * epsilon7({a, b, c, d, e, f, g});
            }
    return sum / 6.0;
}

}  // namespace

TEST_CASE("defining 3-form entries") {
    const auto& st = StructureTensors::standard();
    CHECK(st.phi(0, 1, 2) == 1.0);   // e^123
    CHECK(st.phi(0, 3, 4) == 1.0);   // e^145
    CHECK(st.phi(0, 5, 6) == 1.0);   // e^167
    CHECK(st.phi(1, 3, 5) == 1.0);   // e^246
    CHECK(st.phi(1, 4, 6) == -1.0);  // -e^257
    CHECK(st.phi(2, 3, 6) == -1.0);  // -e^347
    CHECK(st.phi(2, 4, 5) == -1.0);  // -e^356
    // antisymmetry through the accessor
    CHECK(st.phi(1, 0, 2) == -1.0);
    CHECK(st.phi(0, 0, 2) == 0.0);
}

TEST_CASE("psi equals the brute-force Hodge dual of phi") {
    const auto& st = StructureTensors::standard();
    CHECK(hodge_oracle(st, 3, 4, 5, 6) == 1.0);
    CHECK(st.psi(3, 4, 5, 6) == 1.0);  // psi_4567 in 1-based labels

    double worst = 0.0;
    for (int d = 0; d < 7; ++d)
        for (int e = 0; e < 7; ++e)
            for (int f = 0; f < 7; ++f)
                for (int g = 0; g < 7; ++g)
                    worst = std::max(worst, std::abs(st.psi(d, e, f, g) - hodge_oracle(st, d, e, f, g)));
    CHECK(worst == 0.0);
}

TEST_CASE("phi contraction identity") {
    CHECK(StructureTensors::standard().contraction_identity_residual() < 1e-12);

    ThreeForm corrupted = StructureTensors::standard_form();
    corrupted.set(0, 1, 2, 0.5);
    CHECK(StructureTensors(corrupted).contraction_identity_residual() > 0.1);
}

TEST_CASE("associator components equal twice the psi contraction") {
    const auto& st = StructureTensors::standard();

    // frozen case (e1, e2, e4): associator is 2 e7
    Octonion asc = associator(Octonion::unit(1), Octonion::unit(2), Octonion::unit(4));
    CHECK(asc.re == 0.0);
    CHECK(asc.im[6] == 2.0);
    CHECK(2.0 * st.psi(6, 0, 1, 3) == 2.0);

    SplitMix64 rng(7);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        Octonion a, b, c;
        a.re = rng.uniform();
        b.re = rng.uniform();
        c.re = rng.uniform();
        for (auto& x : a.im) x = rng.uniform();
        for (auto& x : b.im) x = rng.uniform();
        for (auto& x : c.im) x = rng.uniform();
        Octonion direct = associator(a, b, c);
        Octonion expect;
        for (int d = 0; d < 7; ++d) {
            double s = 0.0;
            for (int i = 0; i < 7; ++i)
                for (int j = 0; j < 7; ++j)
                    for (int m = 0; m < 7; ++m)
                        s += st.psi(d, i, j, m) * a.im[static_cast<std::size_t>(i)] *
                             b.im[static_cast<std::size_t>(j)] * c.im[static_cast<std::size_t>(m)];
            expect.im[static_cast<std::size_t>(d)] = 2.0 * s;
        }
        worst = std::max(worst, norm(direct - expect) / (norm(a) * norm(b) * norm(c)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("cross tables agree with the dense contraction") {
    const auto& st = StructureTensors::standard();
    SplitMix64 rng(11);
    for (int k = 0; k < 100; ++k) {
        Vec7 u{}, v{};
        for (auto& x : u) x = rng.uniform();
        for (auto& x : v) x = rng.uniform();
        Vec7 fast = st.cross(u, v);
        for (int c = 0; c < 7; ++c) {
            double slow = 0.0;
            for (int a = 0; a < 7; ++a)
                for (int b = 0; b < 7; ++b)
                    slow += st.phi(a, b, c) * u[static_cast<std::size_t>(a)] * v[static_cast<std::size_t>(b)];
            CHECK(std::abs(fast[static_cast<std::size_t>(c)] - slow) < 1e-14);
        }
    }
}
