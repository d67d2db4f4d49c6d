#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "ddqkd/random.hpp"
#include "ddqkd/simd/kernels.hpp"

using namespace ddqkd;
using simd::cplx;

namespace {

std::vector<cplx> random_complex(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<cplx> v(n);
    for (auto& x : v) x = {3.0 * rng.gaussian(), 3.0 * rng.gaussian()};
    return v;
}

std::vector<double> random_real(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = 2.0 * rng.gaussian();
    return v;
}

template <class T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

}  // namespace

TEST_CASE("scalar table is always available") {
    CHECK(simd::isa_available(simd::Isa::scalar));
    CHECK(simd::kernels(simd::Isa::scalar).isa == simd::Isa::scalar);
    CHECK(simd::isa_name(simd::Isa::scalar) == "scalar");
}

TEST_CASE("force_isa switches the active table") {
    simd::force_isa(simd::Isa::scalar);
    CHECK(simd::active_isa() == simd::Isa::scalar);
    CHECK(simd::kernels().isa == simd::Isa::scalar);
    simd::reset_isa();
}

#if defined(DDQKD_HAVE_AVX2)
TEST_CASE("avx2 kernels match the scalar reference") {
    if (!simd::isa_available(simd::Isa::avx2)) {
        MESSAGE("cpu lacks avx2, skipped");
        return;
    }
    const auto& s = simd::kernels(simd::Isa::scalar);
    const auto& v = simd::kernels(simd::Isa::avx2);
    for (std::size_t n : {0u, 1u, 2u, 3u, 7u, 64u, 1027u}) {
        CAPTURE(n);
        const auto a = random_complex(n, 1 + n);
        const auto b = random_complex(n, 2 + n);
        const auto r = random_real(n, 3 + n);
        const auto w = random_real(2 * n, 4 + n);

        std::vector<double> o1(n), o2(n);
        s.norm(a.data(), 0.7, o1.data(), n);
        v.norm(a.data(), 0.7, o2.data(), n);
        CHECK(same_bits(o1, o2));

        s.magnitude(a.data(), o1.data(), n);
        v.magnitude(a.data(), o2.data(), n);
        CHECK(same_bits(o1, o2));

        std::vector<cplx> c1(n), c2(n);
        s.complex_multiply(a.data(), b.data(), c1.data(), n);
        v.complex_multiply(a.data(), b.data(), c2.data(), n);
        CHECK(same_bits(c1, c2));

        s.offset_multiply(a.data(), 1.25, b.data(), c1.data(), n);
        v.offset_multiply(a.data(), 1.25, b.data(), c2.data(), n);
        CHECK(same_bits(c1, c2));

        c1 = a;
        c2 = a;
        s.real_mask(c1.data(), r.data(), n);
        v.real_mask(c2.data(), r.data(), n);
        CHECK(same_bits(c1, c2));

        c1 = a;
        c2 = a;
        s.scale(c1.data(), -0.3, n);
        v.scale(c2.data(), -0.3, n);
        CHECK(same_bits(c1, c2));

        c1 = a;
        c2 = a;
        s.add_complex_noise(c1.data(), w.data(), 0.9, n);
        v.add_complex_noise(c2.data(), w.data(), 0.9, n);
        CHECK(same_bits(c1, c2));

        o1 = r;
        o2 = r;
        s.add_real_noise(o1.data(), w.data(), 0.9, n);
        v.add_real_noise(o2.data(), w.data(), 0.9, n);
        CHECK(same_bits(o1, o2));

        const std::size_t k1 = s.clamp_sqrt(r.data(), 1e-3, 0.5, o1.data(), n);
        const std::size_t k2 = v.clamp_sqrt(r.data(), 1e-3, 0.5, o2.data(), n);
        CHECK(k1 == k2);
        CHECK(same_bits(o1, o2));

        const double s1 = s.sum(r.data(), n), s2 = v.sum(r.data(), n);
        CHECK(std::abs(s1 - s2) <= 1e-12 * (1.0 + std::abs(s1)) * std::max<std::size_t>(n, 1));
        const double t1 = s.sum_real(a.data(), n), t2 = v.sum_real(a.data(), n);
        CHECK(std::abs(t1 - t2) <= 1e-12 * (1.0 + std::abs(t1)) * std::max<std::size_t>(n, 1));
    }
}

TEST_CASE("clamp_sqrt counts samples below the floor") {
    const std::vector<double> in{4.0, -1.0, 0.0, 1e-20, 9.0};
    for (auto isa : {simd::Isa::scalar, simd::Isa::avx2}) {
        if (!simd::isa_available(isa)) continue;
        std::vector<double> out(in.size());
        const std::size_t k = simd::kernels(isa).clamp_sqrt(in.data(), 1e-12, 1.0, out.data(), in.size());
        CHECK(k == 3);
        CHECK(out[0] == 2.0);
        CHECK(out[1] == doctest::Approx(1e-6));
        CHECK(out[4] == 3.0);
    }
}
#endif

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(Rng::derive(7, {1, 2})), b(Rng::derive(7, {1, 2})), c(Rng::derive(7, {2, 1}));
    const double x = a.gaussian();
    CHECK(x == b.gaussian());
    CHECK(x != c.gaussian());
    Rng g(11);
    double s = 0, ss = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = g.gaussian();
        s += v;
        ss += v * v;
    }
    CHECK(std::abs(s / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(ss / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
}
