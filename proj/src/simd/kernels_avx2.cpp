// Compiled with -mavx2 only; never called unless the CPU reports AVX2.
#include "ddqkd/simd/kernels.hpp"

#include <immintrin.h>

#include <bit>
#include <cmath>

namespace ddqkd::simd::avx2 {
namespace {

inline const double* as_doubles(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* as_doubles(cplx* p) { return reinterpret_cast<double*>(p); }

// [a0r a0i a1r a1i] * [b0r b0i b1r b1i] as complex, same op order as scalar.
inline __m256d cmul(__m256d a, __m256d b) {
    const __m256d ar = _mm256_movedup_pd(a);          // ar ar
    const __m256d ai = _mm256_permute_pd(a, 0xF);     // ai ai
    const __m256d bs = _mm256_permute_pd(b, 0x5);     // bi br
    const __m256d t1 = _mm256_mul_pd(ar, b);          // ar*br ar*bi
    const __m256d t2 = _mm256_mul_pd(ai, bs);         // ai*bi ai*br
    return _mm256_addsub_pd(t1, t2);                  // ar*br-ai*bi  ar*bi+ai*br
}

// Squared moduli of four complex values at p, in order.
inline __m256d norm4(const double* p) {
    const __m256d v0 = _mm256_loadu_pd(p);
    const __m256d v1 = _mm256_loadu_pd(p + 4);
    const __m256d s0 = _mm256_mul_pd(v0, v0);
    const __m256d s1 = _mm256_mul_pd(v1, v1);
    // hadd gives [|z0|^2 |z2|^2 |z1|^2 |z3|^2]
    const __m256d h = _mm256_hadd_pd(s0, s1);
    return _mm256_permute4x64_pd(h, 0b11011000);
}

void norm(const cplx* in, double scale, double* out, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(scale);
    const double* p = as_doubles(in);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        _mm256_storeu_pd(out + k, _mm256_mul_pd(vs, norm4(p + 2 * k)));
    }
    scalar::table.norm(in + k, scale, out + k, n - k);
}

void magnitude(const cplx* in, double* out, std::size_t n) {
    const double* p = as_doubles(in);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        _mm256_storeu_pd(out + k, _mm256_sqrt_pd(norm4(p + 2 * k)));
    }
    scalar::table.magnitude(in + k, out + k, n - k);
}

void complex_multiply(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
    const double* pa = as_doubles(a);
    const double* pb = as_doubles(b);
    double* po = as_doubles(out);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * k);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * k);
        _mm256_storeu_pd(po + 2 * k, cmul(va, vb));
    }
    scalar::table.complex_multiply(a + k, b + k, out + k, n - k);
}

void offset_multiply(const cplx* x, double offset, const cplx* b, cplx* out, std::size_t n) {
    const __m256d off = _mm256_set_pd(0.0, offset, 0.0, offset);
    const double* px = as_doubles(x);
    const double* pb = as_doubles(b);
    double* po = as_doubles(out);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        const __m256d vx = _mm256_sub_pd(_mm256_loadu_pd(px + 2 * k), off);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * k);
        _mm256_storeu_pd(po + 2 * k, cmul(vx, vb));
    }
    scalar::table.offset_multiply(x + k, offset, b + k, out + k, n - k);
}

void real_mask(cplx* x, const double* h, std::size_t n) {
    double* px = as_doubles(x);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        const __m128d hh = _mm_loadu_pd(h + k);
        const __m256d hd = _mm256_permute4x64_pd(_mm256_castpd128_pd256(hh), 0b01010000);
        _mm256_storeu_pd(px + 2 * k, _mm256_mul_pd(_mm256_loadu_pd(px + 2 * k), hd));
    }
    scalar::table.real_mask(x + k, h + k, n - k);
}

void scale(cplx* x, double s, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    double* px = as_doubles(x);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        _mm256_storeu_pd(px + 2 * k, _mm256_mul_pd(_mm256_loadu_pd(px + 2 * k), vs));
    }
    scalar::table.scale(x + k, s, n - k);
}

void add_complex_noise(cplx* x, const double* w, double sigma, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(sigma);
    double* px = as_doubles(x);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        const __m256d noise = _mm256_mul_pd(vs, _mm256_loadu_pd(w + 2 * k));
        _mm256_storeu_pd(px + 2 * k, _mm256_add_pd(_mm256_loadu_pd(px + 2 * k), noise));
    }
    scalar::table.add_complex_noise(x + k, w + 2 * k, sigma, n - k);
}

void add_real_noise(double* x, const double* w, double sigma, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(sigma);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d noise = _mm256_mul_pd(vs, _mm256_loadu_pd(w + k));
        _mm256_storeu_pd(x + k, _mm256_add_pd(_mm256_loadu_pd(x + k), noise));
    }
    scalar::table.add_real_noise(x + k, w + k, sigma, n - k);
}

std::size_t clamp_sqrt(const double* in, double floor, double inv_mu, double* out,
                       std::size_t n) {
    const __m256d vf = _mm256_set1_pd(floor);
    const __m256d vm = _mm256_set1_pd(inv_mu);
    std::size_t clamped = 0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d v = _mm256_loadu_pd(in + k);
        const __m256d below = _mm256_cmp_pd(v, vf, _CMP_LT_OQ);
        clamped += static_cast<std::size_t>(
            std::popcount(static_cast<unsigned>(_mm256_movemask_pd(below))));
        const __m256d c = _mm256_blendv_pd(v, vf, below);
        _mm256_storeu_pd(out + k, _mm256_sqrt_pd(_mm256_mul_pd(c, vm)));
    }
    return clamped + scalar::table.clamp_sqrt(in + k, floor, inv_mu, out + k, n - k);
}

double sum_real(const cplx* x, std::size_t n) {
    const double* p = as_doubles(x);
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(p + 2 * k));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    return (lanes[0] + lanes[2]) + scalar::table.sum_real(x + k, n - k);
}

double sum(const double* in, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(in + k));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) + scalar::table.sum(in + k, n - k);
}

}  // namespace

const KernelTable table{
    Isa::avx2,        norm,           magnitude,      complex_multiply,
    offset_multiply,  real_mask,      scale,          add_complex_noise,
    add_real_noise,   clamp_sqrt,     sum_real,       sum,
};

}  // namespace ddqkd::simd::avx2
