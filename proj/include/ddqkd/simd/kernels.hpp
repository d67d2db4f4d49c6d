#pragma once

// Inner-loop kernels for the sample-rate DSP chain.
//
// Every kernel has a scalar reference and, where the target supports it, an
// AVX2 variant. Element-wise kernels are bit-identical across variants (no FMA
// contraction, same operation order); reductions agree to rounding.
//
// Complex buffers are interleaved (re, im) as laid out by std::complex<double>.

#include <complex>
#include <cstddef>
#include <string_view>

namespace ddqkd::simd {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;

    // out[k] = scale * (re^2 + im^2)
    void (*norm)(const cplx* in, double scale, double* out, std::size_t n);
    // out[k] = sqrt(re^2 + im^2)
    void (*magnitude)(const cplx* in, double* out, std::size_t n);
    // out[k] = a[k] * b[k]
    void (*complex_multiply)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
    // out[k] = (x[k] - offset) * b[k]; offset is real
    void (*offset_multiply)(const cplx* x, double offset, const cplx* b, cplx* out, std::size_t n);
    // x[k] *= h[k]
    void (*real_mask)(cplx* x, const double* h, std::size_t n);
    // x[k] *= s
    void (*scale)(cplx* x, double s, std::size_t n);
    // x[k] += sigma * (w[2k] + i w[2k+1])
    void (*add_complex_noise)(cplx* x, const double* w, double sigma, std::size_t n);
    // x[k] += sigma * w[k]
    void (*add_real_noise)(double* x, const double* w, double sigma, std::size_t n);
    // out[k] = sqrt(max(in[k], floor) * inv_mu); returns how many in[k] < floor
    std::size_t (*clamp_sqrt)(const double* in, double floor, double inv_mu, double* out,
                              std::size_t n);
    // sum of real parts
    double (*sum_real)(const cplx* x, std::size_t n);
    // sum of in[k]
    double (*sum)(const double* in, std::size_t n);
};

const KernelTable& kernels();
const KernelTable& kernels(Isa isa);

bool isa_available(Isa isa);
Isa active_isa();

// Overrides runtime detection (tests, benchmarking). Throws if unavailable.
void force_isa(Isa isa);
// Restores runtime detection (honours DDQKD_SIMD=scalar|avx2).
void reset_isa();

std::string_view isa_name(Isa isa);

namespace scalar {
extern const KernelTable table;
}
#if defined(DDQKD_HAVE_AVX2)
namespace avx2 {
extern const KernelTable table;
}
#endif

}  // namespace ddqkd::simd
