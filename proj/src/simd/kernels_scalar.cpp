#include "ddqkd/simd/kernels.hpp"

#include <cmath>

namespace ddqkd::simd::scalar {
namespace {

void norm(const cplx* in, double scale, double* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double re = in[k].real();
        const double im = in[k].imag();
        out[k] = scale * (re * re + im * im);
    }
}

void magnitude(const cplx* in, double* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double re = in[k].real();
        const double im = in[k].imag();
        out[k] = std::sqrt(re * re + im * im);
    }
}

// Written out rather than using operator* so the operation order matches the
// vector kernels (libstdc++ may route through __muldc3).
void complex_multiply(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double ar = a[k].real(), ai = a[k].imag();
        const double br = b[k].real(), bi = b[k].imag();
        out[k] = cplx(ar * br - ai * bi, ar * bi + ai * br);
    }
}

void offset_multiply(const cplx* x, double offset, const cplx* b, cplx* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double ar = x[k].real() - offset, ai = x[k].imag();
        const double br = b[k].real(), bi = b[k].imag();
        out[k] = cplx(ar * br - ai * bi, ar * bi + ai * br);
    }
}

void real_mask(cplx* x, const double* h, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = cplx(x[k].real() * h[k], x[k].imag() * h[k]);
    }
}

void scale(cplx* x, double s, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = cplx(x[k].real() * s, x[k].imag() * s);
    }
}

void add_complex_noise(cplx* x, const double* w, double sigma, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = cplx(x[k].real() + sigma * w[2 * k], x[k].imag() + sigma * w[2 * k + 1]);
    }
}

void add_real_noise(double* x, const double* w, double sigma, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = x[k] + sigma * w[k];
    }
}

std::size_t clamp_sqrt(const double* in, double floor, double inv_mu, double* out,
                       std::size_t n) {
    std::size_t clamped = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double v = in[k];
        if (v < floor) {
            v = floor;
            ++clamped;
        }
        out[k] = std::sqrt(v * inv_mu);
    }
    return clamped;
}

double sum_real(const cplx* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += x[k].real();
    return acc;
}

double sum(const double* in, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += in[k];
    return acc;
}

}  // namespace

const KernelTable table{
    Isa::scalar,      norm,           magnitude,      complex_multiply,
    offset_multiply,  real_mask,      scale,          add_complex_noise,
    add_real_noise,   clamp_sqrt,     sum_real,       sum,
};

}  // namespace ddqkd::simd::scalar
