#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ddqkd::dsp {

using cplx = std::complex<double>;

// In-place DFT, X[k] = sum_n x[n] exp(-2 pi i k n / N). Unnormalized.
void fft(std::span<cplx> data);
// Out-of-place forward DFT.
void fft(std::span<const cplx> in, std::span<cplx> out);
// In-place inverse DFT including the 1/N factor.
void ifft(std::span<cplx> data);

std::vector<cplx> fft_of_real(std::span<const double> x);

// Non-negative-frequency half of the DFT of a real sequence, n/2 + 1 bins.
std::vector<cplx> rfft(std::span<const double> x);
// Real inverse of a half spectrum, including 1/n. Consumes `half`.
std::vector<double> irfft(std::vector<cplx>&& half, std::size_t n);

// Signed frequency of bin k for an N-point DFT at sample_rate (Nyquist bin
// reported as +fs/2).
double bin_frequency(std::size_t k, std::size_t n, double sample_rate);

// Band-limited resampling of a periodic sequence by zero-padding or truncating
// its spectrum. For even lengths the Nyquist bin is split or folded so real
// inputs stay real.
std::vector<cplx> resample_spectrum(std::span<const cplx> spectrum, std::size_t new_length);

}  // namespace ddqkd::dsp
