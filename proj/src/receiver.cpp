#include "ddqkd/receiver.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "ddqkd/dsp/fft.hpp"
#include "ddqkd/random.hpp"
#include "ddqkd/simd/kernels.hpp"

namespace ddqkd {
namespace {

void add_electronic_noise(PhotocurrentTrace& trace, double variance, std::uint64_t seed) {
    if (variance < 0.0) throw std::invalid_argument("direct_detect: negative electronic noise variance");
    if (variance == 0.0) return;
    Rng rng(Rng::derive(seed, {static_cast<std::uint64_t>(Stream::electronic)}));
    const auto w = rng.gaussian_vector(trace.size());
    simd::kernels().add_real_noise(trace.samples.data(), w.data(), std::sqrt(variance), trace.size());
}

}  // namespace

PhotocurrentTrace direct_detect(const ComplexWaveform& wf, double mu, double elec_noise_variance, std::uint64_t seed) {
    if (!(mu > 0.0)) throw std::invalid_argument("direct_detect: mu must be > 0");
    PhotocurrentTrace trace;
    trace.sample_rate = wf.sample_rate;
    trace.t0 = wf.t0;
    trace.mu = mu;
    trace.samples.resize(wf.size());
    simd::kernels().norm(wf.samples.data(), mu, trace.samples.data(), wf.size());
    add_electronic_noise(trace, elec_noise_variance, seed);
    return trace;
}

PhotocurrentTrace direct_detect(const PolarWaveform& wf, double mu, double elec_noise_variance, std::uint64_t seed) {
    if (!(mu > 0.0)) throw std::invalid_argument("direct_detect: mu must be > 0");
    PhotocurrentTrace trace;
    trace.sample_rate = wf.sample_rate;
    trace.t0 = wf.t0;
    trace.mu = mu;
    trace.samples.resize(wf.size());
    for (std::size_t k = 0; k < wf.size(); ++k) trace.samples[k] = mu * (wf.modulus[k] * wf.modulus[k]);
    add_electronic_noise(trace, elec_noise_variance, seed);
    return trace;
}

std::vector<double> hilbert(std::span<const double> x) {
    const std::size_t n = x.size();
    auto spec = dsp::fft_of_real(x);
    const cplx minus_i(0.0, -1.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0 || 2 * k == n) {
            spec[k] = 0.0;
        } else if (2 * k < n) {
            spec[k] *= minus_i;
        } else {
            spec[k] *= -minus_i;
        }
    }
    dsp::ifft(spec);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = spec[k].real();
    return out;
}

namespace {

// Spectrum of the recovered field on the upsampled grid.
std::vector<cplx> kk_field_spectrum(const PhotocurrentTrace& trace, int upsample_factor, KkDiagnostics& diag) {
    if (upsample_factor < 1) throw std::invalid_argument("kk_recover: upsample_factor must be >= 1");
    if (trace.samples.empty()) throw std::invalid_argument("kk_recover: empty trace");
    if (!(trace.mu > 0.0)) throw std::invalid_argument("kk_recover: mu must be > 0");
    const std::size_t n = trace.size();
    const std::size_t up = n * static_cast<std::size_t>(upsample_factor);

    std::vector<double> intensity;
    if (upsample_factor == 1) {
        intensity = trace.samples;
    } else {
        const auto half = dsp::rfft(trace.samples);
        std::vector<cplx> padded(up / 2 + 1, cplx(0.0, 0.0));
        const double gain = static_cast<double>(upsample_factor);
        for (std::size_t k = 0; k < half.size(); ++k) padded[k] = half[k] * gain;
        if (n % 2 == 0) padded[n / 2] *= 0.5;
        intensity = dsp::irfft(std::move(padded), up);
    }

    diag.n_samples = up;
    const double peak = *std::max_element(intensity.begin(), intensity.end());
    const double floor = peak > 0.0 ? kClampFloor * peak : DBL_MIN;
    std::vector<double> amp(up);
    diag.clamped = simd::kernels().clamp_sqrt(intensity.data(), floor, 1.0 / trace.mu, amp.data(), up);
    diag.flagged = static_cast<double>(diag.clamped) > kClampFlagFraction * static_cast<double>(up);

    // phase = H(ln |E|)
    std::vector<double> log_amp(up);
    for (std::size_t k = 0; k < up; ++k) log_amp[k] = std::log(amp[k]);
    auto spec = dsp::rfft(log_amp);
    const cplx minus_i(0.0, -1.0);
    spec[0] = 0.0;
    for (std::size_t k = 1; k < spec.size(); ++k) spec[k] *= minus_i;
    if (up % 2 == 0) spec[up / 2] = 0.0;
    const auto phase = dsp::irfft(std::move(spec), up);

    std::vector<cplx> field(up);
    for (std::size_t k = 0; k < up; ++k) field[k] = amp[k] * std::polar(1.0, phase[k]);
    std::vector<cplx> out(up);
    dsp::fft(field, out);
    return out;
}

}  // namespace

KkResult kk_recover_diag(const PhotocurrentTrace& trace, int upsample_factor) {
    KkResult result;
    const auto spec = kk_field_spectrum(trace, upsample_factor, result.diagnostics);
    result.field.samples = dsp::resample_spectrum(spec, trace.size());
    dsp::ifft(result.field.samples);
    result.field.sample_rate = trace.sample_rate;
    result.field.t0 = trace.t0;
    return result;
}

DemodulatedFrame kk_demodulate(const PhotocurrentTrace& trace, int upsample_factor, const ModulationParams& params,
                               const PulseFilters& filters) {
    const std::size_t length = trace.size();
    if (length != params.n_samples() || filters.receive.size() != length) {
        throw std::invalid_argument(
            fmt::format("kk_demodulate: trace has {} samples, frame needs {}", length, params.n_samples()));
    }
    if (trace.t0 != 0.0) throw std::invalid_argument("kk_demodulate: frame must start at t = 0");
    DemodulatedFrame out;
    auto spec = kk_field_spectrum(trace, upsample_factor, out.diagnostics);
    const std::size_t up = spec.size();
    const auto n_up = static_cast<long long>(up);
    const auto len = static_cast<long long>(length);
    out.a_r = spec[0].real() / static_cast<double>(up);
    spec[0] -= out.a_r * static_cast<double>(up);

    // Bin offset of the intermediate frequency on the frame grid.
    const auto q = static_cast<long long>(std::llround(params.intermediate_frequency() * static_cast<double>(length) /
                                                       params.sample_rate()));
    const double inv_u = 1.0 / static_cast<double>(upsample_factor);
    auto at = [&](long long j) { return spec[static_cast<std::size_t>(((j % n_up) + n_up) % n_up)]; };

    const std::size_t n = params.n_symbols;
    std::vector<cplx> folded(n, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < length; ++k) {
        const double h = filters.receive[k];
        if (h == 0.0) continue;
        const long long s = 2 * k <= length ? static_cast<long long>(k) : static_cast<long long>(k) - len;
        // Bin of the frame-rate field spectrum that the IF shift moves onto s.
        long long j = ((s + q) % len + len) % len;
        if (2 * j > len) j -= len;
        cplx v = at(j);
        if (up != length && 2 * j == len) v += at(-j);
        folded[k % n] += v * (h * inv_u);
    }
    dsp::ifft(folded);
    simd::kernels().scale(folded.data(), 1.0 / static_cast<double>(params.samples_per_symbol), n);
    out.symbols = std::move(folded);
    return out;
}

ComplexWaveform kk_recover(const PhotocurrentTrace& trace, int upsample_factor) {
    return kk_recover_diag(trace, upsample_factor).field;
}

double estimate_dc(const ComplexWaveform& wf) {
    if (wf.samples.empty()) throw std::invalid_argument("estimate_dc: empty waveform");
    return simd::kernels().sum_real(wf.samples.data(), wf.size()) / static_cast<double>(wf.size());
}

RecoveredFrame demodulate(const ComplexWaveform& wf, double a_r, const ModulationParams& params) {
    return demodulate(wf, a_r, params, design_pulse_filters(params));
}

RecoveredFrame demodulate(const ComplexWaveform& wf, double a_r, const ModulationParams& params,
                          const PulseFilters& filters) {
    if (wf.size() != params.n_samples()) {
        throw std::invalid_argument(
            fmt::format("demodulate: waveform has {} samples, frame needs {}", wf.size(), params.n_samples()));
    }
    const auto phasor = phasor_table(-params.intermediate_frequency(), wf.sample_rate, wf.t0, wf.size());
    ComplexWaveform base;
    base.sample_rate = wf.sample_rate;
    base.t0 = wf.t0;
    base.samples.resize(wf.size());
    simd::kernels().offset_multiply(wf.samples.data(), a_r, phasor.data(), base.samples.data(), wf.size());
    RecoveredFrame out;
    out.symbols = matched_filter_downsample(base, params, filters);
    out.a_r_estimate = a_r;
    return out;
}

Correlation cross_correlate(std::span<const cplx> rx, std::span<const cplx> tx) {
    if (rx.empty() || tx.empty()) throw std::invalid_argument("cross_correlate: empty frame");
    if (rx.size() != tx.size()) throw std::invalid_argument("cross_correlate: frames differ in length");
    const std::size_t n = rx.size();
    auto centred = [n](std::span<const cplx> x, double& energy) {
        cplx mean(0.0, 0.0);
        for (const cplx& v : x) mean += v;
        mean /= static_cast<double>(n);
        std::vector<cplx> y(n);
        energy = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            y[k] = x[k] - mean;
            energy += std::norm(y[k]);
        }
        return y;
    };
    double e_rx = 0.0;
    double e_tx = 0.0;
    auto r = centred(rx, e_rx);
    auto t = centred(tx, e_tx);
    if (e_rx == 0.0 || e_tx == 0.0) throw std::invalid_argument("cross_correlate: zero-variance input");
    dsp::fft(r);
    dsp::fft(t);
    for (std::size_t k = 0; k < n; ++k) r[k] *= std::conj(t[k]);
    dsp::ifft(r);
    const double norm = 1.0 / std::sqrt(e_rx * e_tx);
    Correlation c;
    std::size_t best = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(r[k]) > std::abs(r[best])) best = k;
    }
    c.peak = std::abs(r[best]) * norm;
    c.zero_lag = std::abs(r[0]) * norm;
    c.lag = 2 * best > n ? static_cast<int>(best) - static_cast<int>(n) : static_cast<int>(best);
    return c;
}

std::vector<cplx> align(std::span<const cplx> rx, int lag) {
    const auto n = static_cast<long long>(rx.size());
    std::vector<cplx> out(rx.size());
    if (n == 0) return out;
    for (long long k = 0; k < n; ++k) {
        long long src = (k + lag) % n;
        if (src < 0) src += n;
        out[static_cast<std::size_t>(k)] = rx[static_cast<std::size_t>(src)];
    }
    return out;
}

MonitorStatus monitor_dc_intensity(double a_r_measured, double a_r_reference, double threshold_fraction) {
    if (a_r_reference == 0.0) throw std::invalid_argument("monitor_dc_intensity: zero reference");
    return std::abs(a_r_measured - a_r_reference) / std::abs(a_r_reference) > threshold_fraction
               ? MonitorStatus::alarm
               : MonitorStatus::ok;
}

void write_trace_csv(std::ostream& out, const PhotocurrentTrace& trace) {
    out << "t,i\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
        fmt::print(out, "{:.17g},{:.17g}\n", trace.t0 + static_cast<double>(k) / trace.sample_rate, trace.samples[k]);
    }
}

void write_symbols_csv(std::ostream& out, std::span<const cplx> tx, std::span<const cplx> rx) {
    if (tx.size() != rx.size()) throw std::invalid_argument("write_symbols_csv: length mismatch");
    out << "index,re_tx,im_tx,re_rx,im_rx\n";
    for (std::size_t k = 0; k < tx.size(); ++k) {
        fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{:.17g}\n", k, tx[k].real(), tx[k].imag(), rx[k].real(),
                   rx[k].imag());
    }
}

}  // namespace ddqkd
