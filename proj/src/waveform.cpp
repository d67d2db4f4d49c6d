#include "ddqkd/waveform.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "ddqkd/dsp/fft.hpp"
#include "ddqkd/random.hpp"
#include "ddqkd/simd/kernels.hpp"

namespace ddqkd {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// True when frequency * n_symbols / symbol_rate is an integer, i.e. the tone
// completes a whole number of cycles per frame.
bool on_frame_bin(double frequency, const ModulationParams& p) {
    const double bins = frequency * static_cast<double>(p.n_symbols) / p.symbol_rate;
    return std::abs(bins - std::round(bins)) <= 1e-9 * std::max(1.0, std::abs(bins));
}

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("ModulationParams: " + what);
}

// Raised cosine at signed DFT bin k of an L = n * sps point transform, with the
// frequency expressed exactly as k / n symbol rates.
double raised_cosine_bin(long long k, std::size_t n_symbols, double rolloff) {
    const long long ak = k < 0 ? -k : k;
    const auto n = static_cast<long long>(n_symbols);
    if (rolloff == 0.0) {
        if (2 * ak < n) return 1.0;
        if (2 * ak == n) return 0.5;
        return 0.0;
    }
    return raised_cosine(static_cast<double>(ak) / static_cast<double>(n), 1.0, rolloff);
}

long long signed_bin(std::size_t k, std::size_t length) {
    return 2 * k <= length ? static_cast<long long>(k)
                           : static_cast<long long>(k) - static_cast<long long>(length);
}

}  // namespace

double ModulationParams::dc_amplitude() const { return g * std::sqrt(v_a); }

void ModulationParams::validate() const {
    require(std::isfinite(v_a) && v_a > 0.0, "v_a must be > 0");
    require(std::isfinite(g) && g > 0.0, "g must be > 0");
    require(symbol_rate > 0.0, "symbol_rate must be > 0");
    require(samples_per_symbol >= 2, "samples_per_symbol must be >= 2");
    require(rolloff >= 0.0 && rolloff <= 1.0, "rolloff must lie in [0, 1]");
    require(n_symbols > 0, "n_symbols must be > 0 (empty frame)");
    require(bandwidth_b >= (1.0 + rolloff) * symbol_rate * (1.0 - 1e-12),
            "bandwidth_b must be >= (1 + rolloff) * symbol_rate for a single-sideband signal");
    require(f_car >= bandwidth_b, "f_car must be >= bandwidth_b");
    const double f_if = intermediate_frequency();
    require(f_if >= 0.5 * bandwidth_b * (1.0 - 1e-12), "intermediate frequency must be >= B/2");
    require(sample_rate() >= 2.0 * (f_car + f_if + 0.5 * bandwidth_b) * (1.0 - 1e-12),
            fmt::format("sample_rate {} Hz below Nyquist for carrier {} Hz plus band {} Hz",
                        sample_rate(), f_car, f_if + 0.5 * bandwidth_b));
    require(on_frame_bin(f_if, *this), "intermediate frequency must complete whole cycles per frame");
    require(on_frame_bin(f_car, *this), "f_car must complete whole cycles per frame");
}

SymbolFrame generate_symbols(const ModulationParams& params) {
    params.validate();
    Rng rng(Rng::derive(params.seed, {static_cast<std::uint64_t>(Stream::symbols)}));
    const double sigma = std::sqrt(params.v_a);
    SymbolFrame frame;
    frame.v_a_nominal = params.v_a;
    frame.symbols.resize(params.n_symbols);
    for (cplx& c : frame.symbols) {
        const double a = rng.gaussian();
        const double b = rng.gaussian();
        c = cplx(sigma * a, sigma * b);
    }
    return frame;
}

double raised_cosine(double frequency, double symbol_rate, double rolloff) {
    const double a = std::abs(frequency);
    const double f1 = 0.5 * (1.0 - rolloff) * symbol_rate;
    const double f2 = 0.5 * (1.0 + rolloff) * symbol_rate;
    if (rolloff == 0.0) return a < f1 ? 1.0 : (a == f1 ? 0.5 : 0.0);
    if (a <= f1) return 1.0;
    if (a >= f2) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (a - f1) / (rolloff * symbol_rate)));
}

PulseFilters design_pulse_filters(const ModulationParams& params) {
    const std::size_t n = params.n_symbols;
    const auto sps = static_cast<std::size_t>(params.samples_per_symbol);
    const std::size_t length = n * sps;
    PulseFilters f;
    f.transmit.resize(length);
    f.receive.resize(length);
    std::vector<double> rc(length);
    std::vector<double> fold(n, 0.0);
    for (std::size_t k = 0; k < length; ++k) {
        rc[k] = raised_cosine_bin(signed_bin(k, length), n, params.rolloff);
        fold[k % n] += rc[k] * rc[k];
    }
    double energy = 0.0;
    for (std::size_t k = 0; k < length; ++k) {
        f.transmit[k] = static_cast<double>(sps) * rc[k];
        f.receive[k] = rc[k] == 0.0 ? 0.0 : rc[k] / fold[k % n];
        energy += f.receive[k] * f.receive[k];
    }
    f.noise_gain = energy * static_cast<double>(sps) / static_cast<double>(length);
    return f;
}

ComplexWaveform pulse_shape(const SymbolFrame& frame, const ModulationParams& params) {
    if (params.samples_per_symbol < 2) throw std::invalid_argument("pulse_shape: samples_per_symbol must be >= 2");
    if (params.rolloff < 0.0 || params.rolloff > 1.0) throw std::invalid_argument("pulse_shape: rolloff outside [0, 1]");
    if (frame.symbols.empty()) throw std::invalid_argument("pulse_shape: empty frame");
    ModulationParams p = params;
    p.n_symbols = frame.size();
    const PulseFilters filters = design_pulse_filters(p);

    // The spectrum of the zero-stuffed symbol train is the symbol DFT tiled
    // samples_per_symbol times.
    std::vector<cplx> sym(frame.symbols);
    dsp::fft(sym);
    const std::size_t n = sym.size();
    const std::size_t length = p.n_samples();
    ComplexWaveform wf;
    wf.sample_rate = p.sample_rate();
    wf.samples.resize(length);
    for (std::size_t k = 0; k < length; ++k) wf.samples[k] = sym[k % n];
    simd::kernels().real_mask(wf.samples.data(), filters.transmit.data(), length);
    dsp::ifft(wf.samples);
    return wf;
}

std::vector<cplx> matched_filter_downsample(const ComplexWaveform& wf, const ModulationParams& params) {
    ModulationParams p = params;
    const auto sps = static_cast<std::size_t>(params.samples_per_symbol);
    if (sps < 2 || wf.size() % sps != 0) {
        throw std::invalid_argument("matched_filter_downsample: length is not a whole number of symbols");
    }
    p.n_symbols = wf.size() / sps;
    return matched_filter_downsample(wf, p, design_pulse_filters(p));
}

std::vector<cplx> matched_filter_downsample(const ComplexWaveform& wf, const ModulationParams& params,
                                            const PulseFilters& filters) {
    const std::size_t n = params.n_symbols;
    const auto sps = static_cast<std::size_t>(params.samples_per_symbol);
    const std::size_t length = n * sps;
    if (wf.size() != length || filters.receive.size() != length) {
        throw std::invalid_argument("matched_filter_downsample: length mismatch");
    }
    std::vector<cplx> spec(wf.samples);
    dsp::fft(spec);
    simd::kernels().real_mask(spec.data(), filters.receive.data(), length);
    // Sampling every sps-th output folds the spectrum onto n bins.
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < length; ++k) out[k % n] += spec[k];
    dsp::ifft(out);
    simd::kernels().scale(out.data(), 1.0 / static_cast<double>(sps), n);
    return out;
}

std::vector<cplx> phasor_table(double frequency, double sample_rate, double t0, std::size_t n) {
    std::vector<cplx> out(n);
    const double bins = frequency * static_cast<double>(n) / sample_rate;
    const double rounded = std::round(bins);
    if (t0 == 0.0 && n > 0 && std::abs(bins - rounded) <= 1e-9 * std::max(1.0, std::abs(bins))) {
        // Whole cycles per frame: reduce the phase exactly in integers.
        const auto len = static_cast<long long>(n);
        long long q = static_cast<long long>(rounded) % len;
        if (q < 0) q += len;
        for (std::size_t k = 0; k < n; ++k) {
            const long long r = static_cast<long long>((static_cast<unsigned __int128>(q) * k) % n);
            out[k] = std::polar(1.0, kTwoPi * static_cast<double>(r) / static_cast<double>(n));
        }
        return out;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double cycles = frequency * (t0 + static_cast<double>(k) / sample_rate);
        const double frac = cycles - std::floor(cycles);
        out[k] = std::polar(1.0, kTwoPi * frac);
    }
    return out;
}

ComplexWaveform to_minimum_phase(const ComplexWaveform& wf, const ModulationParams& params) {
    const double a = params.dc_amplitude();
    const auto phasor = phasor_table(params.intermediate_frequency(), wf.sample_rate, wf.t0, wf.size());
    ComplexWaveform out;
    out.sample_rate = wf.sample_rate;
    out.t0 = wf.t0;
    out.samples.resize(wf.size());
    simd::kernels().complex_multiply(wf.samples.data(), phasor.data(), out.samples.data(), wf.size());
    for (cplx& z : out.samples) z = cplx(z.real() + a, z.imag());
    return out;
}

ComplexWaveform add_carrier(const ComplexWaveform& wf, double f_car, double occupied_bandwidth) {
    if (std::abs(f_car) + occupied_bandwidth > 0.5 * wf.sample_rate) {
        throw std::invalid_argument(fmt::format(
            "add_carrier: carrier {} Hz plus band {} Hz aliases at sample rate {} Hz", f_car,
            occupied_bandwidth, wf.sample_rate));
    }
    ComplexWaveform out = wf;
    if (f_car == 0.0) return out;
    const auto phasor = phasor_table(f_car, wf.sample_rate, wf.t0, wf.size());
    simd::kernels().complex_multiply(wf.samples.data(), phasor.data(), out.samples.data(), wf.size());
    return out;
}

double minimum_phase_failure_prob(double g) {
    if (!(g >= 0.0)) throw std::invalid_argument("minimum_phase_failure_prob: g must be >= 0");
    return std::exp(-0.5 * g * g);
}

double frame_failure_bound(double g, std::size_t n_symbols) {
    return std::min(1.0, static_cast<double>(n_symbols) * minimum_phase_failure_prob(g));
}

int check_winding(std::span<const cplx> samples) {
    std::vector<double> args(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        if (samples[k] == cplx(0.0, 0.0)) {
            throw std::domain_error(fmt::format("check_winding: sample {} lies on the origin", k));
        }
        args[k] = std::arg(samples[k]);
    }
    return winding_number(args);
}

int winding_number(std::span<const double> phase) {
    if (phase.empty()) return 0;
    double total = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < phase.size(); ++k) {
        const double arg = phase[k];
        if (k > 0) {
            double d = arg - prev;
            if (d > std::numbers::pi) d -= kTwoPi;
            if (d < -std::numbers::pi) d += kTwoPi;
            total += d;
        }
        prev = arg;
    }
    return static_cast<int>(std::lround(total / kTwoPi));
}

int check_winding(const ComplexWaveform& wf) { return check_winding(std::span<const cplx>(wf.samples)); }

PolarWaveform to_polar(const ComplexWaveform& wf) {
    PolarWaveform out;
    out.sample_rate = wf.sample_rate;
    out.t0 = wf.t0;
    out.modulus.resize(wf.size());
    out.phase.resize(wf.size());
    simd::kernels().magnitude(wf.samples.data(), out.modulus.data(), wf.size());
    for (std::size_t k = 0; k < wf.size(); ++k) out.phase[k] = std::arg(wf.samples[k]);
    return out;
}

ComplexWaveform to_cartesian(const PolarWaveform& wf) {
    ComplexWaveform out;
    out.sample_rate = wf.sample_rate;
    out.t0 = wf.t0;
    out.samples.resize(wf.size());
    for (std::size_t k = 0; k < wf.size(); ++k) out.samples[k] = std::polar(wf.modulus[k], wf.phase[k]);
    return out;
}

void rotate_phase(PolarWaveform& wf, std::span<const double> offsets) {
    if (offsets.size() != wf.size()) throw std::invalid_argument("rotate_phase: length mismatch");
    for (std::size_t k = 0; k < wf.size(); ++k) wf.phase[k] += offsets[k];
}

void rotate_phase(PolarWaveform& wf, double theta) {
    for (double& ph : wf.phase) ph += theta;
}

void add_carrier(PolarWaveform& wf, double f_car) {
    for (std::size_t k = 0; k < wf.size(); ++k) {
        const double cycles = f_car * (wf.t0 + static_cast<double>(k) / wf.sample_rate);
        wf.phase[k] += kTwoPi * (cycles - std::floor(cycles));
    }
}

void write_waveform_csv(std::ostream& out, const ComplexWaveform& wf) {
    out << "t,re,im\n";
    for (std::size_t k = 0; k < wf.size(); ++k) {
        fmt::print(out, "{:.17g},{:.17g},{:.17g}\n", wf.time(k), wf.samples[k].real(), wf.samples[k].imag());
    }
}

}  // namespace ddqkd
