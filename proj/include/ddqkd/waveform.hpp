#pragma once

// Transmitter side: Gaussian symbol frames, raised-cosine pulse shaping and
// construction of the carrier-bearing minimum-phase field.
//
// Variance convention: each quadrature of a symbol c = a + ib has variance
// V_A, i.e. Var(a) = Var(b) = V_A (SNU). The DC tone is A = g * sqrt(V_A), so
// |c| is Rayleigh with scale sqrt(V_A) and P(|c| > A) = exp(-g^2 / 2).
//
// All filtering is circular over the frame: a frame is treated as one period
// of a periodic waveform, which is how an arbitrary waveform generator replays
// it. This is what makes the pulse round trip exact.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace ddqkd {

using cplx = std::complex<double>;

struct ModulationParams {
    double v_a = 5.0;                // modulation variance per quadrature, SNU
    double g = 100.0;                // DC scaling, A = g sqrt(v_a)
    double symbol_rate = 1e6;        // Hz
    int samples_per_symbol = 100;
    double bandwidth_b = 10e6;       // spectral-shift parameter B, Hz
    double f_car = 10e6;             // RF carrier, Hz
    double rolloff = 0.3;
    double if_frequency = 0.0;       // omega_IF / 2pi; 0 selects B/2
    std::size_t n_symbols = 10000;
    std::uint64_t seed = 1;

    double sample_rate() const { return symbol_rate * samples_per_symbol; }
    std::size_t n_samples() const { return n_symbols * static_cast<std::size_t>(samples_per_symbol); }
    double dc_amplitude() const;
    double intermediate_frequency() const { return if_frequency > 0.0 ? if_frequency : 0.5 * bandwidth_b; }

    // Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

struct SymbolFrame {
    std::vector<cplx> symbols;
    double v_a_nominal = 0.0;

    std::size_t size() const { return symbols.size(); }
};

struct ComplexWaveform {
    std::vector<cplx> samples;
    double sample_rate = 1.0;
    double t0 = 0.0;

    std::size_t size() const { return samples.size(); }
    double time(std::size_t k) const { return t0 + static_cast<double>(k) / sample_rate; }
};

// Field at the photodiode in modulus/phase form. Phase-only impairments (RF
// carrier, fibre phase drift, laser phase noise) touch `phase` alone, which
// leaves the detected intensity bit-for-bit unchanged.
struct PolarWaveform {
    std::vector<double> modulus;
    std::vector<double> phase;
    double sample_rate = 1.0;
    double t0 = 0.0;

    std::size_t size() const { return modulus.size(); }
};

SymbolFrame generate_symbols(const ModulationParams& params);

// Raised-cosine shaping: symbol k sits at sample k * samples_per_symbol with
// unit peak and exact zeros at every other symbol centre.
ComplexWaveform pulse_shape(const SymbolFrame& frame, const ModulationParams& params);

// A + wf(t) exp(i 2 pi f_IF t), A = g sqrt(v_a), f_IF = B/2 by default.
ComplexWaveform to_minimum_phase(const ComplexWaveform& wf, const ModulationParams& params);

// Multiplies by exp(i 2 pi f_car t). occupied_bandwidth is the one-sided
// extent of the input spectrum; |f_car| + occupied_bandwidth must stay below
// Nyquist.
ComplexWaveform add_carrier(const ComplexWaveform& wf, double f_car, double occupied_bandwidth = 0.0);

// Per-symbol probability that a Gaussian symbol's modulus exceeds A = g sqrt(V_A).
double minimum_phase_failure_prob(double g);
// Union bound over a frame.
double frame_failure_bound(double g, std::size_t n_symbols);

// Winding number of the sampled trajectory around the origin.
int check_winding(const ComplexWaveform& wf);
int check_winding(std::span<const cplx> samples);
// Same count from a sampled phase trajectory.
int winding_number(std::span<const double> phase);

// exp(i 2 pi f t_k) with the cycle count reduced before the trig call.
std::vector<cplx> phasor_table(double frequency, double sample_rate, double t0, std::size_t n);

PolarWaveform to_polar(const ComplexWaveform& wf);
ComplexWaveform to_cartesian(const PolarWaveform& wf);
// phase[k] += offsets[k]
void rotate_phase(PolarWaveform& wf, std::span<const double> offsets);
// phase[k] += theta
void rotate_phase(PolarWaveform& wf, double theta);
// phase[k] += 2 pi f_car t_k
void add_carrier(PolarWaveform& wf, double f_car);

// ---- pulse filters ---------------------------------------------------------

// Raised-cosine spectrum normalized to 1 in the passband.
double raised_cosine(double frequency, double symbol_rate, double rolloff);

// Per-bin responses for an n_symbols * samples_per_symbol DFT.
struct PulseFilters {
    std::vector<double> transmit;  // samples_per_symbol * RC(f)
    std::vector<double> receive;   // RC(f) / sum_m RC(f - m Rs)^2
    // White-noise variance gain of `receive`, relative to an ideal filter of
    // bandwidth symbol_rate: sum |receive|^2 * samples_per_symbol / N.
    double noise_gain = 1.0;
};

PulseFilters design_pulse_filters(const ModulationParams& params);

// Applies the zero-forcing matched filter and samples symbol centres.
std::vector<cplx> matched_filter_downsample(const ComplexWaveform& wf, const ModulationParams& params);
std::vector<cplx> matched_filter_downsample(const ComplexWaveform& wf, const ModulationParams& params,
                                            const PulseFilters& filters);

// CSV with header `t,re,im`.
void write_waveform_csv(std::ostream& out, const ComplexWaveform& wf);

}  // namespace ddqkd
