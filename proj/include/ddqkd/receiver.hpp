#pragma once

// Direct detection, Kramers-Kronig field recovery, DC calibration and
// demodulation back to symbols.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ddqkd/waveform.hpp"

namespace ddqkd {

struct PhotocurrentTrace {
    std::vector<double> samples;
    double sample_rate = 1.0;
    double mu = 1.0;
    double t0 = 0.0;

    std::size_t size() const { return samples.size(); }
};

struct RecoveredFrame {
    std::vector<cplx> symbols;
    double a_r_estimate = 0.0;
    int alignment_lag = 0;
};

// I[k] = mu |E[k]|^2 + n_el[k], n_el ~ N(0, elec_noise_variance).
PhotocurrentTrace direct_detect(const ComplexWaveform& wf, double mu, double elec_noise_variance,
                                std::uint64_t seed);
PhotocurrentTrace direct_detect(const PolarWaveform& wf, double mu, double elec_noise_variance,
                                std::uint64_t seed);

// Frequency response -i sgn(w); DC and Nyquist bins map to zero.
std::vector<double> hilbert(std::span<const double> x);

struct KkDiagnostics {
    std::size_t clamped = 0;
    std::size_t n_samples = 0;  // after upsampling
    bool flagged = false;       // more than 0.1% of samples clamped
};

struct KkResult {
    ComplexWaveform field;
    KkDiagnostics diagnostics;
};

constexpr double kClampFloor = 1e-12;
constexpr double kClampFlagFraction = 1e-3;

KkResult kk_recover_diag(const PhotocurrentTrace& trace, int upsample_factor);
ComplexWaveform kk_recover(const PhotocurrentTrace& trace, int upsample_factor);

struct DemodulatedFrame {
    std::vector<cplx> symbols;
    double a_r = 0.0;
    KkDiagnostics diagnostics;
};

// kk_recover, estimate_dc and demodulate in one pass, carried out on the
// spectrum of the upsampled field.
DemodulatedFrame kk_demodulate(const PhotocurrentTrace& trace, int upsample_factor, const ModulationParams& params,
                               const PulseFilters& filters);

// Mean of the real part.
double estimate_dc(const ComplexWaveform& wf);

// (wf - a_r) exp(-i 2 pi f_IF t), receive filter, symbol-centre sampling.
RecoveredFrame demodulate(const ComplexWaveform& wf, double a_r, const ModulationParams& params);
RecoveredFrame demodulate(const ComplexWaveform& wf, double a_r, const ModulationParams& params,
                          const PulseFilters& filters);

struct Correlation {
    int lag = 0;        // rx[k] ~ tx[k - lag], in (-n/2, n/2]
    double peak = 0.0;  // |normalized correlation| at lag
    double zero_lag = 0.0;
};

// Circular, mean-removed, normalized so a frame against itself peaks at 1.
Correlation cross_correlate(std::span<const cplx> rx, std::span<const cplx> tx);

// Rotates rx left by lag so rx[k] pairs with tx[k].
std::vector<cplx> align(std::span<const cplx> rx, int lag);

enum class MonitorStatus { ok, alarm };

MonitorStatus monitor_dc_intensity(double a_r_measured, double a_r_reference, double threshold_fraction);

// CSV `t,i`
void write_trace_csv(std::ostream& out, const PhotocurrentTrace& trace);
// CSV `index,re_tx,im_tx,re_rx,im_rx`
void write_symbols_csv(std::ostream& out, std::span<const cplx> tx, std::span<const cplx> rx);

}  // namespace ddqkd
