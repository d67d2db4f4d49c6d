#pragma once

// One frame through the whole chain: symbols, minimum-phase field, channel,
// detector loss, vacuum, carrier, photodiode, KK recovery, demodulation.

#include <cstdint>
#include <vector>

#include "ddqkd/channel.hpp"
#include "ddqkd/receiver.hpp"
#include "ddqkd/waveform.hpp"

namespace ddqkd {

struct LinkParams {
    ModulationParams mod;
    EffectiveChannel channel;
    double eta = 1.0;
    double vacuum_scale = 1.0;
    double mu = 1.0;
    double elec_variance = 0.0;  // photocurrent units
    int upsample = 4;
    double phase = 0.0;          // common optical phase, rad
    double phase_noise_rad = 0.0;  // random-walk phase step std per sample
    double dc_gain = 1.0;        // transmitter DC tamper factor
    bool modulate = true;        // false: DC tone only
};

struct LinkContext {
    LinkParams params;
    PulseFilters filters;

    explicit LinkContext(const LinkParams& p);
};

struct FrameOutput {
    std::vector<cplx> tx;
    std::vector<cplx> rx;  // raw units, aligned to tx when modulated
    double a_r = 0.0;
    double mean_current = 0.0;
    Correlation correlation;
    KkDiagnostics kk;
    int winding = 0;
};

// Seed of frame `frame` for `user` under run seed `seed`.
std::uint64_t frame_seed(std::uint64_t seed, std::size_t user, std::size_t frame);

// Optical field at the photodiode, before the carrier.
ComplexWaveform received_field(const LinkContext& ctx, const SymbolFrame& symbols, std::uint64_t seed);

FrameOutput run_frame(const LinkContext& ctx, std::uint64_t seed);

// Recovered symbols of a detected trace: KK, DC estimate, demodulation.
FrameOutput process_trace(const LinkContext& ctx, const PhotocurrentTrace& trace);

// Electronic-noise-only photocurrent of a frame's length.
PhotocurrentTrace electronic_trace(const LinkContext& ctx, std::uint64_t seed);

// Quadrature variance, mean removed, averaged over re and im.
double quadrature_variance(const std::vector<cplx>& x);

// Photocurrent variance giving electronic noise v_el (SNU) at received DC
// amplitude a_r, for vacuum scale and filters as in ctx.
double electronic_variance_for(double v_el, double a_r, const LinkParams& params);

}  // namespace ddqkd
