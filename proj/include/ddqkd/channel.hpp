#pragma once

// Fibre spans, splitters and fixed losses; per-user effective channel; noise
// injection on the sampled field.
//
// Noise is referenced to symbol level: after the receive filter and symbol
// sampling, a white field of per-sample quadrature variance s lands at
// s * noise_gain / samples_per_symbol per quadrature.

#include <cstdint>
#include <string>
#include <vector>

#include "ddqkd/waveform.hpp"

namespace ddqkd {

struct ChannelSegment {
    enum class Kind { fiber, splitter, fixed };

    Kind kind = Kind::fiber;
    double length_km = 0.0;
    double alpha_db_per_km = 0.2;
    double loss_db = 0.0;
    double excess_noise = 0.0;  // SNU, input referred

    static ChannelSegment fiber(double length_km, double alpha_db_per_km, double excess_noise = 0.0);
    static ChannelSegment splitter(int n_ports, double excess_noise = 0.0);
    static ChannelSegment fixed(double loss_db, double excess_noise = 0.0);

    void validate() const;
};

std::string to_string(ChannelSegment::Kind kind);

struct ReceiverParams {
    double eta = 1.0;
    double v_el_physical = 0.0;  // photocurrent noise variance
};

struct QanTopology {
    std::vector<ChannelSegment> trunk;
    ChannelSegment splitter = ChannelSegment::splitter(1);
    std::vector<std::vector<ChannelSegment>> branches;  // one per user
    std::vector<ReceiverParams> receivers;              // one per user

    std::size_t n_users() const { return branches.size(); }
    void validate() const;
};

struct EffectiveChannel {
    double transmittance_t = 1.0;
    double excess_noise_eps = 0.0;
};

double segment_transmittance(const ChannelSegment& seg);

EffectiveChannel compose_effective_channel(const QanTopology& topology, std::size_t user);

// Sum of 1/sum_m RC(f - m Rs)^2 over symbol-rate alias classes, divided by
// n_symbols: the variance gain of the receive filter for white noise.
double receive_noise_gain(const ModulationParams& params);

// sqrt(T) * wf plus excess noise of per-quadrature variance T * eps at symbol
// level, confined to the signal band [f_IF - B/2, f_IF + B/2]. wf is the
// carrier-free minimum-phase field.
ComplexWaveform propagate(const ComplexWaveform& wf, const EffectiveChannel& channel,
                          const ModulationParams& params, std::uint64_t seed);

// sqrt(eta) * wf
ComplexWaveform attenuate(const ComplexWaveform& wf, double power_transmittance);

// White complex vacuum over the whole simulated band, per-quadrature variance
// `scale` at symbol level in each of the signal and image bands.
ComplexWaveform inject_vacuum(const ComplexWaveform& wf, double scale, const ModulationParams& params,
                              std::uint64_t seed);

}  // namespace ddqkd
