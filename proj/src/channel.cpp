#include "ddqkd/channel.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

#include "ddqkd/dsp/fft.hpp"
#include "ddqkd/random.hpp"
#include "ddqkd/simd/kernels.hpp"

namespace ddqkd {

ChannelSegment ChannelSegment::fiber(double length_km, double alpha_db_per_km, double excess_noise) {
    ChannelSegment s;
    s.kind = Kind::fiber;
    s.length_km = length_km;
    s.alpha_db_per_km = alpha_db_per_km;
    s.excess_noise = excess_noise;
    return s;
}

ChannelSegment ChannelSegment::splitter(int n_ports, double excess_noise) {
    if (n_ports < 1) throw std::invalid_argument("splitter: need at least one port");
    ChannelSegment s;
    s.kind = Kind::splitter;
    s.loss_db = 10.0 * std::log10(static_cast<double>(n_ports));
    s.excess_noise = excess_noise;
    return s;
}

ChannelSegment ChannelSegment::fixed(double loss_db, double excess_noise) {
    ChannelSegment s;
    s.kind = Kind::fixed;
    s.loss_db = loss_db;
    s.excess_noise = excess_noise;
    return s;
}

void ChannelSegment::validate() const {
    if (!(length_km >= 0.0)) throw std::invalid_argument("segment: length_km must be >= 0");
    if (!(alpha_db_per_km >= 0.0)) throw std::invalid_argument("segment: alpha_db_per_km must be >= 0");
    if (!(loss_db >= 0.0)) throw std::invalid_argument("segment: loss_db must be >= 0");
    if (!(excess_noise >= 0.0)) throw std::invalid_argument("segment: excess_noise must be >= 0");
}

std::string to_string(ChannelSegment::Kind kind) {
    switch (kind) {
        case ChannelSegment::Kind::fiber: return "fiber";
        case ChannelSegment::Kind::splitter: return "splitter";
        case ChannelSegment::Kind::fixed: return "fixed";
    }
    return "?";
}

void QanTopology::validate() const {
    if (branches.empty()) throw std::invalid_argument("topology: at least one user required");
    if (receivers.size() != branches.size()) {
        throw std::invalid_argument(fmt::format("topology: {} branches but {} receivers", branches.size(),
                                                receivers.size()));
    }
    for (const auto& s : trunk) s.validate();
    splitter.validate();
    for (const auto& b : branches)
        for (const auto& s : b) s.validate();
    for (std::size_t u = 0; u < receivers.size(); ++u) {
        const auto& r = receivers[u];
        if (!(r.eta > 0.0 && r.eta <= 1.0)) throw std::invalid_argument(fmt::format("receiver {}: eta outside (0, 1]", u));
        if (!(r.v_el_physical >= 0.0)) throw std::invalid_argument(fmt::format("receiver {}: negative electronic noise", u));
    }
}

double segment_transmittance(const ChannelSegment& seg) {
    if (seg.kind == ChannelSegment::Kind::fiber) return std::pow(10.0, -seg.alpha_db_per_km * seg.length_km / 10.0);
    return std::pow(10.0, -seg.loss_db / 10.0);
}

EffectiveChannel compose_effective_channel(const QanTopology& topology, std::size_t user) {
    if (user >= topology.n_users()) {
        throw std::out_of_range(fmt::format("unknown user {} (topology has {})", user, topology.n_users()));
    }
    EffectiveChannel ch;
    auto add = [&ch](const ChannelSegment& s) {
        ch.transmittance_t *= segment_transmittance(s);
        ch.excess_noise_eps += s.excess_noise;
    };
    for (const auto& s : topology.trunk) add(s);
    add(topology.splitter);
    for (const auto& s : topology.branches[user]) add(s);
    return ch;
}

double receive_noise_gain(const ModulationParams& params) {
    const std::size_t n = params.n_symbols;
    const auto sps = static_cast<std::size_t>(params.samples_per_symbol);
    const std::size_t length = n * sps;
    std::vector<double> fold(n, 0.0);
    const double r = params.rolloff;
    for (std::size_t k = 0; k < length; ++k) {
        const double bins = 2 * k <= length ? static_cast<double>(k) : static_cast<double>(length - k);
        double rc;
        if (r == 0.0) {
            rc = 2.0 * bins < static_cast<double>(n) ? 1.0 : (2.0 * bins == static_cast<double>(n) ? 0.5 : 0.0);
        } else {
            rc = raised_cosine(bins / static_cast<double>(n), 1.0, r);
        }
        fold[k % n] += rc * rc;
    }
    double acc = 0.0;
    for (double f : fold) acc += 1.0 / f;
    return acc / static_cast<double>(n);
}

ComplexWaveform attenuate(const ComplexWaveform& wf, double power_transmittance) {
    if (!(power_transmittance >= 0.0)) throw std::invalid_argument("attenuate: negative transmittance");
    ComplexWaveform out = wf;
    simd::kernels().scale(out.samples.data(), std::sqrt(power_transmittance), out.size());
    return out;
}

ComplexWaveform propagate(const ComplexWaveform& wf, const EffectiveChannel& channel, const ModulationParams& params,
                          std::uint64_t seed) {
    const double t = channel.transmittance_t;
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("propagate: transmittance outside (0, 1]");
    if (!(channel.excess_noise_eps >= 0.0)) throw std::invalid_argument("propagate: negative excess noise");
    ComplexWaveform out = attenuate(wf, t);
    if (channel.excess_noise_eps == 0.0) return out;

    const std::size_t length = out.size();
    const double kappa = receive_noise_gain(params);
    // Per-sample per-quadrature variance of the equivalent white noise; its
    // DFT bins carry length times that.
    const double per_sample = t * channel.excess_noise_eps * params.samples_per_symbol / kappa;
    const double sigma_bin = std::sqrt(per_sample * static_cast<double>(length));
    const double f_lo = params.intermediate_frequency() - 0.5 * params.bandwidth_b;
    const double f_hi = params.intermediate_frequency() + 0.5 * params.bandwidth_b;

    Rng rng(Rng::derive(seed, {static_cast<std::uint64_t>(Stream::excess_noise)}));
    std::vector<cplx> noise(length, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < length; ++k) {
        const double f = dsp::bin_frequency(k, length, out.sample_rate);
        if (f < f_lo || f > f_hi) continue;
        const double a = rng.gaussian();
        const double b = rng.gaussian();
        noise[k] = cplx(sigma_bin * a, sigma_bin * b);
    }
    dsp::ifft(noise);
    for (std::size_t k = 0; k < length; ++k) out.samples[k] += noise[k];
    return out;
}

ComplexWaveform inject_vacuum(const ComplexWaveform& wf, double scale, const ModulationParams& params,
                              std::uint64_t seed) {
    if (!(scale >= 0.0)) throw std::invalid_argument("inject_vacuum: scale must be >= 0");
    ComplexWaveform out = wf;
    if (scale == 0.0) return out;
    const double kappa = receive_noise_gain(params);
    const double sigma = std::sqrt(scale * params.samples_per_symbol / kappa);
    Rng rng(Rng::derive(seed, {static_cast<std::uint64_t>(Stream::vacuum)}));
    const auto w = rng.gaussian_vector(2 * out.size());
    simd::kernels().add_complex_noise(out.samples.data(), w.data(), sigma, out.size());
    return out;
}

}  // namespace ddqkd
