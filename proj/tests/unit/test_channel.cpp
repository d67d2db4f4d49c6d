#include <doctest.h>

#include <cmath>

#include "ddqkd/channel.hpp"
#include "ddqkd/receiver.hpp"

using namespace ddqkd;

namespace {

ModulationParams small_params() {
    ModulationParams p;
    p.n_symbols = 4000;
    return p;
}

ComplexWaveform silent(const ModulationParams& p) {
    ComplexWaveform wf;
    wf.sample_rate = p.sample_rate();
    wf.samples.assign(p.n_samples(), cplx(0.0, 0.0));
    return wf;
}

// Per-quadrature variance at symbol level in the signal band.
double band_variance(const ComplexWaveform& wf, const ModulationParams& p) {
    const auto y = demodulate(wf, 0.0, p).symbols;
    double v = 0.0;
    for (cplx c : y) v += 0.5 * std::norm(c);
    return v / static_cast<double>(y.size());
}

}  // namespace

TEST_CASE("segment transmittance") {
    CHECK(segment_transmittance(ChannelSegment::fiber(10.0, 0.2)) == doctest::Approx(std::pow(10.0, -0.2)));
    CHECK(segment_transmittance(ChannelSegment::splitter(4)) == doctest::Approx(0.25));
    CHECK(segment_transmittance(ChannelSegment::fixed(3.0)) == doctest::Approx(0.501187).epsilon(1e-5));
    CHECK(segment_transmittance(ChannelSegment::fiber(0.0, 0.2)) == 1.0);
    CHECK(to_string(ChannelSegment::Kind::splitter) == "splitter");
}

TEST_CASE("segment validation") {
    CHECK_THROWS_AS(ChannelSegment::fiber(-1.0, 0.2).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ChannelSegment::fiber(1.0, -0.2).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ChannelSegment::fixed(-3.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ChannelSegment::fixed(3.0, -0.1).validate(), std::invalid_argument);
    CHECK_THROWS(ChannelSegment::splitter(0));
}

TEST_CASE("effective channel multiplies transmittance and adds excess noise") {
    QanTopology t;
    t.trunk = {ChannelSegment::fiber(2.5, 0.21)};
    t.splitter = ChannelSegment::fixed(6.0);
    t.branches = {{ChannelSegment::fiber(2.5, 0.21, 0.0237)}, {ChannelSegment::fiber(7.5, 0.21, 0.01)}};
    t.receivers = {{0.72, 0.0}, {0.72, 0.0}};
    const auto c0 = compose_effective_channel(t, 0);
    CHECK(c0.transmittance_t == doctest::Approx(std::pow(10.0, -(0.21 * 5 + 6) / 10)));
    CHECK(c0.excess_noise_eps == doctest::Approx(0.0237));
    const auto c1 = compose_effective_channel(t, 1);
    CHECK(c1.transmittance_t == doctest::Approx(std::pow(10.0, -(0.21 * 10 + 6) / 10)));
    CHECK_THROWS_AS(compose_effective_channel(t, 2), std::out_of_range);
}

TEST_CASE("attenuation scales amplitude by sqrt of power transmittance") {
    ComplexWaveform wf;
    wf.samples = {cplx(2.0, -4.0)};
    const auto out = attenuate(wf, 0.25);
    CHECK(out.samples[0] == cplx(1.0, -2.0));
    CHECK_THROWS(attenuate(wf, -0.5));
}

TEST_CASE("excess noise lands at T eps per quadrature in the signal band") {
    const ModulationParams p = small_params();
    const EffectiveChannel ch{0.5, 0.2};
    const auto out = propagate(silent(p), ch, p, 3);
    const double v = band_variance(out, p);
    CHECK(v == doctest::Approx(ch.transmittance_t * ch.excess_noise_eps).epsilon(0.06));
}

TEST_CASE("excess noise stays inside the signal band") {
    const ModulationParams p = small_params();
    auto out = propagate(silent(p), {1.0, 1.0}, p, 4);
    // Shift the band away: demodulating at the image frequency sees nothing.
    ModulationParams image = p;
    image.if_frequency = p.intermediate_frequency() + p.bandwidth_b;
    CHECK(band_variance(out, image) < 1e-20);
}

TEST_CASE("vacuum has the configured level in the signal band") {
    const ModulationParams p = small_params();
    const auto out = inject_vacuum(silent(p), 0.7, p, 9);
    CHECK(band_variance(out, p) == doctest::Approx(0.7).epsilon(0.06));
    const auto again = inject_vacuum(silent(p), 0.7, p, 9);
    CHECK(again.samples == out.samples);
}

TEST_CASE("receive noise gain") {
    const ModulationParams p = small_params();
    CHECK(receive_noise_gain(p) == doctest::Approx(design_pulse_filters(p).noise_gain).epsilon(1e-12));
    ModulationParams brick = p;
    brick.rolloff = 0.0;
    CHECK(receive_noise_gain(brick) == doctest::Approx(1.0).epsilon(1e-3));
}
