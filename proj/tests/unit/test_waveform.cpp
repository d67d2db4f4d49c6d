#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ddqkd/random.hpp"
#include "ddqkd/waveform.hpp"

using namespace ddqkd;

namespace {

ModulationParams small_params() {
    ModulationParams p;
    p.n_symbols = 1000;
    return p;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace

TEST_CASE("default modulation parameters are valid") {
    CHECK_NOTHROW(ModulationParams{}.validate());
    CHECK(ModulationParams{}.intermediate_frequency() == doctest::Approx(5e6));
    CHECK(ModulationParams{}.dc_amplitude() == doctest::Approx(100.0 * std::sqrt(5.0)));
}

TEST_CASE("validate rejects inconsistent parameters") {
    auto bad = [](auto mutate) {
        ModulationParams p;
        mutate(p);
        return p;
    };
    CHECK_THROWS_AS(bad([](auto& p) { p.v_a = 0.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](auto& p) { p.samples_per_symbol = 1; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](auto& p) { p.bandwidth_b = 1.2e6; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](auto& p) { p.samples_per_symbol = 30; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](auto& p) { p.f_car = 5e6; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](auto& p) { p.rolloff = 1.5; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](auto& p) { p.n_symbols = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](auto& p) { p.f_car = 10.00005e6; }).validate(), std::invalid_argument);
}

TEST_CASE("symbols are Gaussian with the requested variance") {
    ModulationParams p;
    p.n_symbols = 100000;
    p.v_a = 7.0;
    const SymbolFrame f = generate_symbols(p);
    double sr = 0, si = 0, mr = 0;
    for (cplx c : f.symbols) {
        sr += c.real() * c.real();
        si += c.imag() * c.imag();
        mr += c.real();
    }
    const double n = static_cast<double>(p.n_symbols);
    const double tol = 5.0 * p.v_a * std::sqrt(2.0 / n);
    CHECK(std::abs(sr / n - p.v_a) < tol);
    CHECK(std::abs(si / n - p.v_a) < tol);
    CHECK(std::abs(mr / n) < 5.0 * std::sqrt(p.v_a / n));

    const SymbolFrame again = generate_symbols(p);
    CHECK(again.symbols == f.symbols);
    p.seed = 2;
    CHECK(generate_symbols(p).symbols != f.symbols);
}

TEST_CASE("raised cosine spectrum") {
    CHECK(raised_cosine(0.0, 1.0, 0.3) == 1.0);
    CHECK(raised_cosine(0.5, 1.0, 0.3) == doctest::Approx(0.5));
    CHECK(raised_cosine(0.65, 1.0, 0.3) == 0.0);
    CHECK(raised_cosine(-0.35, 1.0, 0.3) == 1.0);
    CHECK(raised_cosine(0.5, 1.0, 0.0) == 0.5);
    // Nyquist criterion: folded spectrum is flat.
    for (double f : {0.0, 0.1, 0.27, 0.4}) {
        CHECK(raised_cosine(f, 1.0, 0.3) + raised_cosine(f - 1.0, 1.0, 0.3) == doctest::Approx(1.0));
    }
}

TEST_CASE("pulse shaping has unit peak and no inter-symbol interference") {
    const ModulationParams p = small_params();
    const SymbolFrame f = generate_symbols(p);
    const ComplexWaveform wf = pulse_shape(f, p);
    REQUIRE(wf.size() == p.n_samples());
    double err = 0.0;
    for (std::size_t k = 0; k < p.n_symbols; ++k) {
        err = std::max(err, std::abs(wf.samples[k * p.samples_per_symbol] - f.symbols[k]));
    }
    CHECK(err < 1e-9);
}

TEST_CASE("receive filter inverts the transmit filter at symbol centres") {
    const ModulationParams p = small_params();
    const SymbolFrame f = generate_symbols(p);
    const auto back = matched_filter_downsample(pulse_shape(f, p), p);
    CHECK(max_abs_diff(back, f.symbols) < 1e-9);
}

TEST_CASE("receive filter noise gain matches white-noise simulation") {
    ModulationParams p = small_params();
    p.n_symbols = 4000;
    const PulseFilters filt = design_pulse_filters(p);
    CHECK(filt.noise_gain > 1.0);
    CHECK(filt.noise_gain < 1.3);
    Rng rng(5);
    ComplexWaveform wf;
    wf.sample_rate = p.sample_rate();
    wf.samples.resize(p.n_samples());
    for (auto& z : wf.samples) z = {rng.gaussian(), rng.gaussian()};
    const auto y = matched_filter_downsample(wf, p, filt);
    double v = 0.0;
    for (cplx c : y) v += 0.5 * std::norm(c);
    v /= static_cast<double>(y.size());
    const double expected = filt.noise_gain / p.samples_per_symbol;
    CHECK(v == doctest::Approx(expected).epsilon(5.0 * std::sqrt(1.0 / p.n_symbols)));
}

TEST_CASE("minimum-phase field keeps its trajectory off the origin") {
    const ModulationParams p = small_params();
    const auto mp = to_minimum_phase(pulse_shape(generate_symbols(p), p), p);
    CHECK(check_winding(mp) == 0);
    cplx mean = 0.0;
    for (cplx z : mp.samples) mean += z;
    mean /= static_cast<double>(mp.size());
    CHECK(mean.real() == doctest::Approx(p.dc_amplitude()).epsilon(1e-9));
    CHECK(std::abs(mean.imag()) < 1e-9);
}

TEST_CASE("winding number counts encirclements") {
    std::vector<cplx> loop;
    const int n = 400;
    for (int k = 0; k < n; ++k) loop.push_back(0.1 + std::polar(1.0, 2.0 * std::numbers::pi * 2 * k / n));
    CHECK(check_winding(loop) == 2);
    for (auto& z : loop) z += 2.0;
    CHECK(check_winding(loop) == 0);
    CHECK_THROWS_AS(check_winding(std::vector<cplx>{1.0, 0.0}), std::domain_error);
}

TEST_CASE("minimum-phase failure probability") {
    CHECK(minimum_phase_failure_prob(3.0) == doctest::Approx(std::exp(-4.5)));
    CHECK(minimum_phase_failure_prob(5.257) == doctest::Approx(1e-6).epsilon(0.01));
    CHECK(frame_failure_bound(5.257, 10000) == doctest::Approx(1e-2).epsilon(0.01));
    CHECK(frame_failure_bound(0.1, 10000) == 1.0);
    CHECK_THROWS(minimum_phase_failure_prob(-1.0));
}

TEST_CASE("carrier and phasors") {
    const auto ph = phasor_table(1e6, 1e8, 0.0, 1000);
    for (std::size_t k = 0; k < ph.size(); k += 37) {
        const cplx ref = std::polar(1.0, 2.0 * std::numbers::pi * 1e6 * static_cast<double>(k) / 1e8);
        CHECK(std::abs(ph[k] - ref) < 1e-12);
    }
    ComplexWaveform wf;
    wf.sample_rate = 1e8;
    wf.samples.assign(1000, cplx(1.0, 0.0));
    CHECK_THROWS_AS(add_carrier(wf, 45e6, 10e6), std::invalid_argument);
    const auto up = add_carrier(wf, 1e6);
    CHECK(max_abs_diff(up.samples, ph) < 1e-15);
}

TEST_CASE("polar form round trip and phase-only operations") {
    const ModulationParams p = small_params();
    const auto mp = to_minimum_phase(pulse_shape(generate_symbols(p), p), p);
    PolarWaveform pol = to_polar(mp);
    CHECK(max_abs_diff(to_cartesian(pol).samples, mp.samples) < 1e-9);
    const auto modulus = pol.modulus;
    rotate_phase(pol, 1.234);
    add_carrier(pol, p.f_car);
    CHECK(pol.modulus == modulus);
    const auto rotated = to_cartesian(pol);
    CHECK(std::abs(std::abs(rotated.samples[17]) - std::abs(mp.samples[17])) < 1e-9);
}

TEST_CASE("waveform csv") {
    ComplexWaveform wf;
    wf.sample_rate = 2.0;
    wf.samples = {cplx(1.0, -0.5), cplx(0.25, 2.0)};
    std::ostringstream out;
    write_waveform_csv(out, wf);
    CHECK(out.str() == "t,re,im\n0,1,-0.5\n0.5,0.25,2\n");
}
