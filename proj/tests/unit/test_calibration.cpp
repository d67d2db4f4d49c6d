#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "ddqkd/calibration.hpp"
#include "ddqkd/estimation.hpp"

using namespace ddqkd;

namespace {

LinkParams small_link() {
    LinkParams p;
    p.mod.n_symbols = 2000;
    p.mod.v_a = 5.0;
    p.channel = {0.2, 0.0};
    p.eta = 0.72;
    p.upsample = 2;
    return p;
}

}  // namespace

TEST_CASE("calibration record round trip") {
    CalibrationRecord r;
    r.snu_per_quadrature = 2.0316201234567891;
    r.v_el = 0.0171812345;
    r.a_r_reference = 102.83;
    r.c_offset = 10757.3;
    r.shot_raw_variance = 2.07;
    r.electronic_raw_variance = 0.035;
    r.a_r_fluctuation = 0.01;
    r.n_symbols = 40000;
    std::stringstream s;
    write_calibration(s, r);
    const auto back = read_calibration(s);
    CHECK(back.snu_per_quadrature == r.snu_per_quadrature);
    CHECK(back.v_el == r.v_el);
    CHECK(back.a_r_reference == r.a_r_reference);
    CHECK(back.c_offset == r.c_offset);
    CHECK(back.n_symbols == r.n_symbols);

    const auto path = std::filesystem::temp_directory_path() / "ddqkd_cal_roundtrip.txt";
    save_calibration(path, r);
    CHECK(load_calibration(path).electronic_raw_variance == r.electronic_raw_variance);
    std::filesystem::remove(path);
}

TEST_CASE("calibration record validation") {
    CalibrationRecord r;
    CHECK_THROWS(r.validate());
    r.snu_per_quadrature = 1.0;
    r.a_r_reference = 1.0;
    r.n_symbols = 1;
    CHECK_NOTHROW(r.validate());
    r.v_el = -0.1;
    CHECK_THROWS(r.validate());
    std::istringstream broken("snu_per_quadrature: banana\n");
    CHECK_THROWS(read_calibration(broken));
}

TEST_CASE("calibration without electronic noise gives v_el = 0") {
    const auto rec = calibrate(small_link(), 2, 5);
    CHECK(rec.v_el == 0.0);
    CHECK(rec.electronic_raw_variance == 0.0);
    CHECK(rec.snu_per_quadrature == doctest::Approx(2.0).epsilon(0.05));
    const auto again = calibrate(small_link(), 2, 5);
    CHECK(again.snu_per_quadrature == rec.snu_per_quadrature);
    CHECK(again.a_r_reference == rec.a_r_reference);
}

TEST_CASE("channel excess noise does not leak into the shot-noise reference") {
    LinkParams p = small_link();
    const auto clean = calibrate_shot_noise(p, 2, 5);
    p.channel.excess_noise_eps = 0.5;
    const auto noisy = calibrate_shot_noise(p, 2, 5);
    CHECK(noisy.raw_variance == clean.raw_variance);
}

TEST_CASE("electronic noise calibrates to the configured level") {
    LinkParams p = small_link();
    const double a_r = std::sqrt(p.eta * p.channel.transmittance_t) * p.mod.dc_amplitude();
    p.elec_variance = electronic_variance_for(0.1, a_r, p);
    const auto rec = calibrate(p, 3, 8);
    CHECK(rec.v_el == doctest::Approx(0.1).epsilon(0.1));
    CHECK(rec.a_r_reference == doctest::Approx(a_r).epsilon(5e-3));
}

TEST_CASE("calibrated v_el falls as the DC level rises") {
    LinkParams p = small_link();
    const double a_r = std::sqrt(p.eta * p.channel.transmittance_t) * p.mod.dc_amplitude();
    p.elec_variance = electronic_variance_for(0.1, a_r, p);
    double prev = 1e9;
    for (double scale : {1.0, 2.0, 3.0}) {
        LinkParams q = p;
        q.mod.g = p.mod.g * scale;
        const auto rec = calibrate(q, 2, 11);
        CHECK(rec.v_el < prev);
        prev = rec.v_el;
    }
}

TEST_CASE("vacuum frames normalize to unit variance") {
    const LinkParams p = small_link();
    const auto cal = calibrate(p, 2, 3);
    LinkParams q = p;
    q.modulate = false;
    const LinkContext ctx(q);
    double v = 0.0;
    const int frames = 3;
    for (int f = 0; f < frames; ++f) v += quadrature_variance(normalize_to_snu(run_frame(ctx, frame_seed(77, 0, f)).rx, cal));
    v /= frames;
    const double n = frames * 2.0 * p.mod.n_symbols;
    CHECK(std::abs(v - 1.0) < 4.0 * std::sqrt(2.0 / n));
}
