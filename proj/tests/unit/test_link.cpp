#include <doctest.h>

#include <cmath>

#include "ddqkd/link.hpp"

using namespace ddqkd;

namespace {

LinkParams small_link() {
    LinkParams p;
    p.mod.n_symbols = 2000;
    p.mod.v_a = 5.0;
    p.channel = {0.5, 0.0};
    p.eta = 0.8;
    p.upsample = 2;
    return p;
}

}  // namespace

TEST_CASE("frame seeds differ per user and frame") {
    CHECK(frame_seed(1, 0, 0) != frame_seed(1, 0, 1));
    CHECK(frame_seed(1, 0, 1) != frame_seed(1, 1, 0));
    CHECK(frame_seed(1, 2, 3) == frame_seed(1, 2, 3));
}

TEST_CASE("run_frame is deterministic") {
    const LinkContext ctx(small_link());
    const auto a = run_frame(ctx, 42);
    const auto b = run_frame(ctx, 42);
    CHECK(a.rx == b.rx);
    CHECK(a.tx == b.tx);
    CHECK(run_frame(ctx, 43).rx != a.rx);
}

TEST_CASE("received DC level follows the channel") {
    const LinkParams p = small_link();
    const auto out = run_frame(LinkContext(p), 1);
    const double expected = std::sqrt(p.eta * p.channel.transmittance_t) * p.mod.dc_amplitude();
    CHECK(out.a_r == doctest::Approx(expected).epsilon(1e-3));
    CHECK(out.winding == 0);
    CHECK(out.correlation.lag == 0);
    CHECK(out.correlation.peak > 0.7);
}

TEST_CASE("global phase and carrier leave the recovered frame bit-identical") {
    LinkParams p = small_link();
    const auto ref = run_frame(LinkContext(p), 7);
    for (double phase : {0.3, -2.0, 3.1}) {
        p.phase = phase;
        const auto out = run_frame(LinkContext(p), 7);
        CHECK(out.rx == ref.rx);
        CHECK(out.a_r == ref.a_r);
    }
    p.phase = 0.0;
    p.phase_noise_rad = 0.01;
    CHECK(run_frame(LinkContext(p), 7).rx == ref.rx);
}

TEST_CASE("tampered DC amplitude shows in a_r") {
    LinkParams p = small_link();
    p.dc_gain = 1.5;
    const auto out = run_frame(LinkContext(p), 1);
    const double expected = 1.5 * std::sqrt(p.eta * p.channel.transmittance_t) * p.mod.dc_amplitude();
    CHECK(out.a_r == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("electronic noise variance helper is linear in v_el and a_r squared") {
    const LinkParams p = small_link();
    const double a = electronic_variance_for(0.01, 50.0, p);
    CHECK(electronic_variance_for(0.02, 50.0, p) == doctest::Approx(2 * a));
    CHECK(electronic_variance_for(0.01, 100.0, p) == doctest::Approx(4 * a));
}

TEST_CASE("quadrature variance removes the mean") {
    const std::vector<cplx> x{cplx(1, 3), cplx(3, 5)};
    CHECK(quadrature_variance(x) == doctest::Approx(1.0));
}
