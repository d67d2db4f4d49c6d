#include "ddqkd/link.hpp"

#include <cmath>

#include "ddqkd/random.hpp"
#include "ddqkd/simd/kernels.hpp"

namespace ddqkd {

LinkContext::LinkContext(const LinkParams& p) : params(p), filters(design_pulse_filters(p.mod)) {
    params.mod.validate();
}

std::uint64_t frame_seed(std::uint64_t seed, std::size_t user, std::size_t frame) {
    return Rng::derive(seed, {static_cast<std::uint64_t>(user), static_cast<std::uint64_t>(frame)});
}

ComplexWaveform received_field(const LinkContext& ctx, const SymbolFrame& symbols, std::uint64_t seed) {
    const LinkParams& p = ctx.params;
    ModulationParams tx = p.mod;
    tx.g *= p.dc_gain;
    ComplexWaveform shaped;
    if (p.modulate) {
        shaped = pulse_shape(symbols, p.mod);
    } else {
        shaped.sample_rate = p.mod.sample_rate();
        shaped.samples.assign(p.mod.n_samples(), cplx(0.0, 0.0));
    }
    ComplexWaveform field = to_minimum_phase(shaped, tx);
    field = propagate(field, p.channel, p.mod, seed);
    field = attenuate(field, p.eta);
    return inject_vacuum(field, p.vacuum_scale, p.mod, seed);
}

FrameOutput process_trace(const LinkContext& ctx, const PhotocurrentTrace& trace) {
    const LinkParams& p = ctx.params;
    FrameOutput out;
    out.mean_current = simd::kernels().sum(trace.samples.data(), trace.size()) / static_cast<double>(trace.size());
    DemodulatedFrame d = kk_demodulate(trace, p.upsample, p.mod, ctx.filters);
    out.kk = d.diagnostics;
    out.a_r = d.a_r;
    out.rx = std::move(d.symbols);
    return out;
}

FrameOutput run_frame(const LinkContext& ctx, std::uint64_t seed) {
    const LinkParams& p = ctx.params;
    ModulationParams mod = p.mod;
    mod.seed = seed;
    SymbolFrame symbols;
    if (p.modulate) {
        symbols = generate_symbols(mod);
    } else {
        symbols.symbols.assign(mod.n_symbols, cplx(0.0, 0.0));
    }

    const ComplexWaveform field = received_field(ctx, symbols, seed);
    PolarWaveform polar = to_polar(field);
    const int winding = winding_number(polar.phase);
    add_carrier(polar, p.mod.f_car);
    if (p.phase != 0.0) rotate_phase(polar, p.phase);
    if (p.phase_noise_rad > 0.0) {
        Rng rng(Rng::derive(seed, {static_cast<std::uint64_t>(Stream::phase)}));
        std::vector<double> walk(polar.size());
        double acc = 0.0;
        for (double& w : walk) {
            acc += p.phase_noise_rad * rng.gaussian();
            w = acc;
        }
        rotate_phase(polar, walk);
    }
    const PhotocurrentTrace trace = direct_detect(polar, p.mu, p.elec_variance, seed);

    FrameOutput out = process_trace(ctx, trace);
    out.winding = winding;
    out.tx = std::move(symbols.symbols);
    if (p.modulate) {
        out.correlation = cross_correlate(out.rx, out.tx);
        if (out.correlation.lag != 0) out.rx = align(out.rx, out.correlation.lag);
    }
    return out;
}

PhotocurrentTrace electronic_trace(const LinkContext& ctx, std::uint64_t seed) {
    PolarWaveform dark;
    dark.sample_rate = ctx.params.mod.sample_rate();
    dark.modulus.assign(ctx.params.mod.n_samples(), 0.0);
    dark.phase.assign(ctx.params.mod.n_samples(), 0.0);
    return direct_detect(dark, ctx.params.mu, ctx.params.elec_variance, seed);
}

double quadrature_variance(const std::vector<cplx>& x) {
    if (x.empty()) return 0.0;
    const double n = static_cast<double>(x.size());
    cplx mean(0.0, 0.0);
    for (const cplx& v : x) mean += v;
    mean /= n;
    double acc = 0.0;
    for (const cplx& v : x) acc += std::norm(v - mean);
    return 0.5 * acc / n;
}

double electronic_variance_for(double v_el, double a_r, const LinkParams& params) {
    const double kappa = receive_noise_gain(params.mod);
    return 4.0 * params.mu * params.mu * a_r * a_r * params.mod.samples_per_symbol * params.vacuum_scale * v_el /
           kappa;
}

}  // namespace ddqkd
