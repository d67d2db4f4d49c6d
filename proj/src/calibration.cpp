#include "ddqkd/calibration.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ddqkd {
namespace {

constexpr std::uint64_t kElectronicRun = 0xE1EC7;

}  // namespace

void CalibrationRecord::validate() const {
    if (!(snu_per_quadrature > 0.0)) throw std::invalid_argument("calibration: snu_per_quadrature must be > 0");
    if (!(v_el >= 0.0)) throw std::invalid_argument("calibration: v_el must be >= 0");
}

void write_calibration(std::ostream& out, const CalibrationRecord& rec) {
    fmt::print(out, "snu_per_quadrature: {:.17g}\n", rec.snu_per_quadrature);
    fmt::print(out, "v_el: {:.17g}\n", rec.v_el);
    fmt::print(out, "a_r_reference: {:.17g}\n", rec.a_r_reference);
    fmt::print(out, "c_offset: {:.17g}\n", rec.c_offset);
    fmt::print(out, "shot_raw_variance: {:.17g}\n", rec.shot_raw_variance);
    fmt::print(out, "electronic_raw_variance: {:.17g}\n", rec.electronic_raw_variance);
    fmt::print(out, "a_r_fluctuation: {:.17g}\n", rec.a_r_fluctuation);
    fmt::print(out, "n_symbols: {}\n", rec.n_symbols);
}

CalibrationRecord read_calibration(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) {
            throw std::runtime_error(fmt::format("calibration record line {}: expected `key: value`", lineno));
        }
        std::string key = line.substr(0, colon);
        std::string value = line.substr(colon + 1);
        auto trim = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
        };
        trim(key);
        trim(value);
        kv[key] = value;
    }
    auto get = [&kv](const char* key) {
        const auto it = kv.find(key);
        if (it == kv.end()) throw std::runtime_error(fmt::format("calibration record: missing `{}`", key));
        return std::stod(it->second);
    };
    CalibrationRecord rec;
    rec.snu_per_quadrature = get("snu_per_quadrature");
    rec.v_el = get("v_el");
    rec.a_r_reference = get("a_r_reference");
    rec.c_offset = get("c_offset");
    if (kv.count("shot_raw_variance")) rec.shot_raw_variance = get("shot_raw_variance");
    if (kv.count("electronic_raw_variance")) rec.electronic_raw_variance = get("electronic_raw_variance");
    if (kv.count("a_r_fluctuation")) rec.a_r_fluctuation = get("a_r_fluctuation");
    if (kv.count("n_symbols")) rec.n_symbols = static_cast<std::size_t>(get("n_symbols"));
    return rec;
}

void save_calibration(const std::filesystem::path& path, const CalibrationRecord& rec) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_calibration(out, rec);
}

CalibrationRecord load_calibration(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read calibration record " + path.string());
    return read_calibration(in);
}

ShotNoiseResult calibrate_shot_noise(const LinkParams& link, std::size_t n_frames, std::uint64_t seed) {
    if (n_frames == 0) throw std::invalid_argument("calibrate_shot_noise: need at least one frame");
    LinkParams p = link;
    p.modulate = false;
    p.channel.excess_noise_eps = 0.0;
    const LinkContext ctx(p);
    ShotNoiseResult res;
    double var_acc = 0.0;
    double a_acc = 0.0;
    double a_sq = 0.0;
    double c_acc = 0.0;
    for (std::size_t f = 0; f < n_frames; ++f) {
        const FrameOutput out = run_frame(ctx, frame_seed(seed, 0, f));
        if (out.winding != 0) ++res.winding_failures;
        var_acc += quadrature_variance(out.rx);
        a_acc += out.a_r;
        a_sq += out.a_r * out.a_r;
        c_acc += out.mean_current;
    }
    const double n = static_cast<double>(n_frames);
    res.raw_variance = var_acc / n;
    res.a_r_reference = a_acc / n;
    res.a_r_fluctuation = n > 1 ? std::sqrt(std::max(0.0, (a_sq - a_acc * a_acc / n) / (n - 1.0))) : 0.0;
    res.c_offset = c_acc / n;
    res.n_symbols = n_frames * p.mod.n_symbols;
    return res;
}

double electronic_raw_variance(const PhotocurrentTrace& elec_trace, double c_offset, const LinkContext& ctx) {
    if (elec_trace.size() < ctx.params.mod.n_samples()) {
        throw std::invalid_argument(fmt::format("calibrate_electronic_noise: trace has {} samples, frame needs {}",
                                                elec_trace.size(), ctx.params.mod.n_samples()));
    }
    PhotocurrentTrace shifted = elec_trace;
    shifted.samples.resize(ctx.params.mod.n_samples());
    for (double& v : shifted.samples) v += c_offset;
    return quadrature_variance(process_trace(ctx, shifted).rx);
}

double calibrate_electronic_noise(const PhotocurrentTrace& elec_trace, double c_offset, double snu_per_quadrature,
                                  const LinkContext& ctx) {
    if (!(snu_per_quadrature > 0.0)) throw std::invalid_argument("calibrate_electronic_noise: snu must be > 0");
    return electronic_raw_variance(elec_trace, c_offset, ctx) / snu_per_quadrature;
}

CalibrationRecord calibrate(const LinkParams& link, std::size_t n_frames, std::uint64_t seed,
                            std::size_t n_electronic_frames) {
    const ShotNoiseResult shot = calibrate_shot_noise(link, n_frames, seed);
    const std::size_t n_elec = n_electronic_frames > 0 ? n_electronic_frames : n_frames;
    LinkParams p = link;
    p.modulate = false;
    const LinkContext ctx(p);
    double elec = 0.0;
    if (p.elec_variance > 0.0) {
        for (std::size_t f = 0; f < n_elec; ++f) {
            const auto trace = electronic_trace(ctx, frame_seed(seed, kElectronicRun, f));
            elec += electronic_raw_variance(trace, shot.c_offset, ctx);
        }
        elec /= static_cast<double>(n_elec);
    }
    CalibrationRecord rec;
    rec.shot_raw_variance = shot.raw_variance;
    rec.electronic_raw_variance = elec;
    rec.snu_per_quadrature = shot.raw_variance - elec;
    rec.v_el = rec.snu_per_quadrature > 0.0 ? elec / rec.snu_per_quadrature : 0.0;
    rec.a_r_reference = shot.a_r_reference;
    rec.a_r_fluctuation = shot.a_r_fluctuation;
    rec.c_offset = shot.c_offset;
    rec.n_symbols = shot.n_symbols;
    return rec;
}

}  // namespace ddqkd
