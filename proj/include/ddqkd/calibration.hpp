#pragma once

// Shot-noise and electronic-noise calibration. The shot-noise run transmits the
// DC tone alone (vacuum input); the electronic run records the dark
// photocurrent, adds the shot run's mean photocurrent C and pushes it through
// the same KK and demodulation chain.

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "ddqkd/link.hpp"

namespace ddqkd {

struct CalibrationRecord {
    double snu_per_quadrature = 0.0;  // raw units
    double v_el = 0.0;                // SNU
    double a_r_reference = 0.0;
    double c_offset = 0.0;
    double shot_raw_variance = 0.0;
    double electronic_raw_variance = 0.0;
    double a_r_fluctuation = 0.0;  // frame-to-frame std of A_r in the shot run
    std::size_t n_symbols = 0;

    void validate() const;
};

void write_calibration(std::ostream& out, const CalibrationRecord& rec);
CalibrationRecord read_calibration(std::istream& in);
void save_calibration(const std::filesystem::path& path, const CalibrationRecord& rec);
CalibrationRecord load_calibration(const std::filesystem::path& path);

struct ShotNoiseResult {
    double raw_variance = 0.0;  // per quadrature, includes electronic noise
    double a_r_reference = 0.0;
    double a_r_fluctuation = 0.0;
    double c_offset = 0.0;
    std::size_t n_symbols = 0;
    std::size_t winding_failures = 0;
};

// DC-only frames through the full chain, transmitter modulation and channel
// excess noise switched off. `link.modulate` is ignored.
ShotNoiseResult calibrate_shot_noise(const LinkParams& link, std::size_t n_frames, std::uint64_t seed);

// Per-quadrature variance of (trace + c_offset) after KK and demodulation.
double electronic_raw_variance(const PhotocurrentTrace& elec_trace, double c_offset, const LinkContext& ctx);

// electronic_raw_variance / snu_per_quadrature.
double calibrate_electronic_noise(const PhotocurrentTrace& elec_trace, double c_offset, double snu_per_quadrature,
                                  const LinkContext& ctx);

// Both runs. snu = shot - electronic, v_el = electronic / snu. The dark run
// uses n_electronic_frames frames, or n_frames when 0.
CalibrationRecord calibrate(const LinkParams& link, std::size_t n_frames, std::uint64_t seed,
                            std::size_t n_electronic_frames = 0);

}  // namespace ddqkd
