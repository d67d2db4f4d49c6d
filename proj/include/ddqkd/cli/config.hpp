#pragma once

// Experiment configuration: YAML document or named preset.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddqkd/channel.hpp"
#include "ddqkd/economics.hpp"
#include "ddqkd/security.hpp"
#include "ddqkd/waveform.hpp"

namespace ddqkd::cli {

// Invalid configuration. Message carries `source:line:column:` when known.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct UserConfig {
    std::vector<ChannelSegment> branch;
    double eta = 1.0;
    double v_el = 0.0;                    // SNU
    std::optional<double> elec_variance;  // photocurrent units, overrides v_el in simulation
    std::optional<double> v_a;            // overrides modulation.v_a
};

struct ReceiverConfig {
    double mu = 1.0;
    int upsample = 4;
};

struct CalibrationConfig {
    double vacuum_scale = 1.0;
    std::size_t frames = 4;
    std::size_t electronic_frames = 0;        // 0: same as frames
    std::optional<double> reference_loss_db;  // default: each user's own channel
};

struct SecurityConfig {
    double beta = 0.95;
    double f_rep = 1e6;
    std::vector<Detection> detections{Detection::direct};
    FiniteSizeParams finite_size;
};

struct SweepConfig {
    std::vector<double> distances_km;
    double alpha_db_per_km = 0.2;
};

struct RunConfig {
    std::size_t frames = 10;
    std::uint64_t seed = 1;
    std::string out = "out";
    int workers = 1;
    double monitor_threshold = 0.05;
    double dc_gain = 1.0;
    double phase = 0.0;
    double phase_noise_rad = 0.0;
    bool dump_symbols = true;
};

struct CostConfig {
    int n_max = 64;
    CostModel model;
};

struct ExperimentConfig {
    std::string source = "<config>";
    std::string text;  // document as loaded, hashed into the manifest

    ModulationParams modulation;
    ReceiverConfig receiver;
    std::vector<ChannelSegment> trunk;
    ChannelSegment splitter = ChannelSegment::splitter(1);
    std::vector<UserConfig> users;
    CalibrationConfig calibration;
    SecurityConfig security;
    SweepConfig sweep;
    RunConfig run;
    CostConfig cost;

    QanTopology topology() const;
    ModulationParams modulation_for(std::size_t user) const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source);
ExperimentConfig load_config(const std::string& path);
ExperimentConfig load_preset(const std::string& name);

std::vector<std::string> preset_names();
// YAML text of a preset; throws ConfigError for unknown names.
std::string preset_text(const std::string& name);

}  // namespace ddqkd::cli
