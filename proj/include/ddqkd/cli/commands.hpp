#pragma once

// Subcommands of the ddqkd tool. Each returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddqkd/calibration.hpp"
#include "ddqkd/cli/config.hpp"
#include "ddqkd/link.hpp"
#include "ddqkd/security.hpp"

namespace ddqkd::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitPipeline = 3, kExitAlarm = 4 };

class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Overrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> n_max;
};

void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

struct CommandOptions {
    bool plot_script = false;
};

// Link of user `user` as simulated: configured channel, tamper and phase settings.
LinkParams simulation_link(const ExperimentConfig& cfg, std::size_t user);
// Back-to-back reference link used for calibration: no excess noise,
// reference attenuation if configured.
LinkParams calibration_link(const ExperimentConfig& cfg, std::size_t user);
// Physical electronic-noise variance of a user, photocurrent units.
double user_electronic_variance(const ExperimentConfig& cfg, std::size_t user);

SecurityParams security_params(const ExperimentConfig& cfg, std::size_t user, Detection d, double t, double eps,
                               double v_a, double v_el);

// Configured-parameter SKR of every user and detection, one row per pair.
struct SkrRow {
    std::size_t user = 0;
    Detection detection = Detection::direct;
    double t_eff = 0.0;
    double eps = 0.0;
    SkrResult asymptotic;
    double skr_fs_bps = 0.0;  // NaN when finite-size terms leave no key
};
std::vector<SkrRow> analytic_skr(const ExperimentConfig& cfg, const std::vector<ChannelSegment>& trunk);

CalibrationRecord calibrate_user(const ExperimentConfig& cfg, std::size_t user);

int run_calibrate(const ExperimentConfig& cfg, std::ostream& log, const CommandOptions& opt = {});
int run_simulate(const ExperimentConfig& cfg, std::ostream& log, const CommandOptions& opt = {});
int run_skr(const ExperimentConfig& cfg, std::ostream& log, const CommandOptions& opt = {});
int run_sweep(const ExperimentConfig& cfg, std::ostream& log, const CommandOptions& opt = {});
int run_cost(const ExperimentConfig& cfg, std::ostream& log, const CommandOptions& opt = {});

}  // namespace ddqkd::cli
