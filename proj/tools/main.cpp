#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

#include "ddqkd/cli/commands.hpp"
#include "ddqkd/cli/config.hpp"

using namespace ddqkd::cli;

int main(int argc, char** argv) {
    CLI::App app{"Direct-detection CV-QKD access network simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset;
    Overrides over;
    CommandOptions opt;

    auto common = [&](CLI::App* sub, bool needs_config) {
        auto* source = sub->add_option_group("source", "experiment definition");
        source->add_option("--config", config_path, "YAML experiment file");
        source->add_option("--preset", preset, "built-in experiment");
        if (needs_config) {
            source->require_option(1);
        } else {
            source->require_option(0, 1);
        }
        sub->add_option("--out", over.out, "output directory");
        sub->add_option("--seed", over.seed, "run seed");
        sub->add_option("--workers", over.workers, "worker threads, 0 for one per core");
    };

    auto* calibrate = app.add_subcommand("calibrate", "shot-noise and electronic-noise calibration");
    auto* simulate = app.add_subcommand("simulate", "end-to-end waveform simulation and estimation");
    auto* skr = app.add_subcommand("skr", "key rates at the configured parameters");
    auto* sweep = app.add_subcommand("sweep", "key rate against trunk length");
    auto* cost = app.add_subcommand("cost", "network cost table");
    for (auto* s : {calibrate, simulate, skr, sweep}) common(s, true);
    common(cost, false);
    cost->add_option("--n-max", over.n_max, "largest user count");
    for (auto* s : {sweep, cost}) s->add_flag("--plot-script", opt.plot_script, "also write a matplotlib script");
    app.add_flag_callback(
        "--list-presets",
        [] {
            for (const auto& n : preset_names()) std::cout << n << "\n";
            throw CLI::Success();
        },
        "print built-in presets and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) {
            cfg = load_config(config_path);
        } else if (!preset.empty()) {
            cfg = load_preset(preset);
        }
        apply_overrides(cfg, over);
        if (*calibrate) return run_calibrate(cfg, std::cout, opt);
        if (*simulate) return run_simulate(cfg, std::cout, opt);
        if (*skr) return run_skr(cfg, std::cout, opt);
        if (*sweep) return run_sweep(cfg, std::cout, opt);
        return run_cost(cfg, std::cout, opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipeline;
    }
}
