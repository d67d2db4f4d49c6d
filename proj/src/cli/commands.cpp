#include "ddqkd/cli/commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "ddqkd/economics.hpp"
#include "ddqkd/estimation.hpp"
#include "ddqkd/random.hpp"
#include "ddqkd/receiver.hpp"
#include "ddqkd/cli/manifest.hpp"

namespace ddqkd::cli {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kCalibrationStream = 0xCA1;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    return fmt::format("{:.17g}", v);
}

// Runs fn(0..n-1) on `workers` threads. The first exception stops the pool
// and is rethrown.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    std::size_t w = workers > 0 ? static_cast<std::size_t>(workers)
                                : std::max(1u, std::thread::hardware_concurrency());
    w = std::min(w, n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    if (w <= 1) {
        body();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t k = 0; k < w; ++k) pool.emplace_back(body);
    }
    if (error) std::rethrow_exception(error);
}

fs::path prepare_out(const ExperimentConfig& cfg) {
    const fs::path dir(cfg.run.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw PipelineError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw PipelineError(fmt::format("cannot write {}", path.string()));
    return out;
}

// Copies the config next to the outputs and writes the manifest.
void finish_run(const fs::path& dir, const ExperimentConfig& cfg, const std::string& command,
                std::vector<std::string> outputs) {
    if (!cfg.text.empty()) {
        auto out = open_out(dir / "config.yaml");
        out << cfg.text;
        out.close();
        outputs.insert(outputs.begin(), "config.yaml");
    }
    Manifest m;
    m.command = command;
    m.config_source = cfg.source;
    m.config_sha256 = sha256_hex(cfg.text);
    m.seed = cfg.run.seed;
    m.workers = cfg.run.workers;
    m.outputs = std::move(outputs);
    write_manifest(dir, m);
}

std::string calibration_file(std::size_t user) { return fmt::format("calibration_user{}.txt", user); }

const char* plot_sweep_script = R"py(#!/usr/bin/env python3
import csv, glob, sys
import matplotlib.pyplot as plt

files = sorted(glob.glob("sweep_*.csv"))
fig, axes = plt.subplots(1, len(files), figsize=(5 * len(files), 4), squeeze=False)
for ax, name in zip(axes[0], files):
    rows = list(csv.DictReader(open(name)))
    for user in sorted({r["user"] for r in rows}, key=int):
        pts = [(float(r["distance_km"]), max(float(r["skr_asym_bps"]), 0.0)) for r in rows if r["user"] == user]
        ax.semilogy([p[0] for p in pts], [max(p[1], 1e-3) for p in pts], label="user " + user)
    ax.set_title(name[len("sweep_"):-4])
    ax.set_xlabel("distance (km)")
    ax.set_ylabel("SKR (bit/s)")
    ax.legend()
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "sweep.png")
)py";

const char* plot_cost_script = R"py(#!/usr/bin/env python3
import csv, sys
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("cost.csv")))
for scheme in ["dd", "tlo", "dv", "llo"]:
    pts = [(int(r["n_users"]), float(r["cost_cpd"])) for r in rows if r["scheme"] == scheme]
    plt.plot([p[0] for p in pts], [p[1] for p in pts], label=scheme)
plt.xlabel("users")
plt.ylabel("cost (C_PD)")
plt.legend()
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "cost.png")
)py";

void write_script(const fs::path& dir, const std::string& name, const char* text, std::vector<std::string>& outputs) {
    auto out = open_out(dir / name);
    out << text;
    outputs.push_back(name);
}

LinkParams base_link(const ExperimentConfig& cfg, std::size_t user) {
    if (user >= cfg.users.size()) throw std::out_of_range(fmt::format("unknown user {}", user));
    LinkParams p;
    p.mod = cfg.modulation_for(user);
    p.channel = compose_effective_channel(cfg.topology(), user);
    p.eta = cfg.users[user].eta;
    p.vacuum_scale = cfg.calibration.vacuum_scale;
    p.mu = cfg.receiver.mu;
    p.upsample = cfg.receiver.upsample;
    p.elec_variance = user_electronic_variance(cfg, user);
    return p;
}

}  // namespace

void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
    if (o.out) cfg.run.out = *o.out;
    if (o.seed) cfg.run.seed = *o.seed;
    if (o.workers) {
        if (*o.workers < 0) throw ConfigError("--workers must be >= 0");
        cfg.run.workers = *o.workers;
    }
    if (o.n_max) cfg.cost.n_max = *o.n_max;
}

double user_electronic_variance(const ExperimentConfig& cfg, std::size_t user) {
    const UserConfig& u = cfg.users.at(user);
    if (u.elec_variance) return *u.elec_variance;
    if (u.v_el == 0.0) return 0.0;
    LinkParams p;
    p.mod = cfg.modulation_for(user);
    p.vacuum_scale = cfg.calibration.vacuum_scale;
    p.mu = cfg.receiver.mu;
    const double t = compose_effective_channel(cfg.topology(), user).transmittance_t;
    const double a_r = std::sqrt(u.eta * t) * p.mod.dc_amplitude();
    return electronic_variance_for(u.v_el, a_r, p);
}

LinkParams simulation_link(const ExperimentConfig& cfg, std::size_t user) {
    LinkParams p = base_link(cfg, user);
    p.phase = cfg.run.phase;
    p.phase_noise_rad = cfg.run.phase_noise_rad;
    p.dc_gain = cfg.run.dc_gain;
    return p;
}

LinkParams calibration_link(const ExperimentConfig& cfg, std::size_t user) {
    LinkParams p = base_link(cfg, user);
    if (cfg.calibration.reference_loss_db) {
        p.channel.transmittance_t = std::pow(10.0, -*cfg.calibration.reference_loss_db / 10.0);
    }
    p.channel.excess_noise_eps = 0.0;
    return p;
}

SecurityParams security_params(const ExperimentConfig& cfg, std::size_t user, Detection d, double t, double eps,
                               double v_a, double v_el) {
    SecurityParams p;
    p.v_a = v_a;
    p.t = t;
    p.eps = eps;
    p.eta = cfg.users.at(user).eta;
    p.v_el = v_el;
    p.beta = cfg.security.beta;
    p.f_rep = cfg.security.f_rep;
    p.detection = d;
    return p;
}

namespace {

double finite_size_or_nan(const SecurityParams& p, const FiniteSizeParams& fsp) {
    try {
        return skr_finite_size(p, fsp).skr_bps;
    } catch (const std::exception&) {
        return kNaN;
    }
}

}  // namespace

std::vector<SkrRow> analytic_skr(const ExperimentConfig& cfg, const std::vector<ChannelSegment>& trunk) {
    QanTopology topo = cfg.topology();
    topo.trunk = trunk;
    std::vector<SkrRow> rows;
    for (Detection d : cfg.security.detections) {
        for (std::size_t u = 0; u < cfg.users.size(); ++u) {
            const EffectiveChannel ch = compose_effective_channel(topo, u);
            const SecurityParams p = security_params(cfg, u, d, ch.transmittance_t, ch.excess_noise_eps,
                                                     cfg.modulation_for(u).v_a, cfg.users[u].v_el);
            SkrRow r;
            r.user = u;
            r.detection = d;
            r.t_eff = ch.transmittance_t;
            r.eps = ch.excess_noise_eps;
            r.asymptotic = skr_asymptotic(p);
            r.skr_fs_bps = finite_size_or_nan(p, cfg.security.finite_size);
            rows.push_back(r);
        }
    }
    return rows;
}

CalibrationRecord calibrate_user(const ExperimentConfig& cfg, std::size_t user) {
    const LinkParams p = calibration_link(cfg, user);
    const std::uint64_t seed = Rng::derive(cfg.run.seed, {kCalibrationStream, user});
    CalibrationRecord rec = calibrate(p, cfg.calibration.frames, seed, cfg.calibration.electronic_frames);
    rec.validate();
    return rec;
}

int run_calibrate(const ExperimentConfig& cfg, std::ostream& log, const CommandOptions&) {
    const fs::path dir = prepare_out(cfg);
    std::vector<CalibrationRecord> recs(cfg.users.size());
    parallel_for(cfg.users.size(), cfg.run.workers, [&](std::size_t u) {
        try {
            recs[u] = calibrate_user(cfg, u);
        } catch (const std::exception& e) {
            throw PipelineError(fmt::format("calibration of user {}: {}", u, e.what()));
        }
    });
    std::vector<std::string> outputs;
    auto table = open_out(dir / "calibration.csv");
    table << "user,snu_per_quadrature,v_el,a_r_reference,c_offset,a_r_fluctuation,n_symbols\n";
    for (std::size_t u = 0; u < recs.size(); ++u) {
        const auto& r = recs[u];
        save_calibration(dir / calibration_file(u), r);
        outputs.push_back(calibration_file(u));
        fmt::print(table, "{},{},{},{},{},{},{}\n", u, num(r.snu_per_quadrature), num(r.v_el), num(r.a_r_reference),
                   num(r.c_offset), num(r.a_r_fluctuation), r.n_symbols);
        fmt::print(log, "user {}: SNU {:.6g} per quadrature, v_el {:.4g} SNU, A_r {:.6g}\n", u, r.snu_per_quadrature,
                   r.v_el, r.a_r_reference);
    }
    table.close();
    outputs.push_back("calibration.csv");
    finish_run(dir, cfg, "calibrate", outputs);
    return kExitOk;
}

namespace {

struct FrameResult {
    EstimationAccumulator acc;
    ParameterEstimate estimate;
    bool estimated = false;
    Correlation correlation;
    double a_r = 0.0;
    MonitorStatus monitor = MonitorStatus::ok;
    int winding = 0;
    KkDiagnostics kk;
    bool used = false;
    std::vector<cplx> tx, y;
};

}  // namespace

int run_simulate(const ExperimentConfig& cfg, std::ostream& log, const CommandOptions&) {
    const fs::path dir = prepare_out(cfg);
    const std::size_t n_users = cfg.users.size();
    const std::size_t n_frames = cfg.run.frames;
    std::vector<std::string> outputs;

    std::vector<CalibrationRecord> cal(n_users);
    std::vector<bool> fresh(n_users, false);
    for (std::size_t u = 0; u < n_users; ++u) {
        const fs::path file = dir / calibration_file(u);
        if (fs::exists(file)) {
            cal[u] = load_calibration(file);
            fmt::print(log, "user {}: using {}\n", u, file.string());
        } else {
            fresh[u] = true;
        }
    }
    parallel_for(n_users, cfg.run.workers, [&](std::size_t u) {
        if (!fresh[u]) return;
        try {
            cal[u] = calibrate_user(cfg, u);
        } catch (const std::exception& e) {
            throw PipelineError(fmt::format("calibration of user {}: {}", u, e.what()));
        }
    });
    for (std::size_t u = 0; u < n_users; ++u) {
        if (!fresh[u]) continue;
        save_calibration(dir / calibration_file(u), cal[u]);
        outputs.push_back(calibration_file(u));
        fmt::print(log, "user {}: calibrated, SNU {:.6g}, v_el {:.4g}\n", u, cal[u].snu_per_quadrature, cal[u].v_el);
    }

    std::vector<LinkContext> links;
    for (std::size_t u = 0; u < n_users; ++u) links.emplace_back(simulation_link(cfg, u));

    std::vector<FrameResult> results(n_users * n_frames);
    parallel_for(results.size(), cfg.run.workers, [&](std::size_t i) {
        const std::size_t u = i / n_frames;
        const std::size_t f = i % n_frames;
        FrameResult& r = results[i];
        try {
            const FrameOutput out = run_frame(links[u], frame_seed(cfg.run.seed, u, f));
            r.correlation = out.correlation;
            r.a_r = out.a_r;
            r.winding = out.winding;
            r.kk = out.kk;
            r.monitor = monitor_dc_intensity(out.a_r, cal[u].a_r_reference, cfg.run.monitor_threshold);
            r.used = r.winding == 0 && r.monitor == MonitorStatus::ok;
            std::vector<cplx> y = normalize_to_snu(out.rx, cal[u]);
            r.estimate = estimate_parameters(out.tx, y, cfg.users[u].eta, cal[u].v_el);
            r.estimated = true;
            if (r.used) r.acc.add(out.tx, y);
            if (f == 0 && cfg.run.dump_symbols) {
                r.tx = out.tx;
                r.y = std::move(y);
            }
        } catch (const std::exception& e) {
            throw PipelineError(fmt::format("user {} frame {}: {}", u, f, e.what()));
        }
    });

    {
        auto est = open_out(dir / "estimates.csv");
        write_estimate_header(est);
        auto frames = open_out(dir / "frames.csv");
        frames << "frame,user,corr_peak,corr_lag,a_r,monitor,winding,kk_clamped,used\n";
        for (std::size_t u = 0; u < n_users; ++u) {
            for (std::size_t f = 0; f < n_frames; ++f) {
                const FrameResult& r = results[u * n_frames + f];
                if (r.estimated) write_estimate_row(est, f, u, r.estimate);
                fmt::print(frames, "{},{},{},{},{},{},{},{},{}\n", f, u, num(r.correlation.peak), r.correlation.lag,
                           num(r.a_r), r.monitor == MonitorStatus::ok ? "ok" : "alarm", r.winding, r.kk.clamped,
                           r.used ? 1 : 0);
            }
        }
    }
    outputs.push_back("estimates.csv");
    outputs.push_back("frames.csv");

    bool any_alarm = false;
    bool starved = false;
    auto skr = open_out(dir / "skr_sim.csv");
    skr << "user,detection,frames_used,frames_winding,frames_alarm,v_a_hat,t_hat,eps_hat,eps_sd,corr_peak,"
           "skr_asym_bps,skr_clipped_bps,skr_fs_bps,i_ab,chi_be\n";
    for (std::size_t u = 0; u < n_users; ++u) {
        EstimationAccumulator acc;
        std::size_t used = 0, winding = 0, alarms = 0;
        double corr = 0.0;
        for (std::size_t f = 0; f < n_frames; ++f) {
            const FrameResult& r = results[u * n_frames + f];
            acc.merge(r.acc);
            corr += r.correlation.peak;
            if (r.used) ++used;
            if (r.winding != 0) ++winding;
            if (r.monitor == MonitorStatus::alarm) ++alarms;
        }
        corr /= static_cast<double>(n_frames);
        if (alarms > 0) any_alarm = true;
        if (alarms > 0) fmt::print(log, "user {}: DC monitor alarm on {} of {} frames\n", u, alarms, n_frames);
        if (winding > 0) fmt::print(log, "user {}: {} frames skipped, trajectory encircles the origin\n", u, winding);
        if (used == 0) {
            if (alarms == 0) starved = true;
            for (Detection d : cfg.security.detections) {
                fmt::print(skr, "{},{},0,{},{},nan,nan,nan,nan,{},nan,nan,nan,nan,nan\n", u, to_string(d), winding,
                           alarms, num(corr));
            }
            continue;
        }
        const ParameterEstimate e = acc.result(cfg.users[u].eta, cal[u].v_el);
        if (e.eps_negative()) {
            fmt::print(log, "user {}: eps estimate {:.4g} below zero, using 0 for the key rate\n", u, e.eps_hat);
        }
        for (Detection d : cfg.security.detections) {
            const SecurityParams p =
                security_params(cfg, u, d, e.t_hat, std::max(e.eps_hat, 0.0), e.v_a_hat, cal[u].v_el);
            SkrResult s;
            try {
                s = skr_asymptotic(p);
            } catch (const std::exception& ex) {
                throw PipelineError(fmt::format("user {}: key rate at estimated parameters: {}", u, ex.what()));
            }
            const double fs_rate = finite_size_or_nan(p, cfg.security.finite_size);
            fmt::print(skr, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", u, to_string(d), used, winding, alarms,
                       num(e.v_a_hat), num(e.t_hat), num(e.eps_hat), num(e.eps_sd), num(corr), num(s.skr_bps),
                       num(s.skr_clipped_bps), num(fs_rate), num(s.i_ab), num(s.chi_be));
            fmt::print(log, "user {} {}: V_A {:.4f}  T {:.4f}  eps {:.4f} +- {:.4f}  corr {:.3f}  SKR {:.3f} kbit/s\n", u,
                       to_string(d), e.v_a_hat, e.t_hat, e.eps_hat, e.eps_sd, corr, s.skr_bps / 1e3);
        }
    }
    skr.close();
    outputs.push_back("skr_sim.csv");

    if (cfg.run.dump_symbols) {
        for (std::size_t u = 0; u < n_users; ++u) {
            const FrameResult& r = results[u * n_frames];
            if (r.tx.empty()) continue;
            const std::string name = fmt::format("symbols_user{}.csv", u);
            auto out = open_out(dir / name);
            write_symbols_csv(out, r.tx, r.y);
            outputs.push_back(name);
        }
    }
    finish_run(dir, cfg, "simulate", outputs);
    if (starved) throw PipelineError("no usable frames for at least one user");
    return any_alarm ? kExitAlarm : kExitOk;
}

int run_skr(const ExperimentConfig& cfg, std::ostream& log, const CommandOptions&) {
    const fs::path dir = prepare_out(cfg);
    auto out = open_out(dir / "skr.csv");
    out << "user,detection,t_eff,eps,skr_asym_bps,skr_clipped_bps,skr_fs_bps,i_ab,chi_be\n";
    for (const SkrRow& r : analytic_skr(cfg, cfg.trunk)) {
        fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", r.user, to_string(r.detection), num(r.t_eff), num(r.eps),
                   num(r.asymptotic.skr_bps), num(r.asymptotic.skr_clipped_bps), num(r.skr_fs_bps),
                   num(r.asymptotic.i_ab), num(r.asymptotic.chi_be));
        fmt::print(log, "user {} {}: T {:.5f}  eps {:.4f}  SKR {:.3f} kbit/s  finite-size {:.3f} kbit/s\n", r.user,
                   to_string(r.detection), r.t_eff, r.eps, r.asymptotic.skr_bps / 1e3, r.skr_fs_bps / 1e3);
    }
    out.close();
    finish_run(dir, cfg, "skr", {"skr.csv"});
    return kExitOk;
}

int run_sweep(const ExperimentConfig& cfg, std::ostream& log, const CommandOptions& opt) {
    if (cfg.sweep.distances_km.empty()) throw ConfigError(fmt::format("{}: sweep.distances_km is empty", cfg.source));
    const fs::path dir = prepare_out(cfg);
    std::vector<std::string> outputs;
    for (Detection d : cfg.security.detections) {
        ExperimentConfig one = cfg;
        one.security.detections = {d};
        const std::string name = fmt::format("sweep_{}.csv", to_string(d));
        auto out = open_out(dir / name);
        out << "distance_km,user,t_eff,eps,skr_asym_bps,skr_fs_bps,i_ab,chi_be\n";
        for (double km : cfg.sweep.distances_km) {
            const std::vector<ChannelSegment> trunk{ChannelSegment::fiber(km, cfg.sweep.alpha_db_per_km)};
            for (const SkrRow& r : analytic_skr(one, trunk)) {
                fmt::print(out, "{},{},{},{},{},{},{},{}\n", num(km), r.user, num(r.t_eff), num(r.eps),
                           num(r.asymptotic.skr_bps), num(r.skr_fs_bps), num(r.asymptotic.i_ab),
                           num(r.asymptotic.chi_be));
            }
        }
        outputs.push_back(name);
        fmt::print(log, "{}: {} distances x {} users\n", name, cfg.sweep.distances_km.size(), cfg.users.size());
    }
    if (opt.plot_script) write_script(dir, "plot_sweep.py", plot_sweep_script, outputs);
    finish_run(dir, cfg, "sweep", outputs);
    return kExitOk;
}

int run_cost(const ExperimentConfig& cfg, std::ostream& log, const CommandOptions& opt) {
    if (cfg.cost.n_max < 1) throw ConfigError("cost table needs n_max >= 1");
    const fs::path dir = prepare_out(cfg);
    {
        auto out = open_out(dir / "cost.csv");
        write_cost_table(out, cfg.cost.n_max, cfg.cost.model);
    }
    std::vector<std::string> outputs{"cost.csv"};
    for (Scheme s : kAllSchemes) {
        fmt::print(log, "{:>4}: N=1 {:g}  N={} {:g} C_PD\n", to_string(s), network_cost(s, 1, cfg.cost.model),
                   cfg.cost.n_max, network_cost(s, cfg.cost.n_max, cfg.cost.model));
    }
    if (opt.plot_script) write_script(dir, "plot_cost.py", plot_cost_script, outputs);
    finish_run(dir, cfg, "cost", outputs);
    return kExitOk;
}

}  // namespace ddqkd::cli
