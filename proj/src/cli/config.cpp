#include "ddqkd/cli/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ddqkd::cli {
namespace {

std::string where(const std::string& source, const YAML::Mark& mark) {
    if (mark.is_null()) return source;
    return fmt::format("{}:{}:{}", source, mark.line + 1, mark.column + 1);
}

// A YAML mapping whose keys are checked against what was asked for.
class Section {
public:
    Section(YAML::Node node, const std::string& source, std::string name)
        : node_(std::move(node)), source_(source), name_(std::move(name)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) fail(node_, "`" + name_ + "` must be a mapping");
    }

    bool has(const char* key) {
        seen_.insert(key);
        return node_ && node_.IsMap() && node_[key];
    }

    YAML::Node child(const char* key) {
        seen_.insert(key);
        if (!node_ || !node_.IsMap()) return YAML::Node();
        return node_[key];
    }

    template <class T>
    T get(const char* key, T fallback) {
        const YAML::Node n = child(key);
        if (!n || n.IsNull()) return fallback;
        return convert<T>(n, key);
    }

    template <class T>
    std::optional<T> optional(const char* key) {
        const YAML::Node n = child(key);
        if (!n || n.IsNull()) return std::nullopt;
        return convert<T>(n, key);
    }

    template <class T>
    T convert(const YAML::Node& n, const std::string& key) {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, fmt::format("`{}.{}` has the wrong type", name_, key));
        }
    }

    void finish() {
        if (!node_ || !node_.IsMap()) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) fail(kv.first, fmt::format("unknown key `{}` in `{}`", key, name_));
        }
    }

    [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
        throw ConfigError(fmt::format("{}: {}", where(source_, at.Mark()), what));
    }

    const YAML::Node& node() const { return node_; }

private:
    YAML::Node node_;
    const std::string& source_;
    std::string name_;
    std::set<std::string> seen_;
};

ChannelSegment parse_segment(const YAML::Node& n, const std::string& source, const std::string& name) {
    Section s(n, source, name);
    const auto kind = s.get<std::string>("kind", "fiber");
    ChannelSegment seg;
    if (kind == "fiber") {
        seg = ChannelSegment::fiber(s.get("length_km", 0.0), s.get("alpha_db_per_km", 0.2));
    } else if (kind == "splitter") {
        if (s.has("ports")) {
            const int ports = s.get("ports", 1);
            if (ports < 1) s.fail(n, "splitter needs at least one port");
            seg = ChannelSegment::splitter(ports);
        } else {
            seg = ChannelSegment::fixed(s.get("loss_db", 0.0));
            seg.kind = ChannelSegment::Kind::splitter;
        }
    } else if (kind == "fixed") {
        seg = ChannelSegment::fixed(s.get("loss_db", 0.0));
    } else {
        s.fail(n, fmt::format("unknown segment kind `{}` (fiber, splitter, fixed)", kind));
    }
    seg.excess_noise = s.get("excess_noise", 0.0);
    s.finish();
    try {
        seg.validate();
    } catch (const std::invalid_argument& e) {
        s.fail(n, e.what());
    }
    return seg;
}

std::vector<ChannelSegment> parse_segments(const YAML::Node& n, const std::string& source, const std::string& name) {
    std::vector<ChannelSegment> out;
    if (!n || n.IsNull()) return out;
    if (!n.IsSequence()) throw ConfigError(fmt::format("{}: `{}` must be a list of segments", where(source, n.Mark()), name));
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(parse_segment(n[i], source, fmt::format("{}[{}]", name, i)));
    return out;
}

std::vector<double> parse_distances(const YAML::Node& n, const std::string& source) {
    std::vector<double> out;
    if (!n || n.IsNull()) return out;
    if (n.IsSequence()) {
        for (const auto& v : n) {
            try {
                out.push_back(v.as<double>());
            } catch (const YAML::Exception&) {
                throw ConfigError(fmt::format("{}: distance must be a number", where(source, v.Mark())));
            }
        }
        return out;
    }
    Section s(n, source, "sweep.distances_km");
    const double start = s.get("start", 0.0);
    const double stop = s.get("stop", 0.0);
    const double step = s.get("step", 1.0);
    s.finish();
    if (!(step > 0.0) || stop < start) s.fail(n, "need start <= stop and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
}

}  // namespace

QanTopology ExperimentConfig::topology() const {
    QanTopology t;
    t.trunk = trunk;
    t.splitter = splitter;
    for (const auto& u : users) {
        t.branches.push_back(u.branch);
        t.receivers.push_back({u.eta, u.elec_variance.value_or(0.0)});
    }
    return t;
}

ModulationParams ExperimentConfig::modulation_for(std::size_t user) const {
    ModulationParams m = modulation;
    if (user < users.size() && users[user].v_a) m.v_a = *users[user].v_a;
    return m;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(fmt::format("{}: {}", where(source, e.mark), e.msg));
    }
    ExperimentConfig cfg;
    cfg.source = source;
    cfg.text = text;
    Section top(root, source, "<root>");

    {
        Section s(top.child("modulation"), source, "modulation");
        ModulationParams& m = cfg.modulation;
        m.v_a = s.get("v_a", m.v_a);
        m.g = s.get("g", m.g);
        m.symbol_rate = s.get("symbol_rate", m.symbol_rate);
        m.samples_per_symbol = s.get("samples_per_symbol", m.samples_per_symbol);
        m.bandwidth_b = s.get("bandwidth_b", m.bandwidth_b);
        m.f_car = s.get("f_car", m.f_car);
        m.rolloff = s.get("rolloff", m.rolloff);
        m.if_frequency = s.get("if_frequency", m.if_frequency);
        m.n_symbols = s.get("n_symbols", m.n_symbols);
        s.finish();
        try {
            m.validate();
        } catch (const std::invalid_argument& e) {
            s.fail(s.node(), e.what());
        }
    }
    {
        Section s(top.child("receiver"), source, "receiver");
        cfg.receiver.mu = s.get("mu", cfg.receiver.mu);
        cfg.receiver.upsample = s.get("upsample", cfg.receiver.upsample);
        s.finish();
        if (!(cfg.receiver.mu > 0.0)) s.fail(s.node(), "receiver.mu must be > 0");
        if (cfg.receiver.upsample < 1) s.fail(s.node(), "receiver.upsample must be >= 1");
    }
    {
        Section s(top.child("topology"), source, "topology");
        cfg.trunk = parse_segments(s.child("trunk"), source, "topology.trunk");
        if (s.has("splitter")) cfg.splitter = parse_segment(s.child("splitter"), source, "topology.splitter");
        cfg.splitter.kind = ChannelSegment::Kind::splitter;
        const YAML::Node users = s.child("users");
        if (!users || !users.IsSequence() || users.size() == 0) {
            s.fail(users ? users : s.node(), "topology.users must list at least one user");
        }
        for (std::size_t i = 0; i < users.size(); ++i) {
            const std::string name = fmt::format("topology.users[{}]", i);
            Section u(users[i], source, name);
            UserConfig uc;
            uc.branch = parse_segments(u.child("branch"), source, name + ".branch");
            uc.eta = u.get("eta", 1.0);
            uc.v_el = u.get("v_el", 0.0);
            uc.elec_variance = u.optional<double>("elec_variance");
            uc.v_a = u.optional<double>("v_a");
            u.finish();
            if (!(uc.eta > 0.0 && uc.eta <= 1.0)) u.fail(users[i], "eta must lie in (0, 1]");
            if (!(uc.v_el >= 0.0)) u.fail(users[i], "v_el must be >= 0");
            if (uc.elec_variance && !(*uc.elec_variance >= 0.0)) u.fail(users[i], "elec_variance must be >= 0");
            if (uc.v_a) {
                ModulationParams m = cfg.modulation;
                m.v_a = *uc.v_a;
                try {
                    m.validate();
                } catch (const std::invalid_argument& e) {
                    u.fail(users[i], e.what());
                }
            }
            cfg.users.push_back(uc);
        }
        s.finish();
    }
    {
        Section s(top.child("calibration"), source, "calibration");
        cfg.calibration.vacuum_scale = s.get("vacuum_scale", cfg.calibration.vacuum_scale);
        cfg.calibration.frames = s.get("frames", cfg.calibration.frames);
        cfg.calibration.electronic_frames = s.get("electronic_frames", cfg.calibration.electronic_frames);
        cfg.calibration.reference_loss_db = s.optional<double>("reference_loss_db");
        s.finish();
        if (!(cfg.calibration.vacuum_scale > 0.0)) s.fail(s.node(), "calibration.vacuum_scale must be > 0");
        if (cfg.calibration.frames == 0) s.fail(s.node(), "calibration.frames must be >= 1");
    }
    {
        Section s(top.child("security"), source, "security");
        cfg.security.beta = s.get("beta", cfg.security.beta);
        cfg.security.f_rep = s.get("f_rep", cfg.modulation.symbol_rate);
        if (s.has("detections")) {
            cfg.security.detections.clear();
            const YAML::Node d = s.child("detections");
            if (!d.IsSequence() || d.size() == 0) s.fail(d, "security.detections must be a non-empty list");
            for (const auto& v : d) {
                try {
                    cfg.security.detections.push_back(parse_detection(v.as<std::string>()));
                } catch (const std::exception& e) {
                    s.fail(v, e.what());
                }
            }
        }
        if (s.has("finite_size")) {
            Section f(s.child("finite_size"), source, "security.finite_size");
            FiniteSizeParams& fs = cfg.security.finite_size;
            fs.n_total = f.get("n_total", fs.n_total);
            fs.n_key = f.get("n_key", 0.5 * fs.n_total);
            fs.eps_smooth = f.get("eps_smooth", fs.eps_smooth);
            fs.eps_pa = f.get("eps_pa", fs.eps_pa);
            fs.eps_pe = f.get("eps_pe", fs.eps_pe);
            f.finish();
            try {
                fs.validate();
            } catch (const std::invalid_argument& e) {
                f.fail(f.node(), e.what());
            }
        }
        s.finish();
        if (!(cfg.security.beta >= 0.0 && cfg.security.beta <= 1.0)) s.fail(s.node(), "security.beta must lie in [0, 1]");
        if (!(cfg.security.f_rep > 0.0)) s.fail(s.node(), "security.f_rep must be > 0");
    }
    {
        Section s(top.child("sweep"), source, "sweep");
        cfg.sweep.distances_km = parse_distances(s.child("distances_km"), source);
        cfg.sweep.alpha_db_per_km = s.get("alpha_db_per_km", cfg.sweep.alpha_db_per_km);
        s.finish();
        for (double d : cfg.sweep.distances_km) {
            if (!(d >= 0.0)) s.fail(s.node(), "sweep distances must be >= 0");
        }
    }
    {
        Section s(top.child("run"), source, "run");
        RunConfig& r = cfg.run;
        r.frames = s.get("frames", r.frames);
        r.seed = s.get("seed", r.seed);
        r.out = s.get("out", r.out);
        r.workers = s.get("workers", r.workers);
        r.monitor_threshold = s.get("monitor_threshold", r.monitor_threshold);
        r.dc_gain = s.get("dc_gain", r.dc_gain);
        r.phase = s.get("phase", r.phase);
        r.phase_noise_rad = s.get("phase_noise_rad", r.phase_noise_rad);
        r.dump_symbols = s.get("dump_symbols", r.dump_symbols);
        s.finish();
        if (r.frames == 0) s.fail(s.node(), "run.frames must be >= 1");
        if (r.workers < 0) s.fail(s.node(), "run.workers must be >= 0");
        if (!(r.dc_gain > 0.0)) s.fail(s.node(), "run.dc_gain must be > 0");
    }
    {
        Section s(top.child("cost"), source, "cost");
        cfg.cost.n_max = s.get("n_max", cfg.cost.n_max);
        CostModel& m = cfg.cost.model;
        m.c_pd = s.get("c_pd", m.c_pd);
        m.pd = s.get("pd", m.pd);
        m.bhd = s.get("bhd", m.bhd);
        m.spad = s.get("spad", m.spad);
        m.tunable_laser = s.get("tunable_laser", m.tunable_laser);
        s.finish();
        try {
            m.validate();
        } catch (const std::invalid_argument& e) {
            s.fail(s.node(), e.what());
        }
    }
    top.finish();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

ExperimentConfig load_preset(const std::string& name) { return parse_config(preset_text(name), "preset:" + name); }

}  // namespace ddqkd::cli
