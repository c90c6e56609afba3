#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlo/errors.hpp"
#include "mlo/phy_timing.hpp"
#include "mlo/queueing.hpp"
#include "mlo/simulator.hpp"
#include "mlo/solver.hpp"
#include "mlo/traffic.hpp"

namespace mlo {

enum class Engine { analytic, sim, both };

inline std::string to_string(Engine e) {
    switch (e) {
        case Engine::analytic: return "analytic";
        case Engine::sim: return "sim";
        case Engine::both: return "both";
    }
    return "?";
}

inline Engine parse_engine(const std::string& s) {
    if (s == "analytic") return Engine::analytic;
    if (s == "sim") return Engine::sim;
    if (s == "both") return Engine::both;
    throw ConfigError("unknown engine `" + s + "` (expected analytic, sim or both)");
}

enum class SweepAxis { load, contenders, activity, interfaces, resolution };

inline std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::load: return "load";
        case SweepAxis::contenders: return "contenders";
        case SweepAxis::activity: return "activity";
        case SweepAxis::interfaces: return "interfaces";
        case SweepAxis::resolution: return "resolution";
    }
    return "?";
}

inline SweepAxis parse_axis(const std::string& s) {
    for (SweepAxis a : {SweepAxis::load, SweepAxis::contenders, SweepAxis::activity, SweepAxis::interfaces,
                        SweepAxis::resolution})
        if (to_string(a) == s) return a;
    throw ConfigError("unknown sweep axis `" + s + "`");
}

/// Sweep values are numbers; the resolution axis uses 720, 1080 and 2160.
struct SweepSpec {
    SweepAxis axis = SweepAxis::load;
    std::vector<double> values;
    std::vector<int> interfaces{1, 2, 3, 4};
};

struct CapacitySpec {
    double budget_s = 5e-3;
    std::vector<int> interfaces{1, 2, 3, 4};
    double tolerance = 1e-4;
};

struct ExperimentConfig {
    PhyMacParams phy;

    int interfaces = 2;
    double load_bps = 10e6;
    int contenders = 5;
    double activity = 0.25;

    traffic::TrafficKind traffic_kind = traffic::TrafficKind::poisson;
    std::string trace_path;
    traffic::TraceOptions trace;
    traffic::VideoParams video;  ///< mean_frame_bits follows the load

    sim::SimConfig sim;  ///< seed, duration, warmup, mode, immediate_access
    int replications = 10;
    int bootstrap_resamples = 1000;

    SolverOptions solver;
    double quantile = 0.95;
    Engine engine = Engine::analytic;
    SweepSpec sweep;
    CapacitySpec capacity;

    Scenario scenario() const {
        return Scenario::from_load(interfaces, load_bps, phy.packet_bits, contenders, activity);
    }

    /// Traffic for one point. Poisson and video sources follow the scenario
    /// load; a trace is replayed as recorded.
    traffic::TrafficSpec traffic_spec(const Scenario& sc) const {
        traffic::TrafficSpec t;
        t.kind = traffic_kind;
        t.arrival_rate = sc.arrival_rate;
        t.packet_bits = phy.packet_bits;
        t.trace_path = trace_path;
        t.trace = trace;
        t.video = video;
        t.video.mean_frame_bits = sc.arrival_rate * phy.packet_bits / video.fps;
        return t;
    }

    void validate() const {
        try {
            phy.validate();
            scenario().validate();
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        sim.validate();
        if (replications < 1) throw ConfigError("replications must be >= 1");
        if (bootstrap_resamples < 1) throw ConfigError("bootstrap_resamples must be >= 1");
        if (!(quantile > 0.0 && quantile < 1.0)) throw ConfigError("quantile must lie in (0,1)");
        if (!(solver.tolerance > 0.0) || solver.max_iterations < 1 || !(solver.damping >= 0.0 && solver.damping < 1.0))
            throw ConfigError("invalid solver options");
        if (traffic_kind == traffic::TrafficKind::trace && trace_path.empty())
            throw ConfigError("trace traffic needs traffic.trace_path");
        if (!(video.fps > 0.0)) throw ConfigError("traffic.fps must be positive");
        if (sweep.interfaces.empty() || capacity.interfaces.empty())
            throw ConfigError("interface lists must be non-empty");
        for (int s : sweep.interfaces)
            if (s < 1 || s > 64) throw ConfigError("sweep interfaces must lie in 1..64");
        for (int s : capacity.interfaces)
            if (s < 1 || s > 64) throw ConfigError("capacity interfaces must lie in 1..64");
        if (!(capacity.budget_s > 0.0) || !(capacity.tolerance > 0.0)) throw ConfigError("invalid capacity spec");
    }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
            throw ConfigError("unknown key `" + where + "." + it.key() + "`");
    }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for `" + where + "." + key + "`");
    }
}

inline void read_us(const json& obj, const char* key, double& seconds, const std::string& where) {
    if (!obj.contains(key)) return;
    double us = 0;
    read(obj, key, us, where);
    seconds = us * 1e-6;
}

inline std::vector<double> sweep_values(const json& v) {
    std::vector<double> out;
    if (!v.is_array()) throw ConfigError("sweep.values must be an array");
    for (const auto& x : v) {
        if (x.is_number()) {
            out.push_back(x.get<double>());
        } else if (x.is_string()) {
            const auto r = traffic::parse_resolution(x.get<std::string>());
            out.push_back(r == traffic::Resolution::p720 ? 720 : r == traffic::Resolution::p1080 ? 1080 : 2160);
        } else {
            throw ConfigError("sweep.values entries must be numbers or resolution names");
        }
    }
    return out;
}

}  // namespace detail

/// Overlays a JSON document onto `cfg`. Durations are in microseconds, loads
/// in Mb/s, budgets in milliseconds; unknown keys are rejected.
inline void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
    using detail::read;
    using detail::read_us;
    detail::reject_unknown(j, "config",
                           {"phy", "scenario", "traffic", "simulation", "solver", "quantile", "engine", "sweep",
                            "capacity"});
    if (j.contains("phy")) {
        const auto& p = j["phy"];
        detail::reject_unknown(p, "phy",
                               {"sigma_us", "sifs_us", "difs_us", "rts_us", "cts_us", "ack_us", "preamble_us",
                                "data_rate_mbps", "packet_bits", "cw_min", "m_stages"});
        read_us(p, "sigma_us", cfg.phy.sigma, "phy");
        read_us(p, "sifs_us", cfg.phy.sifs, "phy");
        read_us(p, "difs_us", cfg.phy.difs, "phy");
        read_us(p, "rts_us", cfg.phy.t_rts, "phy");
        read_us(p, "cts_us", cfg.phy.t_cts, "phy");
        read_us(p, "ack_us", cfg.phy.t_ack, "phy");
        read_us(p, "preamble_us", cfg.phy.phy_preamble, "phy");
        if (p.contains("data_rate_mbps")) {
            double mbps = 0;
            read(p, "data_rate_mbps", mbps, "phy");
            cfg.phy.data_rate = mbps * 1e6;
        }
        read(p, "packet_bits", cfg.phy.packet_bits, "phy");
        read(p, "cw_min", cfg.phy.cw_min, "phy");
        read(p, "m_stages", cfg.phy.m_stages, "phy");
    }
    if (j.contains("scenario")) {
        const auto& s = j["scenario"];
        detail::reject_unknown(s, "scenario", {"interfaces", "load_mbps", "contenders", "activity"});
        read(s, "interfaces", cfg.interfaces, "scenario");
        if (s.contains("load_mbps")) {
            double mbps = 0;
            read(s, "load_mbps", mbps, "scenario");
            cfg.load_bps = mbps * 1e6;
        }
        read(s, "contenders", cfg.contenders, "scenario");
        read(s, "activity", cfg.activity, "scenario");
    }
    if (j.contains("traffic")) {
        const auto& t = j["traffic"];
        detail::reject_unknown(t, "traffic",
                               {"kind", "trace_path", "loop", "period_ms", "random_phase", "mtu_bits", "fps",
                                "frame_size_cv", "frame_jitter"});
        std::string kind = traffic::to_string(cfg.traffic_kind);
        read(t, "kind", kind, "traffic");
        cfg.traffic_kind = traffic::parse_traffic_kind(kind);
        read(t, "trace_path", cfg.trace_path, "traffic");
        read(t, "loop", cfg.trace.loop, "traffic");
        if (t.contains("period_ms")) {
            double period_ms = 0;
            read(t, "period_ms", period_ms, "traffic");
            cfg.trace.period_s = period_ms * 1e-3;
        }
        read(t, "random_phase", cfg.trace.random_phase, "traffic");
        read(t, "mtu_bits", cfg.trace.mtu_bits, "traffic");
        cfg.video.mtu_bits = cfg.trace.mtu_bits;
        read(t, "fps", cfg.video.fps, "traffic");
        read(t, "frame_size_cv", cfg.video.frame_size_cv, "traffic");
        read(t, "frame_jitter", cfg.video.frame_jitter, "traffic");
    }
    if (j.contains("simulation")) {
        const auto& s = j["simulation"];
        detail::reject_unknown(s, "simulation",
                               {"seed", "duration_s", "warmup_s", "mode", "immediate_access", "replications",
                                "bootstrap_resamples"});
        read(s, "seed", cfg.sim.seed, "simulation");
        read(s, "duration_s", cfg.sim.duration, "simulation");
        read(s, "warmup_s", cfg.sim.warmup, "simulation");
        std::string mode = cfg.sim.mode == sim::SimMode::protocol ? "protocol" : "pure-queue";
        read(s, "mode", mode, "simulation");
        if (mode == "protocol")
            cfg.sim.mode = sim::SimMode::protocol;
        else if (mode == "pure-queue" || mode == "pure_queue")
            cfg.sim.mode = sim::SimMode::pure_queue;
        else
            throw ConfigError("unknown simulation mode `" + mode + "`");
        read(s, "immediate_access", cfg.sim.immediate_access, "simulation");
        read(s, "replications", cfg.replications, "simulation");
        read(s, "bootstrap_resamples", cfg.bootstrap_resamples, "simulation");
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        detail::reject_unknown(s, "solver", {"tolerance", "max_iterations", "damping"});
        read(s, "tolerance", cfg.solver.tolerance, "solver");
        read(s, "max_iterations", cfg.solver.max_iterations, "solver");
        read(s, "damping", cfg.solver.damping, "solver");
    }
    read(j, "quantile", cfg.quantile, "config");
    if (j.contains("engine")) {
        std::string e;
        read(j, "engine", e, "config");
        cfg.engine = parse_engine(e);
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        detail::reject_unknown(s, "sweep", {"axis", "values", "interfaces"});
        std::string axis = to_string(cfg.sweep.axis);
        read(s, "axis", axis, "sweep");
        cfg.sweep.axis = parse_axis(axis);
        if (s.contains("values")) cfg.sweep.values = detail::sweep_values(s["values"]);
        read(s, "interfaces", cfg.sweep.interfaces, "sweep");
    }
    if (j.contains("capacity")) {
        const auto& c = j["capacity"];
        detail::reject_unknown(c, "capacity", {"budget_ms", "interfaces", "tolerance"});
        if (c.contains("budget_ms")) {
            double ms = 0;
            read(c, "budget_ms", ms, "capacity");
            cfg.capacity.budget_s = ms * 1e-3;
        }
        read(c, "interfaces", cfg.capacity.interfaces, "capacity");
        read(c, "tolerance", cfg.capacity.tolerance, "capacity");
    }
}

inline ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {}) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    apply_json(base, j);
    base.validate();
    return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config `" + path + "`");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

/// Inverse of apply_json: every field, in config units.
inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["phy"] = {{"sigma_us", c.phy.sigma * 1e6},
                {"sifs_us", c.phy.sifs * 1e6},
                {"difs_us", c.phy.difs * 1e6},
                {"rts_us", c.phy.t_rts * 1e6},
                {"cts_us", c.phy.t_cts * 1e6},
                {"ack_us", c.phy.t_ack * 1e6},
                {"preamble_us", c.phy.phy_preamble * 1e6},
                {"data_rate_mbps", c.phy.data_rate / 1e6},
                {"packet_bits", c.phy.packet_bits},
                {"cw_min", c.phy.cw_min},
                {"m_stages", c.phy.m_stages}};
    j["scenario"] = {{"interfaces", c.interfaces},
                     {"load_mbps", c.load_bps / 1e6},
                     {"contenders", c.contenders},
                     {"activity", c.activity}};
    j["traffic"] = {{"kind", traffic::to_string(c.traffic_kind)},
                    {"trace_path", c.trace_path},
                    {"loop", c.trace.loop},
                    {"period_ms", c.trace.period_s * 1e3},
                    {"random_phase", c.trace.random_phase},
                    {"mtu_bits", c.trace.mtu_bits},
                    {"fps", c.video.fps},
                    {"frame_size_cv", c.video.frame_size_cv},
                    {"frame_jitter", c.video.frame_jitter}};
    j["simulation"] = {{"seed", c.sim.seed},
                       {"duration_s", c.sim.duration},
                       {"warmup_s", c.sim.warmup},
                       {"mode", c.sim.mode == sim::SimMode::protocol ? "protocol" : "pure-queue"},
                       {"immediate_access", c.sim.immediate_access},
                       {"replications", c.replications},
                       {"bootstrap_resamples", c.bootstrap_resamples}};
    j["solver"] = {{"tolerance", c.solver.tolerance},
                   {"max_iterations", c.solver.max_iterations},
                   {"damping", c.solver.damping}};
    j["quantile"] = c.quantile;
    j["engine"] = to_string(c.engine);
    j["sweep"] = {{"axis", to_string(c.sweep.axis)}, {"values", c.sweep.values}, {"interfaces", c.sweep.interfaces}};
    j["capacity"] = {{"budget_ms", c.capacity.budget_s * 1e3},
                     {"interfaces", c.capacity.interfaces},
                     {"tolerance", c.capacity.tolerance}};
    return j;
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "fig5"};
    return names;
}

namespace detail {

inline std::vector<double> grid(double from, double to, double step) {
    std::vector<double> v;
    for (int i = 0;; ++i) {
        const double x = from + i * step;
        if (x > to + 1e-9 * step) break;
        v.push_back(std::round(x * 1e9) / 1e9);
    }
    return v;
}

}  // namespace detail

/// Built-in figure reproductions. Load grids use 1 Mb/s steps.
inline ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    c.contenders = 5;
    c.activity = 0.25;
    if (name == "fig2a") {
        c.sweep.axis = SweepAxis::load;
        c.sweep.values = detail::grid(1, 40, 1);
    } else if (name == "fig2b") {
        c.load_bps = 15e6;
        c.sweep.axis = SweepAxis::contenders;
        c.sweep.values = detail::grid(0, 20, 1);
    } else if (name == "fig2c") {
        c.load_bps = 10e6;
        c.sweep.axis = SweepAxis::activity;
        c.sweep.values = detail::grid(0, 1, 0.05);
    } else if (name == "fig3a" || name == "fig3b" || name == "fig3c") {
        const char level = name.back();
        c.contenders = level == 'a' ? 0 : 5;
        c.activity = level == 'a' ? 0.0 : level == 'b' ? 0.25 : 0.5;
        c.sweep.axis = SweepAxis::load;
        c.sweep.values = detail::grid(1, 60, 1);
    } else if (name == "fig5") {
        c.traffic_kind = traffic::TrafficKind::batch_video;
        c.engine = Engine::both;
        c.sweep.axis = SweepAxis::resolution;
        c.sweep.values = {720, 1080, 2160};
    } else {
        throw ConfigError("unknown preset `" + name + "`");
    }
    return c;
}

}  // namespace mlo
