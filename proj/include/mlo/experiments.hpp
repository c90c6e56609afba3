#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mlo/config.hpp"
#include "mlo/errors.hpp"
#include "mlo/simulator.hpp"
#include "mlo/solver.hpp"
#include "mlo/stats.hpp"
#include "mlo/traffic.hpp"

namespace mlo::experiments {

/// splitmix64 step; spreads a base seed into independent per-stream seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Fixed significant digits without switching to exponent notation.
inline std::string format_sig(double x, int digits = 4) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    const int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(x))));
    const int decimals = digits - 1 - magnitude;
    std::ostringstream os;
    if (decimals >= 0) {
        os << std::fixed << std::setprecision(decimals) << x;
    } else {
        const double unit = std::pow(10.0, -decimals);
        os << std::fixed << std::setprecision(0) << std::round(x / unit) * unit;
    }
    return os.str();
}

inline std::string format_ms(std::optional<double> seconds) {
    return seconds ? format_sig(*seconds * 1e3) : "inf";
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeResult {
    Scenario scenario;
    AnalyticSolution solution;
    double q = 0.95;
    std::optional<double> quantile_s;  ///< nullopt = unbounded
};

inline AnalyzeResult analyze(const ExperimentConfig& cfg, const Scenario& sc) {
    AnalyzeResult r;
    r.scenario = sc;
    r.q = cfg.quantile;
    r.solution = solve_fixed_point(sc, cfg.phy, cfg.solver);
    r.quantile_s = r.solution.quantile(cfg.quantile);
    return r;
}

inline AnalyzeResult analyze(const ExperimentConfig& cfg) { return analyze(cfg, cfg.scenario()); }

inline void print_analysis(std::ostream& os, const AnalyzeResult& r, double packet_bits) {
    const AnalyticSolution& s = r.solution;
    auto line = [&](const char* name, const std::string& v) { os << std::left << std::setw(22) << name << v << '\n'; };
    auto num = [](double v) {
        std::ostringstream o;
        o << std::setprecision(6) << v;
        return o.str();
    };
    line("interfaces", std::to_string(r.scenario.n_interfaces));
    line("load_mbps", num(r.scenario.offered_load_bps(packet_bits) / 1e6));
    line("contenders", std::to_string(r.scenario.n_contenders));
    line("activity", num(r.scenario.activity));
    line("T_s_us", num(s.air.t_s * 1e6));
    line("T_c_us", num(s.air.t_c * 1e6));
    line("cw_bar", num(s.cw_bar));
    line("E[B]_slots", num(s.e_backoff_slots));
    line("E[Ds]_ms", num(s.e_service_s * 1e3));
    line("rho", num(s.rho));
    line("p", num(s.p_coll));
    line("tau_ap", num(s.tau_ap));
    line("gamma", num(s.gamma));
    line("tau_contender", num(s.tau_cont));
    line("p_contender", num(s.p_coll_cont));
    line("a", num(s.queue.a));
    line("pi0", num(s.queue.pi0));
    line("eta", num(s.queue.eta));
    line("iterations", std::to_string(s.iterations));
    line("residual", num(s.residual));
    line("stable", s.stable ? "true" : "false");
    std::ostringstream qname;
    qname << "p" << format_sig(r.q * 100, 3) << "_ms";
    std::string label = qname.str();
    // "p95.0_ms" reads badly; trim a trailing ".0"
    if (auto pos = label.find(".0_"); pos != std::string::npos) label.erase(pos, 2);
    line(label.c_str(), r.quantile_s ? format_ms(r.quantile_s) : "unbounded");
    if (auto m = s.mean_delay())
        line("mean_ms", format_ms(m));
    else
        line("mean_ms", "unbounded");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateResult {
    Scenario scenario;
    int replications = 0;
    double q = 0.95;
    std::vector<double> pooled;  ///< ascending post-warmup delays, all replications
    std::optional<double> quantile_s;
    std::optional<ConfidenceInterval> ci;
    std::optional<double> mean_s;
    double p50 = std::numeric_limits<double>::quiet_NaN();
    double p99 = std::numeric_limits<double>::quiet_NaN();
    double throughput_bps = 0;
    double offered_bps = 0;
    double queued_fraction = 0;
    double collision_rate = 0;
    double contender_tau = 0;
    std::uint64_t collisions = 0;
    std::uint64_t max_queue = 0;
    bool stable = true;
};

/// Runs the configured replications with seeds derived from cfg.sim.seed and
/// pools their post-warmup samples.
inline SimulateResult simulate(const ExperimentConfig& cfg, const Scenario& sc) {
    SimulateResult out;
    out.scenario = sc;
    out.replications = cfg.replications;
    out.q = cfg.quantile;
    const traffic::TrafficSpec tspec = cfg.traffic_spec(sc);

    std::uint64_t attempts = 0, opportunities = 0, queued = 0, measured = 0;
    for (int r = 0; r < cfg.replications; ++r) {
        const std::uint64_t rep_seed = derive_seed(cfg.sim.seed, static_cast<std::uint64_t>(r));
        auto source = traffic::make_source(tspec, derive_seed(rep_seed, 1));
        sim::SimConfig sc_cfg = cfg.sim;
        sc_cfg.seed = derive_seed(rep_seed, 2);
        sim::SimReport rep = sim::run(sc, cfg.phy, *source, sc_cfg);

        out.pooled.insert(out.pooled.end(), rep.delay_samples.begin(), rep.delay_samples.end());
        out.throughput_bps += rep.throughput_bps / cfg.replications;
        out.offered_bps += rep.offered_load_bps / cfg.replications;
        out.collisions += rep.collisions;
        attempts += rep.ap_attempts;
        opportunities += rep.contender_opportunities;
        out.contender_tau += static_cast<double>(rep.contender_attempts);
        queued += rep.measured_queued;
        measured += rep.measured_arrivals;
        out.max_queue = std::max(out.max_queue, rep.max_queue);
        out.stable = out.stable && rep.stable;
    }
    out.contender_tau = opportunities ? out.contender_tau / static_cast<double>(opportunities) : 0.0;
    out.collision_rate = attempts ? static_cast<double>(out.collisions) / static_cast<double>(attempts) : 0.0;
    out.queued_fraction = measured ? static_cast<double>(queued) / static_cast<double>(measured) : 0.0;

    if (out.pooled.empty()) {
        if (!out.stable) return out;
        throw SimulationError("no packet departed after the warmup");
    }
    std::sort(out.pooled.begin(), out.pooled.end());
    out.p50 = percentile_sorted(out.pooled, 0.5);
    out.p99 = percentile_sorted(out.pooled, 0.99);
    if (out.stable) {
        out.quantile_s = percentile_sorted(out.pooled, cfg.quantile);
        out.ci = bootstrap_quantile_ci(out.pooled, cfg.quantile, cfg.bootstrap_resamples,
                                       derive_seed(cfg.sim.seed, 0xB0075742ULL));
        double sum = 0;
        for (double d : out.pooled) sum += d;
        out.mean_s = sum / static_cast<double>(out.pooled.size());
    }
    return out;
}

inline SimulateResult simulate(const ExperimentConfig& cfg) { return simulate(cfg, cfg.scenario()); }

inline void print_simulation(std::ostream& os, const SimulateResult& r, double packet_bits) {
    auto line = [&](const char* name, const std::string& v) { os << std::left << std::setw(22) << name << v << '\n'; };
    auto num = [](double v) {
        std::ostringstream o;
        o << std::setprecision(6) << v;
        return o.str();
    };
    line("interfaces", std::to_string(r.scenario.n_interfaces));
    line("load_mbps", num(r.scenario.offered_load_bps(packet_bits) / 1e6));
    line("contenders", std::to_string(r.scenario.n_contenders));
    line("activity", num(r.scenario.activity));
    line("replications", std::to_string(r.replications));
    line("samples", std::to_string(r.pooled.size()));
    line("quantile", num(r.q));
    line("quantile_ms", format_ms(r.quantile_s));
    line("ci_low_ms", r.ci ? format_ms(r.ci->low) : "-");
    line("ci_high_ms", r.ci ? format_ms(r.ci->high) : "-");
    line("p50_ms", r.pooled.empty() ? "-" : format_ms(r.p50));
    line("p99_ms", r.pooled.empty() ? "-" : format_ms(r.p99));
    line("mean_ms", format_ms(r.mean_s));
    line("throughput_mbps", num(r.throughput_bps / 1e6));
    line("offered_mbps", num(r.offered_bps / 1e6));
    line("queued_fraction", num(r.queued_fraction));
    line("ap_collision_rate", num(r.collision_rate));
    line("contender_tau", num(r.contender_tau));
    line("max_queue", std::to_string(r.max_queue));
    line("stable", r.stable ? "true" : "false");
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    double axis_value = 0;
    std::string axis_label;
    int interfaces = 1;
    Engine engine = Engine::analytic;  ///< analytic or sim
    std::optional<double> quantile_s;
    std::optional<double> mean_s;
    double throughput_bps = 0;
    bool stable = false;
    std::optional<ConfidenceInterval> ci;
    std::string error;  ///< non-empty when this point failed
};

/// Copy of `cfg` with one sweep coordinate applied.
inline ExperimentConfig at_point(const ExperimentConfig& cfg, double value, int interfaces) {
    ExperimentConfig c = cfg;
    c.interfaces = interfaces;
    switch (cfg.sweep.axis) {
        case SweepAxis::load: c.load_bps = value * 1e6; break;
        case SweepAxis::contenders: c.contenders = static_cast<int>(std::lround(value)); break;
        case SweepAxis::activity: c.activity = value; break;
        case SweepAxis::interfaces: c.interfaces = static_cast<int>(std::lround(value)); break;
        case SweepAxis::resolution: {
            const auto r = value < 900 ? traffic::Resolution::p720
                                       : value < 1600 ? traffic::Resolution::p1080 : traffic::Resolution::p2160;
            c.load_bps = traffic::resolution_load_bps(r);
            break;
        }
    }
    return c;
}

inline std::string axis_label(SweepAxis axis, double value) {
    if (axis == SweepAxis::resolution) return std::to_string(static_cast<int>(std::lround(value))) + "p";
    std::ostringstream os;
    os << std::setprecision(10) << value;
    return os.str();
}

inline SweepRow analytic_row(const ExperimentConfig& c) {
    SweepRow row;
    const AnalyzeResult a = analyze(c);
    row.stable = a.solution.stable;
    row.quantile_s = a.quantile_s;
    row.mean_s = a.solution.mean_delay();
    const double service_capacity = a.scenario.n_interfaces / a.solution.e_service_s;
    row.throughput_bps = std::min(a.scenario.arrival_rate, service_capacity) * c.phy.packet_bits;
    return row;
}

inline SweepRow sim_row(const ExperimentConfig& c) {
    SweepRow row;
    const SimulateResult s = simulate(c);
    row.stable = s.stable;
    row.quantile_s = s.quantile_s;
    row.mean_s = s.mean_s;
    row.ci = s.ci;
    row.throughput_bps = s.throughput_bps;
    return row;
}

/// Rows ordered by (axis value, interfaces, engine). A failing point yields a
/// row with `error` set; the sweep continues.
inline std::vector<SweepRow> sweep(const ExperimentConfig& cfg, std::ostream* progress = nullptr) {
    if (cfg.sweep.values.empty()) throw ConfigError("sweep.values is empty");
    std::vector<double> values = cfg.sweep.values;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    std::vector<int> interfaces = cfg.sweep.interfaces;
    std::sort(interfaces.begin(), interfaces.end());
    interfaces.erase(std::unique(interfaces.begin(), interfaces.end()), interfaces.end());

    std::vector<Engine> engines;
    if (cfg.engine != Engine::sim) engines.push_back(Engine::analytic);
    if (cfg.engine != Engine::analytic) engines.push_back(Engine::sim);

    std::vector<SweepRow> rows;
    for (double v : values) {
        std::vector<int> servers = interfaces;
        if (cfg.sweep.axis == SweepAxis::interfaces) servers = {static_cast<int>(std::lround(v))};
        for (int S : servers) {
            const ExperimentConfig point = at_point(cfg, v, S);
            for (Engine e : engines) {
                SweepRow row;
                try {
                    point.validate();
                    row = e == Engine::analytic ? analytic_row(point) : sim_row(point);
                } catch (const std::exception& ex) {
                    row.error = ex.what();
                }
                row.axis_value = v;
                row.axis_label = axis_label(cfg.sweep.axis, v);
                row.interfaces = point.interfaces;
                row.engine = e;
                if (progress)
                    *progress << to_string(cfg.sweep.axis) << '=' << row.axis_label << " S=" << row.interfaces << ' '
                              << to_string(e) << ": " << (row.error.empty() ? format_ms(row.quantile_s) : row.error)
                              << '\n';
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "axis_value,S,engine,p95_ms,mean_ms,throughput_mbps,stable,ci_low,ci_high\n";
    for (const SweepRow& r : rows) {
        os << r.axis_label << ',' << r.interfaces << ',' << to_string(r.engine) << ',';
        if (!r.error.empty()) {
            os << "nan,nan,nan,error,,\n";
            continue;
        }
        const bool bounded = r.stable && r.quantile_s;
        os << (bounded ? format_ms(r.quantile_s) : "inf") << ',' << (bounded && r.mean_s ? format_ms(r.mean_s) : "inf")
           << ',' << format_sig(r.throughput_bps / 1e6) << ',' << (r.stable ? "true" : "false") << ',';
        if (r.ci && bounded)
            os << format_ms(r.ci->low) << ',' << format_ms(r.ci->high);
        else
            os << ',';
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// capacity
// ---------------------------------------------------------------------------

struct CapacityRow {
    int interfaces = 1;
    double capacity_pps = 0;
    double capacity_bps = 0;
    double gain = 0;   ///< relative to the smallest interface count
    std::string note;  ///< set when the budget is unattainable
};

/// Largest arrival rate whose analytic q-quantile stays within `budget`,
/// found by geometric bracketing and bisection to relative width `tol`.
/// Returns 0 when even a vanishing load misses the budget.
inline double max_rate_within_budget(Scenario sc, const PhyMacParams& params, const SolverOptions& solver,
                                     double budget, double q, double tol, std::string* note = nullptr) {
    auto feasible = [&](double rate) {
        sc.arrival_rate = rate;
        try {
            const AnalyticSolution s = solve_fixed_point(sc, params, solver);
            auto d = s.quantile(q);
            return d && *d <= budget;
        } catch (const NonConvergence&) {
            return false;
        } catch (const DegenerateChannel&) {
            return false;
        }
    };

    sc.arrival_rate = 0;
    const AnalyticSolution idle = solve_fixed_point(sc, params, solver);
    const double floor = *idle.quantile(q);
    const double probe = 1e-9 * sc.n_interfaces / idle.e_service_s;
    if (!(floor <= budget) || !feasible(probe)) {
        if (note) *note = "budget below the zero-load delay of " + format_sig(floor * 1e3) + " ms";
        return 0.0;
    }

    double lo = probe;
    double hi = sc.n_interfaces / idle.e_service_s;
    for (int i = 0; i < 64 && feasible(hi); ++i) {
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

inline std::vector<CapacityRow> capacity(const ExperimentConfig& cfg) {
    std::vector<int> servers = cfg.capacity.interfaces;
    std::sort(servers.begin(), servers.end());
    servers.erase(std::unique(servers.begin(), servers.end()), servers.end());
    std::vector<CapacityRow> rows;
    for (int S : servers) {
        CapacityRow row;
        row.interfaces = S;
        Scenario sc{S, 0.0, cfg.contenders, cfg.activity};
        row.capacity_pps = max_rate_within_budget(sc, cfg.phy, cfg.solver, cfg.capacity.budget_s, cfg.quantile,
                                                  cfg.capacity.tolerance, &row.note);
        row.capacity_bps = row.capacity_pps * cfg.phy.packet_bits;
        rows.push_back(row);
    }
    const double base = rows.front().capacity_pps;
    for (auto& r : rows) r.gain = base > 0 ? r.capacity_pps / base : std::numeric_limits<double>::quiet_NaN();
    return rows;
}

inline void write_capacity_csv(std::ostream& os, const std::vector<CapacityRow>& rows) {
    os << "S,capacity_mbps,capacity_pps,gain,note\n";
    for (const auto& r : rows)
        os << r.interfaces << ',' << format_sig(r.capacity_bps / 1e6) << ',' << format_sig(r.capacity_pps) << ','
           << format_sig(r.gain, 3) << ',' << r.note << '\n';
}

}  // namespace mlo::experiments
