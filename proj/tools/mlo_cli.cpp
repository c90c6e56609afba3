// mlo_cli: analytic solves, simulations, sweeps and capacity searches for a
// multi-link access point.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mlo/mlo.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitUnstable = 4;

struct Overrides {
    std::string config_path;
    std::string preset;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;
    std::optional<double> quantile;
    std::optional<std::string> engine;
    std::optional<int> interfaces;
    std::optional<double> load_mbps;
    std::optional<int> contenders;
    std::optional<double> activity;
    std::optional<double> duration;
    std::optional<double> budget_ms;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--preset", o.preset, "built-in preset")
        ->check(CLI::IsMember(mlo::preset_names()));
    cmd->add_option("--out", o.out, "write CSV here");
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--replications", o.replications, "simulation replications");
    cmd->add_option("--quantile", o.quantile, "delay quantile in (0,1)");
    cmd->add_option("--engine", o.engine, "analytic|sim|both");
    cmd->add_option("--interfaces,-S", o.interfaces, "number of interfaces");
    cmd->add_option("--load", o.load_mbps, "offered load, Mb/s");
    cmd->add_option("--contenders,-N", o.contenders, "OBSS contenders per link");
    cmd->add_option("--activity", o.activity, "contender activity factor");
    cmd->add_option("--duration", o.duration, "simulated seconds per replication");
    cmd->add_option("--budget-ms", o.budget_ms, "delay budget for capacity");
}

mlo::ExperimentConfig resolve(const Overrides& o) {
    mlo::ExperimentConfig cfg = o.preset.empty() ? mlo::ExperimentConfig{} : mlo::preset(o.preset);
    if (!o.config_path.empty()) cfg = mlo::load_config(o.config_path, cfg);
    if (o.seed) cfg.sim.seed = *o.seed;
    if (o.replications) cfg.replications = *o.replications;
    if (o.quantile) cfg.quantile = *o.quantile;
    if (o.engine) cfg.engine = mlo::parse_engine(*o.engine);
    if (o.interfaces) cfg.interfaces = *o.interfaces;
    if (o.load_mbps) cfg.load_bps = *o.load_mbps * 1e6;
    if (o.contenders) cfg.contenders = *o.contenders;
    if (o.activity) cfg.activity = *o.activity;
    if (o.duration) cfg.sim.duration = *o.duration;
    if (o.budget_ms) cfg.capacity.budget_s = *o.budget_ms * 1e-3;
    cfg.validate();
    return cfg;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw mlo::ConfigError("cannot write `" + path + "`");
    return f;
}

int run_analyze(const Overrides& o) {
    const auto cfg = resolve(o);
    const auto r = mlo::experiments::analyze(cfg);
    mlo::experiments::print_analysis(std::cout, r, cfg.phy.packet_bits);
    if (!o.out.empty()) {
        auto f = open_out(o.out);
        mlo::experiments::SweepRow row = mlo::experiments::analytic_row(cfg);
        row.axis_label = mlo::experiments::axis_label(mlo::SweepAxis::load, cfg.load_bps / 1e6);
        row.interfaces = cfg.interfaces;
        mlo::experiments::write_sweep_csv(f, {row});
    }
    return r.solution.stable ? kExitOk : kExitUnstable;
}

int run_simulate(const Overrides& o) {
    const auto cfg = resolve(o);
    const auto r = mlo::experiments::simulate(cfg);
    mlo::experiments::print_simulation(std::cout, r, cfg.phy.packet_bits);
    if (!o.out.empty()) {
        auto f = open_out(o.out);
        mlo::experiments::SweepRow row = mlo::experiments::sim_row(cfg);
        row.axis_label = mlo::experiments::axis_label(mlo::SweepAxis::load, cfg.load_bps / 1e6);
        row.interfaces = cfg.interfaces;
        row.engine = mlo::Engine::sim;
        mlo::experiments::write_sweep_csv(f, {row});
    }
    return r.stable ? kExitOk : kExitUnstable;
}

int run_sweep(const Overrides& o) {
    const auto cfg = resolve(o);
    const auto rows = mlo::experiments::sweep(cfg, &std::cerr);
    if (o.out.empty()) {
        mlo::experiments::write_sweep_csv(std::cout, rows);
    } else {
        auto f = open_out(o.out);
        mlo::experiments::write_sweep_csv(f, rows);
    }
    bool any_ok = false, any_stable = false, any_nonconv = false;
    for (const auto& r : rows) {
        if (r.error.empty()) {
            any_ok = true;
            any_stable = any_stable || r.stable;
        } else if (r.error.find("converge") != std::string::npos) {
            any_nonconv = true;
        }
    }
    if (!any_ok) return any_nonconv ? kExitNonConvergence : kExitFailure;
    return any_stable ? kExitOk : kExitUnstable;
}

int run_capacity(const Overrides& o) {
    const auto cfg = resolve(o);
    const auto rows = mlo::experiments::capacity(cfg);
    if (o.out.empty()) {
        mlo::experiments::write_capacity_csv(std::cout, rows);
    } else {
        auto f = open_out(o.out);
        mlo::experiments::write_capacity_csv(f, rows);
    }
    return kExitOk;
}

int run_show_config(const Overrides& o) {
    std::cout << mlo::to_json(resolve(o)).dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay analysis and simulation of a multi-link Wi-Fi access point"};
    app.require_subcommand(1);
    Overrides o;
    struct Cmd {
        const char* name;
        const char* help;
        int (*fn)(const Overrides&);
    };
    const Cmd cmds[] = {
        {"analyze", "solve the analytic model for one scenario", run_analyze},
        {"simulate", "simulate one scenario over several replications", run_simulate},
        {"sweep", "sweep one axis across interface counts and engines", run_sweep},
        {"capacity", "largest load meeting a delay budget, per interface count", run_capacity},
        {"show-config", "print the resolved configuration as JSON", run_show_config},
    };
    int (*selected)(const Overrides&) = nullptr;
    for (const Cmd& c : cmds) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        add_common(sub, o);
        sub->callback([&selected, fn = c.fn] { selected = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        return selected(o);
    } catch (const mlo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const mlo::TraceParseError& e) {
        std::cerr << "trace error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const mlo::InvalidParameter& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return kExitConfig;
    } catch (const mlo::NonConvergence& e) {
        std::cerr << "no convergence: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const mlo::DegenerateChannel& e) {
        std::cerr << "degenerate channel: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
