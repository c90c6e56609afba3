// Acceptance run: one PASS/FAIL line per criterion, indented detail lines
// underneath. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mlo/mlo.hpp"
#include "support/scenarios.hpp"

namespace {

// Tolerances and thresholds, pinned.
constexpr double kMm1Tol = 1e-9;
constexpr double kMm1Seconds = 1.0;
constexpr double kEtaRelTol = 0.02;
constexpr double kQuantileRelTol = 0.03;
constexpr double kErlangArrivals = 2.2e6;  // offered; about 2e6 measured after warmup
constexpr double kErlangSeconds = 120.0;
constexpr double kCrossRelTol = 0.10;
constexpr int kCrossReplications = 10;
constexpr double kCrossDuration = 60.0;
constexpr double kCrossSeconds = 600.0;
constexpr double kThreefoldLow = 2.5, kThreefoldHigh = 3.5;
constexpr double kBudget = 5e-3;
constexpr double kGainRelTol = 0.15;
constexpr double kSloBlowup = 0.1;  // 100 ms
constexpr double kBatchVsPoisson = 2.0;
constexpr double kLastInterfaceGain = 0.10;
constexpr int kBatchReplications = 5;
constexpr double kBatchDuration = 60.0;
constexpr double kResidualTol = 1e-8;

const mlo::PhyMacParams kPhy;

struct Verdict {
    bool pass = true;
    std::string summary;
    std::vector<std::string> details;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string ms(std::optional<double> s) { return mlo::experiments::format_ms(s); }

std::vector<double> fig2a_loads() {
    std::vector<double> v;
    for (int l = 2; l <= 40; l += 2) v.push_back(l);
    return v;
}

std::optional<double> analytic_p95(int S, double load_bps, int N, double alpha) {
    const auto sc = mlo::Scenario::from_load(S, load_bps, kPhy.packet_bits, N, alpha);
    return mlo::solve_fixed_point(sc, kPhy).quantile(0.95);
}

Verdict mm1_reduction() {
    Verdict v;
    const auto t0 = Clock::now();
    double worst = 0;
    for (int k = 1; k <= 9; ++k) {
        const double a = 0.1 * k;
        mlo::Scenario sc{1, 0, 0, 0};
        const double es = mlo::solve_fixed_point(sc, kPhy).e_service_s;
        sc.arrival_rate = a / es;
        const auto sol = mlo::solve_fixed_point(sc, kPhy);
        const auto d = *sol.distribution();
        const double mu = 1.0 / sol.e_service_s;
        for (int i = 1; i <= 20; ++i) {
            const double t = i * 0.5 / (mu * (1 - a));
            worst = std::max(worst, std::fabs(mlo::delay_cdf(d, t) - (1 - std::exp(-mu * (1 - a) * t))));
        }
    }
    const double secs = seconds_since(t0);
    v.pass = worst <= kMm1Tol && secs < kMm1Seconds;
    v.summary = "max |F - F_mm1| = " + fmt("%.2e", worst) + " over 9 loads x 20 points, " + fmt("%.3f", secs) + " s";
    return v;
}

Verdict erlang_oracle() {
    Verdict v;
    const auto t0 = Clock::now();
    const double service = 1e-3;
    double worst_eta = 0, worst_q = 0;
    for (int S : {1, 2, 4}) {
        for (double a : {0.3, 0.6, 0.9}) {
            const double rate = S * a / service;
            mlo::traffic::PoissonSource src(rate, kPhy.packet_bits, mlo::experiments::derive_seed(11, S * 10 + a * 10));
            mlo::sim::SimConfig cfg;
            cfg.mode = mlo::sim::SimMode::pure_queue;
            cfg.mean_service = service;
            cfg.duration = kErlangArrivals / rate;
            cfg.seed = mlo::experiments::derive_seed(12, S * 10 + a * 10);
            const auto rep = mlo::sim::run(mlo::Scenario{S, rate, 0, 0}, kPhy, src, cfg);
            const auto q = mlo::stationary_distribution(S, a, 1.0 / service);
            const double exact_q = mlo::delay_quantile(mlo::DelayDistribution::from(q), 0.95);
            const double eta_err = std::fabs(rep.queued_fraction / q.eta - 1);
            const double q_err = std::fabs(rep.p95 / exact_q - 1);
            worst_eta = std::max(worst_eta, eta_err);
            worst_q = std::max(worst_q, q_err);
            const bool ok = eta_err <= kEtaRelTol && q_err <= kQuantileRelTol && rep.measured_arrivals >= 1'000'000;
            v.pass = v.pass && ok;
            std::ostringstream d;
            d << "S=" << S << " a=" << a << " arrivals=" << rep.measured_arrivals << " eta " << fmt("%.4f", rep.queued_fraction)
              << " vs " << fmt("%.4f", q.eta) << ", p95 " << ms(rep.p95) << " vs " << ms(exact_q) << " ms"
              << (ok ? "" : "  <- out of tolerance");
            v.details.push_back(d.str());
        }
    }
    const double secs = seconds_since(t0);
    v.pass = v.pass && secs < kErlangSeconds;
    v.summary = "worst eta error " + fmt("%.2f", 100 * worst_eta) + "%, worst p95 error " + fmt("%.2f", 100 * worst_q) +
                "%, " + fmt("%.0f", secs) + " s";
    return v;
}

Verdict cross_engine() {
    Verdict v;
    const auto t0 = Clock::now();
    int points = 0, outside = 0;
    double worst = 0;
    std::string worst_at;
    for (int S = 1; S <= 4; ++S) {
        for (double load : fig2a_loads()) {
            const auto ana = analytic_p95(S, load * 1e6, 5, 0.25);
            if (!ana) continue;
            mlo::ExperimentConfig cfg;
            cfg.interfaces = S;
            cfg.load_bps = load * 1e6;
            cfg.replications = kCrossReplications;
            cfg.sim.duration = kCrossDuration;
            cfg.bootstrap_resamples = 200;
            const auto sim = mlo::experiments::simulate(cfg);
            ++points;
            const double err = sim.quantile_s ? *sim.quantile_s / *ana - 1 : INFINITY;
            const bool ok = std::fabs(err) <= kCrossRelTol;
            if (!ok) ++outside;
            if (std::fabs(err) > std::fabs(worst)) {
                worst = err;
                worst_at = "S=" + std::to_string(S) + " load=" + fmt("%g", load);
            }
            v.details.push_back("S=" + std::to_string(S) + " load=" + fmt("%g", load) + " sim " + ms(sim.quantile_s) +
                                " ms vs analytic " + ms(ana) + " ms (" + fmt("%+.1f", 100 * err) + "%)" +
                                (ok ? "" : "  <- out of tolerance"));
        }
    }
    const double secs = seconds_since(t0);
    v.pass = outside == 0 && secs < kCrossSeconds;
    v.summary = std::to_string(points - outside) + "/" + std::to_string(points) + " stable points within " +
                fmt("%.0f", 100 * kCrossRelTol) + "%, worst " + fmt("%+.1f", 100 * worst) + "% at " + worst_at + ", " +
                fmt("%.0f", secs) + " s";
    return v;
}

Verdict threefold() {
    Verdict v;
    const auto one = analytic_p95(1, 10e6, 5, 0.25);
    const auto two = analytic_p95(2, 10e6, 5, 0.25);
    const double ratio = one && two ? *one / *two : NAN;
    v.pass = ratio >= kThreefoldLow && ratio <= kThreefoldHigh;
    v.summary = "p95 S=1 " + ms(one) + " ms / S=2 " + ms(two) + " ms = " + fmt("%.3f", ratio);
    return v;
}

std::vector<mlo::experiments::CapacityRow> capacity_rows(double alpha) {
    mlo::ExperimentConfig cfg;
    cfg.contenders = 5;
    cfg.activity = alpha;
    cfg.capacity.budget_s = kBudget;
    cfg.capacity.interfaces = {1, 2, 3, 4};
    return mlo::experiments::capacity(cfg);
}

std::string gains_text(const std::vector<mlo::experiments::CapacityRow>& rows) {
    std::string s = "S=1 " + mlo::experiments::format_sig(rows[0].capacity_bps / 1e6) + " Mb/s; gains";
    for (std::size_t i = 1; i < rows.size(); ++i) s += " " + fmt("%.2f", rows[i].gain);
    return s;
}

Verdict capacity_gains_quiet() {
    Verdict v;
    const auto rows = capacity_rows(0.0);
    const double target[] = {2.4, 3.7, 5.0};
    for (int i = 0; i < 3; ++i) v.pass = v.pass && std::fabs(rows[i + 1].gain / target[i] - 1) <= kGainRelTol;
    v.summary = gains_text(rows) + " (targets 2.4 3.7 5.0 +-15%)";
    return v;
}

Verdict capacity_gains_crowded() {
    Verdict v;
    const auto rows = capacity_rows(0.5);
    const double floor_gain[] = {5.0, 8.0, 11.0};
    for (int i = 0; i < 3; ++i) v.pass = v.pass && rows[i + 1].gain >= floor_gain[i];
    v.summary = gains_text(rows) + " (need >= 5 8 11)";
    if (!rows[0].note.empty()) v.details.push_back("S=1: " + rows[0].note);
    return v;
}

Verdict diminishing_returns() {
    Verdict v;
    int checked = 0;
    for (double load : fig2a_loads()) {
        std::optional<double> p[5];
        for (int S = 1; S <= 4; ++S) p[S] = analytic_p95(S, load * 1e6, 5, 0.25);
        if (!p[2] || !p[3] || !p[4]) continue;
        ++checked;
        const double d34 = *p[3] - *p[4];
        const double d23 = *p[2] - *p[3];
        const double d12 = p[1] ? *p[1] - *p[2] : INFINITY;
        const bool ok = d34 < d23 && d23 < d12;
        v.pass = v.pass && ok;
        if (!ok)
            v.details.push_back("load=" + fmt("%g", load) + ": steps " + fmt("%.4g", d12 * 1e3) + " " +
                                fmt("%.4g", d23 * 1e3) + " " + fmt("%.4g", d34 * 1e3) + " ms");
    }
    v.summary = std::to_string(checked) + " load points with S=2..4 bounded checked";
    v.pass = v.pass && checked > 0;
    return v;
}

Verdict batch_video() {
    Verdict v;
    mlo::ExperimentConfig cfg = mlo::preset("fig5");
    cfg.replications = kBatchReplications;
    cfg.sim.duration = kBatchDuration;
    cfg.bootstrap_resamples = 200;
    cfg.load_bps = mlo::traffic::resolution_load_bps(mlo::traffic::Resolution::p2160);

    std::optional<double> p95[5];
    bool stable[5] = {};
    for (int S = 1; S <= 4; ++S) {
        cfg.interfaces = S;
        const auto r = mlo::experiments::simulate(cfg);
        p95[S] = r.quantile_s;
        stable[S] = r.stable;
        const auto poisson = analytic_p95(S, cfg.load_bps, cfg.contenders, cfg.activity);
        v.details.push_back("2160p S=" + std::to_string(S) + ": batch p95 " + ms(p95[S]) + " ms, Poisson-load analytic p95 " +
                            ms(poisson) + " ms" + (stable[S] ? "" : ", unstable"));
        if (S >= 2) {
            const bool bounded = stable[S] && p95[S] && poisson && *p95[S] <= kBatchVsPoisson * *poisson;
            if (!bounded) v.details.back() += "  <- not bounded within 2x";
            v.pass = v.pass && bounded;
        }
    }
    const bool slo_blows_up = !stable[1] || !p95[1] || *p95[1] > kSloBlowup;
    v.pass = v.pass && slo_blows_up;
    double last_gain = NAN;
    if (p95[3] && p95[4]) last_gain = (*p95[3] - *p95[4]) / *p95[3];
    const bool small_last_step = last_gain < kLastInterfaceGain;
    v.pass = v.pass && small_last_step;
    v.summary = std::string("S=1 ") + (slo_blows_up ? "unbounded" : "bounded") + ", S=3->4 improvement " +
                fmt("%.1f", 100 * last_gain) + "%";
    return v;
}

Verdict two_link_script() {
    Verdict v;
    const auto rep = fixtures::run_two_link_script(kPhy);
    const std::string got = fixtures::strip_trace(rep.trace);
    v.pass = got == fixtures::kTwoLinkExpected && rep.departures == 5;
    v.summary = std::to_string(rep.trace.size()) + " trace lines, " + std::to_string(rep.departures) + " delivered";
    if (!v.pass)
        for (const auto& line : rep.trace) v.details.push_back(line);
    return v;
}

Verdict property_suites() {
    Verdict v;
    double worst = 0;
    for (const auto& g : fixtures::grid200()) {
        const auto sc = mlo::Scenario::from_load(g.S, g.load_mbps * 1e6, kPhy.packet_bits, g.N, g.alpha);
        const auto sol = mlo::solve_fixed_point(sc, kPhy);
        worst = std::max(worst, mlo::fixed_point_residual(sol, sc, kPhy));
    }
    const std::string cmd = std::string("\"") + MLO_UNIT_TESTS + "\" --gtest_brief=1 > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    v.pass = worst < kResidualTol && rc == 0;
    v.summary = "unit/property suite " + std::string(rc == 0 ? "passed" : "FAILED") + ", max residual over 200 scenarios " +
                fmt("%.2e", worst);
    return v;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "single-server exponential reduction", mm1_reduction},
        {2, "pure-queue simulator vs Erlang law", erlang_oracle},
        {3, "protocol simulation vs analytic p95", cross_engine},
        {4, "two interfaces cut p95 about threefold", threefold},
        {5, "capacity gains without neighbour traffic", capacity_gains_quiet},
        {6, "capacity gains in a crowded channel", capacity_gains_crowded},
        {7, "diminishing returns per extra interface", diminishing_returns},
        {8, "batch video traffic pattern", batch_video},
        {9, "two-link scripted allocation trace", two_link_script},
        {10, "property suites and fixed-point residual", property_suites},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.summary = std::string("exception: ") + e.what();
        }
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << v.summary << '\n';
        for (const auto& d : v.details) std::cout << "    " << d << '\n';
        std::cout.flush();
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
