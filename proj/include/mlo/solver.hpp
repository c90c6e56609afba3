#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "mlo/backoff.hpp"
#include "mlo/errors.hpp"
#include "mlo/obss.hpp"
#include "mlo/phy_timing.hpp"
#include "mlo/queueing.hpp"

namespace mlo {

struct SolverOptions {
    double tolerance = 1e-9;
    int max_iterations = 10000;
    double damping = 0.5;  ///< weight kept from the previous tau and tau'
};

/// Converged state of the coupled AP / OBSS model.
struct AnalyticSolution {
    QueueState queue;  ///< a, mu, pi, eta (saturated form when unstable)
    ObssState obss;
    AirTimes air;
    double e_backoff_slots = 0;  ///< E[B]
    double e_service_s = 0;      ///< E[Ds]
    double cw_bar = 0;
    double tau_ap = 0;
    double gamma = 0;
    double rho = 0;
    double p_coll = 0;
    double tau_cont = 0;
    double p_coll_cont = 0;
    bool stable = false;  ///< a < 1
    int iterations = 0;
    double residual = 0;

    double intensity() const { return queue.a; }

    /// Response-time law; nullopt when the queue is unstable.
    std::optional<DelayDistribution> distribution() const {
        if (!stable) return std::nullopt;
        return DelayDistribution::from(queue);
    }

    /// q-quantile of the delay in seconds; nullopt means unbounded.
    std::optional<double> quantile(double q) const {
        auto d = distribution();
        if (!d) return std::nullopt;
        return delay_quantile(*d, q);
    }

    std::optional<double> mean_delay() const {
        auto d = distribution();
        if (!d) return std::nullopt;
        return d->mean();
    }
};

namespace detail {

/// Iterate variables of the fixed point.
struct FixedPointVars {
    double e_backoff = 0;
    double tau = 0;
    double tau_cont = 0;
    double rho = 0;
    double p = 0;
};

struct FixedPointEval {
    double cw_bar = 0;
    double e_service = 0;
    QueueState queue;
    double e_backoff = 0;
    ApAccess access;
    ContenderUpdate contender;
    ObssState obss;
};

inline QueueState queue_for(int servers, double a, double mu) {
    if (a >= 1.0) return QueueState::saturated(servers, a, mu);
    return stationary_distribution(servers, a, mu);
}

/// One pass of every update map. tau and tau' are blended with `keep` of the
/// previous value (0 = undamped).
inline FixedPointEval evaluate_maps(const FixedPointVars& v, const Scenario& sc, const PhyMacParams& params,
                                    const AirTimes& air, double keep) {
    FixedPointEval e;
    const int S = sc.n_interfaces;
    e.cw_bar = mean_contention_window(v.p, params.cw_min, params.m_stages);
    e.e_service = expected_service_time(v.e_backoff, v.rho, v.p, air, params.sigma);
    const double a = sc.arrival_rate * e.e_service / S;
    e.queue = queue_for(S, a, 1.0 / e.e_service);
    e.e_backoff = expected_backoff(e.queue, e.cw_bar, S);
    e.access = ap_transmission_probability(e.queue, e.e_backoff, S);
    const double tau = keep * v.tau + (1.0 - keep) * e.access.tau;
    e.contender = contender_update(tau, v.tau_cont, sc.n_contenders, sc.activity, params);
    const double tau_cont = keep * v.tau_cont + (1.0 - keep) * e.contender.tau_cont;
    e.access.tau = tau;
    e.obss = obss_state(tau_cont, e.contender, sc.n_contenders, air, params.sigma);
    if (e.obss.p >= 1.0 - 1e-12 || !(e.obss.rho < 1.0))
        throw DegenerateChannel("OBSS activity saturates the channel (p_e = 0)");
    return e;
}

inline FixedPointVars vars_of(const FixedPointEval& e) {
    return FixedPointVars{e.e_backoff, e.access.tau, e.obss.tau_cont, e.obss.rho, e.obss.p};
}

inline double change_between(const FixedPointVars& x, const FixedPointVars& y) {
    const double scale = std::max(1.0, std::fabs(x.e_backoff));
    double c = std::fabs(y.e_backoff - x.e_backoff) / scale;
    c = std::max(c, std::fabs(y.tau - x.tau));
    c = std::max(c, std::fabs(y.tau_cont - x.tau_cont));
    c = std::max(c, std::fabs(y.rho - x.rho));
    c = std::max(c, std::fabs(y.p - x.p));
    return c;
}

inline AnalyticSolution assemble(const FixedPointVars& v, const Scenario& sc, const PhyMacParams& params,
                                 const AirTimes& air) {
    // Re-evaluate undamped from the converged point so every reported
    // quantity belongs to the same pass.
    const FixedPointEval e = evaluate_maps(v, sc, params, air, 0.0);
    AnalyticSolution s;
    s.air = air;
    s.cw_bar = e.cw_bar;
    s.e_service_s = e.e_service;
    s.queue = e.queue;
    s.e_backoff_slots = v.e_backoff;
    s.tau_ap = v.tau;
    s.gamma = e.access.gamma;
    s.tau_cont = v.tau_cont;
    s.rho = v.rho;
    s.p_coll = v.p;
    s.obss = obss_state(v.tau_cont, e.contender, sc.n_contenders, air, params.sigma);
    s.p_coll_cont = e.contender.p_cont;
    s.stable = e.queue.a < 1.0;
    s.residual = change_between(v, vars_of(e));
    return s;
}

}  // namespace detail

/// Solves the coupled backoff / queue / OBSS fixed point by damped Picard
/// iteration from p = rho = tau = tau' = 0 and E[B] = CW(0)/2.
///
/// An unstable queue (a >= 1) is not an error: the result has stable = false
/// and no delay distribution. Throws NonConvergence after max_iterations and
/// DegenerateChannel when OBSS traffic leaves no idle slots.
inline AnalyticSolution solve_fixed_point(const Scenario& sc, const PhyMacParams& params,
                                          const SolverOptions& opts = {}) {
    sc.validate();
    const AirTimes air = compute_air_times(params);

    detail::FixedPointVars v;
    v.e_backoff = mean_contention_window(0.0, params.cw_min, params.m_stages) / 2.0;

    double change = 0.0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const detail::FixedPointEval e = detail::evaluate_maps(v, sc, params, air, opts.damping);
        const detail::FixedPointVars next = detail::vars_of(e);
        change = detail::change_between(v, next);
        v = next;
        if (change < opts.tolerance) {
            AnalyticSolution s = detail::assemble(v, sc, params, air);
            s.iterations = it;
            return s;
        }
    }
    throw NonConvergence(change, opts.max_iterations);
}

/// Largest change produced by applying every undamped update map once at the
/// solution's operating point.
inline double fixed_point_residual(const AnalyticSolution& s, const Scenario& sc, const PhyMacParams& params) {
    const detail::FixedPointVars v{s.e_backoff_slots, s.tau_ap, s.tau_cont, s.rho, s.p_coll};
    const detail::FixedPointEval e = detail::evaluate_maps(v, sc, params, s.air, 0.0);
    return detail::change_between(v, detail::vars_of(e));
}

}  // namespace mlo
