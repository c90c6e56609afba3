#pragma once

#include <cmath>

#include "mlo/errors.hpp"
#include "mlo/phy_timing.hpp"
#include "mlo/queueing.hpp"

namespace mlo {

/// Mean binary-exponential-backoff contention window (slots) at collision
/// probability p:
///
///     CW = (1 - p - p (2p)^m) / (1 - 2p) * (CWmin + 1) - 1
///
/// evaluated in the equivalent polynomial form
/// (CWmin + 1) [(1 - p) sum_{k<m} (2p)^k + (2p)^m] - 1, which is regular at
/// p = 1/2 (value (2 + m)/2 (CWmin + 1) - 1). Bounded above by
/// 2^m (CWmin + 1) - 1 as p -> 1.
inline double mean_contention_window(double p, int cw_min, int m) {
    if (!(p >= 0.0 && p < 1.0)) throw InvalidParameter("mean_contention_window: p must lie in [0,1)");
    if (cw_min < 1 || m < 0) throw InvalidParameter("mean_contention_window: bad window parameters");
    const double r = 2.0 * p;
    double geometric = 0.0;  // sum_{k<m} r^k
    double power = 1.0;      // r^k
    for (int k = 0; k < m; ++k) {
        geometric += power;
        power *= r;
    }
    return ((1.0 - p) * geometric + power) * (cw_min + 1) - 1.0;
}

/// E[B] = sum_{n<S} pi_n CW/(S-n+1) + P(n >= S) CW/2.
///
/// A packet finding n others holds s = max(1, S-n) backoff instances and the
/// minimum of s uniforms on [0, CW] has mean CW/(s+1).
inline double expected_backoff(const QueueState& queue, double cw_bar, int servers) {
    double eb = 0.0;
    for (int n = 0; n < servers; ++n)
        eb += queue.pi[static_cast<std::size_t>(n)] * cw_bar / (servers - n + 1);
    return eb + queue.eta * cw_bar / 2.0;
}

struct ApAccess {
    double tau = 0;    ///< per-slot AP transmission probability on one link
    double gamma = 0;  ///< probability a given interface is busy
};

/// gamma = 1 - sum_{n<S} (S-n)/S pi_n,  tau = gamma / (E[B] + 1).
inline ApAccess ap_transmission_probability(const QueueState& queue, double e_backoff, int servers) {
    double idle = 0.0;
    for (int n = 0; n < servers; ++n)
        idle += static_cast<double>(servers - n) / servers * queue.pi[static_cast<std::size_t>(n)];
    ApAccess out;
    out.gamma = std::fmin(1.0, std::fmax(0.0, 1.0 - idle));
    out.tau = out.gamma / (e_backoff + 1.0);
    return out;
}

/// Mean time to deliver one packet including retries:
///
///     E[Ds] = p/(1-p) (E[B] sigma/(1-rho) + Tc) + (E[B] sigma/(1-rho) + Ts)
inline double expected_service_time(double e_backoff, double rho, double p, const AirTimes& air,
                                    double sigma) {
    if (!(rho >= 0.0 && rho < 1.0)) throw DegenerateChannel("channel occupancy rho must lie in [0,1)");
    if (!(p >= 0.0 && p < 1.0)) throw DegenerateChannel("collision probability p must lie in [0,1)");
    const double backoff_time = e_backoff * sigma / (1.0 - rho);
    return p / (1.0 - p) * (backoff_time + air.t_c) + (backoff_time + air.t_s);
}

}  // namespace mlo
