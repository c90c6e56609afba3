#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mlo/errors.hpp"

namespace mlo {

/// One evaluation point of the MLO access point.
struct Scenario {
    int n_interfaces = 1;      ///< S
    double arrival_rate = 0;   ///< lambda, packets/s
    int n_contenders = 0;      ///< N per link
    double activity = 0;       ///< alpha

    static Scenario from_load(int interfaces, double load_bps, double packet_bits, int contenders,
                              double activity) {
        return Scenario{interfaces, load_bps / packet_bits, contenders, activity};
    }

    double offered_load_bps(double packet_bits) const { return arrival_rate * packet_bits; }

    void validate() const {
        if (n_interfaces < 1) throw InvalidParameter("n_interfaces must be >= 1");
        if (n_interfaces > 64) throw InvalidParameter("n_interfaces must be <= 64");
        if (!(arrival_rate >= 0.0) || !std::isfinite(arrival_rate))
            throw InvalidParameter("arrival_rate must be finite and >= 0");
        if (n_contenders < 0) throw InvalidParameter("n_contenders must be >= 0");
        if (!(activity >= 0.0 && activity <= 1.0)) throw InvalidParameter("activity must lie in [0,1]");
    }
};

/// Stationary M/M/S occupancy. `pi[n]` holds n = 0..S-1; the mass at n >= S is
/// geometric and summed in closed form (`eta`).
struct QueueState {
    int servers = 1;
    double a = 0;
    double mu = 0;
    double pi0 = 1;
    std::vector<double> pi;
    double eta = 0;  ///< P(n >= S): an arrival finds every interface busy

    /// pi_n for any n, using the geometric tail beyond S-1.
    double pi_at(std::size_t n) const {
        if (n < pi.size()) return pi[n];
        // pi_S = eta (1 - a), pi_{S+k} = pi_S a^k
        return eta * (1.0 - a) * std::pow(a, static_cast<double>(n - pi.size()));
    }

    double total_mass() const {
        double s = eta;
        for (double v : pi) s += v;
        return s;
    }

    /// Every interface busy with probability one (the a >= 1 limit).
    static QueueState saturated(int servers, double a, double mu) {
        QueueState q;
        q.servers = servers;
        q.a = a;
        q.mu = mu;
        q.pi0 = 0;
        q.pi.assign(static_cast<std::size_t>(servers), 0.0);
        q.eta = 1.0;
        return q;
    }
};

/// Erlang-C stationary distribution for S servers at per-server intensity a.
/// Throws UnstableSystem when a >= 1.
inline QueueState stationary_distribution(int servers, double a, double mu = 0.0) {
    if (servers < 1) throw InvalidParameter("servers must be >= 1");
    if (!(a >= 0.0)) throw InvalidParameter("traffic intensity must be >= 0");
    if (a >= 1.0) throw UnstableSystem(a);

    const double offered = servers * a;  // S a
    // terms[n] = (S a)^n / n!, built incrementally
    std::vector<double> terms(static_cast<std::size_t>(servers));
    double term = 1.0;
    double sum = 0.0;
    for (int n = 0; n < servers; ++n) {
        terms[static_cast<std::size_t>(n)] = term;
        sum += term;
        term *= offered / (n + 1);
    }
    // term == (S a)^S / S!
    const double tail = term / (1.0 - a);

    QueueState q;
    q.servers = servers;
    q.a = a;
    q.mu = mu;
    q.pi0 = 1.0 / (sum + tail);
    q.pi.resize(terms.size());
    for (std::size_t n = 0; n < terms.size(); ++n) q.pi[n] = terms[n] * q.pi0;
    q.eta = tail * q.pi0;
    return q;
}

/// Response-time distribution of an M/M/S queue.
struct DelayDistribution {
    double mu = 1;
    double a = 0;
    int servers = 1;
    double eta = 0;

    static DelayDistribution from(const QueueState& q) {
        if (q.a >= 1.0) throw UnstableSystem(q.a);
        return DelayDistribution{q.mu, q.a, q.servers, q.eta};
    }

    /// E[D] = 1/mu + eta / (S mu (1 - a))
    double mean() const {
        if (a >= 1.0) throw UnstableSystem(a);
        return 1.0 / mu + eta / (servers * mu * (1.0 - a));
    }
};

/// Below this |1 - S(1-a)| the linear-in-t branch is used.
inline constexpr double kDegenerateBranchTolerance = 1e-9;

/// F_D(t) = 1 - e^{-mu t} - eta (e^{-S mu (1-a) t} - e^{-mu t}) / (1 - S (1-a)),
/// and 1 - e^{-mu t} - eta mu t e^{-mu t} when S(1-a) = 1.
inline double delay_cdf(const DelayDistribution& d, double t) {
    if (d.a >= 1.0) throw UnstableSystem(d.a);
    if (!(t >= 0.0)) throw InvalidParameter("delay_cdf: t must be >= 0");
    if (std::isinf(t)) return 1.0;

    const double mt = d.mu * t;
    const double service_cdf = -std::expm1(-mt);
    const double denom = 1.0 - d.servers * (1.0 - d.a);

    double waiting_term;
    if (std::fabs(denom) < kDegenerateBranchTolerance) {
        waiting_term = mt * std::exp(-mt);
    } else if (std::fabs(denom * mt) < 1.0) {
        // (e^{-mu t (1-denom)} - e^{-mu t}) / denom, without cancellation
        waiting_term = std::exp(-mt) * std::expm1(denom * mt) / denom;
    } else {
        waiting_term = (std::exp(-(1.0 - denom) * mt) - std::exp(-mt)) / denom;
    }
    const double f = service_cdf - d.eta * waiting_term;
    return f < 0.0 ? 0.0 : (f > 1.0 ? 1.0 : f);
}

/// Smallest t with F_D(t) >= q, by geometric bracketing from 1/mu and bisection
/// to a relative width of 1e-10.
inline double delay_quantile(const DelayDistribution& d, double q) {
    if (d.a >= 1.0) throw UnstableSystem(d.a);
    if (!(q > 0.0 && q < 1.0)) throw InvalidParameter("delay_quantile: q must lie in (0,1)");

    double lo = 0.0;
    double hi = 1.0 / d.mu;
    while (delay_cdf(d, hi) < q) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw InvalidParameter("delay_quantile: bracket overflow");
    }
    while (hi - lo > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (delay_cdf(d, mid) < q)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

}  // namespace mlo
