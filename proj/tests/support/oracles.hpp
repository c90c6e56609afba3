#pragma once

// Reference computations that share no code with the library. Each one takes
// a different route to the same quantity (brute-force sums, recursions,
// quadrature or sampling).

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

/// Mean contention window by summing over the attempt on which a packet
/// finally succeeds: success on attempt k has probability (1-p) p^k and uses
/// window (CWmin+1) 2^min(k,m). Returns the mean window minus one.
inline double stage_sum_cw(double p, int cw_min, int m, int terms = 2000000) {
    double total = 0, weight = 1.0;  // weight = p^k
    for (int k = 0; k < terms; ++k) {
        const double window = (cw_min + 1) * std::pow(2.0, std::min(k, m));
        total += (1.0 - p) * weight * window;
        weight *= p;
        if (weight < 1e-300) break;
    }
    return total - 1.0;
}

/// Erlang-B by the standard recursion, then Erlang-C.
inline double erlang_c(int servers, double a) {
    const double A = servers * a;
    double b = 1.0;
    for (int k = 1; k <= servers; ++k) b = A * b / (k + A * b);
    return servers * b / (servers - A * (1.0 - b));
}

/// Empty-system probability by direct summation of the unnormalized
/// birth-death weights, tail summed term by term.
inline double empty_probability(int servers, double a, int terms = 2000000) {
    const double A = servers * a;
    double w = 1.0, sum = 1.0;
    for (int n = 1; n < terms; ++n) {
        w *= n <= servers ? A / n : a;
        sum += w;
        if (w < 1e-18 * sum) break;
    }
    return 1.0 / sum;
}

/// Unnormalized weight of state n divided by the empty weight.
inline double state_weight(int servers, double a, int n) {
    const double A = servers * a;
    double w = 1.0;
    for (int k = 1; k <= n; ++k) w *= k <= servers ? A / k : a;
    return w;
}

/// FIFO M/M/S sojourn-time CDF by quadrature: with probability 1-C the
/// packet is served at once; otherwise it waits Exp(theta) first,
/// theta = S mu (1-a). The convolution is integrated with composite Simpson.
inline double mms_sojourn_cdf(int servers, double a, double mu, double t, int panels = 4000) {
    const double C = erlang_c(servers, a);
    const double theta = servers * mu * (1.0 - a);
    auto service_cdf = [&](double x) { return 1.0 - std::exp(-mu * x); };
    auto integrand = [&](double w) { return theta * std::exp(-theta * w) * service_cdf(t - w); };
    const double h = t / panels;
    double s = integrand(0) + integrand(t);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
    const double waited = s * h / 3.0;
    return (1.0 - C) * service_cdf(t) + C * waited;
}

/// Sampled mean of the minimum of s uniform backoffs on [0, cw], with s
/// drawn from the queue occupancy: s = S - n when n < S, otherwise 1.
inline double monte_carlo_backoff(const std::vector<double>& pi_below_s, double tail, int servers, double cw,
                                  int draws, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> weights(pi_below_s);
    weights.push_back(tail);
    std::discrete_distribution<int> occupancy(weights.begin(), weights.end());
    double sum = 0;
    for (int i = 0; i < draws; ++i) {
        const int n = occupancy(rng);
        const int s = n < servers ? servers - n : 1;
        double best = cw;
        for (int k = 0; k < s; ++k) best = std::min(best, cw * u(rng));
        sum += best;
    }
    return sum / draws;
}

/// Slot-level sampling of a link with `contenders` stations each
/// transmitting with probability tau per virtual slot. Returns
/// 1 - sigma / (mean virtual-slot duration).
inline double monte_carlo_occupancy(double tau, int contenders, double sigma, double ts, double tc, int slots,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution tx(tau);
    double total = 0;
    for (int i = 0; i < slots; ++i) {
        int k = 0;
        for (int c = 0; c < contenders; ++c) k += tx(rng) ? 1 : 0;
        total += k == 0 ? sigma : k == 1 ? ts : tc;
    }
    return 1.0 - sigma / (total / slots);
}

/// Plain restatement of the expected service-time formula, written the long
/// way round: expected retries times a failed round plus one successful round.
inline double service_time(double eb, double rho, double p, double sigma, double ts, double tc) {
    const double backoff_wall = eb * sigma / (1.0 - rho);
    const double expected_failures = p / (1.0 - p);
    return expected_failures * (backoff_wall + tc) + backoff_wall + ts;
}

}  // namespace oracle
