#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "mlo/errors.hpp"

namespace mlo {

namespace detail {

inline std::size_t nearest_rank(std::size_t n, double q) {
    if (n == 0) throw EmptySample();
    if (!(q > 0.0 && q <= 1.0)) throw InvalidParameter("percentile: q must lie in (0,1]");
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
    return std::clamp<std::size_t>(rank, 1, n);
}

}  // namespace detail

/// Nearest-rank percentile: the ceil(q n)-th order statistic.
inline double percentile(std::span<const double> samples, double q) {
    const std::size_t k = detail::nearest_rank(samples.size(), q);
    std::vector<double> copy(samples.begin(), samples.end());
    std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(k - 1), copy.end());
    return copy[k - 1];
}

/// Same as percentile() for an ascending sample, without copying.
inline double percentile_sorted(std::span<const double> sorted, double q) {
    return sorted[detail::nearest_rank(sorted.size(), q) - 1];
}

struct ConfidenceInterval {
    double low = 0;
    double high = 0;
};

/// Percentile bootstrap CI for the nearest-rank q-quantile of an ascending
/// sample.
///
/// A resample's k-th order statistic is x_(i) or below exactly when at least
/// k of its n draws land on indices <= i, which is Binomial(n, i/n). Each
/// resample's quantile index is therefore drawn by inverting
/// P(I <= i) = I_{i/n}(k, n - k + 1) at a uniform variate, which is
/// distributionally identical to materializing the resample.
inline ConfidenceInterval bootstrap_quantile_ci(std::span<const double> sorted, double q, int resamples,
                                                std::uint64_t seed, double level = 0.95) {
    const std::size_t n = sorted.size();
    const std::size_t k = detail::nearest_rank(n, q);
    if (resamples < 1) throw InvalidParameter("bootstrap: resamples must be >= 1");
    if (n == 1) return {sorted[0], sorted[0]};

    const auto nd = static_cast<double>(n);
    const auto kd = static_cast<double>(k);
    auto index_cdf = [&](std::size_t i) {
        if (i >= n) return 1.0;
        return boost::math::ibeta(kd, nd - kd + 1.0, static_cast<double>(i) / nd);
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(resamples));
    for (int r = 0; r < resamples; ++r) {
        const double u = unif(rng);
        std::size_t lo = 1, hi = n;  // smallest i in [1, n] with cdf(i) >= u
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (index_cdf(mid) >= u)
                hi = mid;
            else
                lo = mid + 1;
        }
        stats.push_back(sorted[lo - 1]);
    }
    std::sort(stats.begin(), stats.end());
    const double tail = (1.0 - level) / 2.0;
    return {percentile_sorted(stats, std::max(tail, 1e-12)), percentile_sorted(stats, 1.0 - tail)};
}

/// Ordinary least-squares slope of y on x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace mlo
