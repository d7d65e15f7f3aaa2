#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "hybridcast/error.hpp"

namespace hybridcast::stats {

[[nodiscard]] inline double mean(std::span<const double> x) {
    if (x.empty()) throw Error(ErrorCode::argument, "mean of empty range");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Population (divide-by-n) standard deviation.
[[nodiscard]] inline double population_std(std::span<const double> x) {
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

/// Linear-interpolation quantile between order statistics (position q * (n - 1)).
[[nodiscard]] inline double quantile(std::span<const double> x, double q) {
    if (x.empty()) throw Error(ErrorCode::argument, "quantile of empty range");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

[[nodiscard]] inline double median(std::span<const double> x) { return quantile(x, 0.5); }

/// 1.4826 * median absolute deviation from the median.
[[nodiscard]] inline double mad_scale(std::span<const double> x) {
    const double med = median(x);
    std::vector<double> dev(x.size());
    std::transform(x.begin(), x.end(), dev.begin(), [med](double v) { return std::abs(v - med); });
    return 1.4826 * median(dev);
}

}  // namespace hybridcast::stats
