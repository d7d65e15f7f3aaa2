#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hybridcast/error.hpp"
#include "hybridcast/numeric/stats.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::preprocess {

/// zscore(threshold): |x - mean| > threshold * population std.
/// iqr(multiplier): outside [Q1 - m * IQR, Q3 + m * IQR].
struct OutlierMethod {
    enum class Kind { zscore, iqr } kind = Kind::zscore;
    double parameter = 3.0;

    static OutlierMethod zscore(double threshold = 3.0) { return {Kind::zscore, threshold}; }
    static OutlierMethod iqr(double multiplier = 1.5) { return {Kind::iqr, multiplier}; }

    [[nodiscard]] std::string describe() const {
        return (kind == Kind::zscore ? "zscore(" : "iqr(") + format_number(parameter) + ")";
    }
};

struct Fences {
    double lower;
    double upper;
};

[[nodiscard]] inline Fences outlier_fences(std::span<const double> x, const OutlierMethod& method) {
    if (method.kind == OutlierMethod::Kind::zscore) {
        const double m = stats::mean(x);
        const double s = stats::population_std(x);
        return {m - method.parameter * s, m + method.parameter * s};
    }
    const double q1 = stats::quantile(x, 0.25);
    const double q3 = stats::quantile(x, 0.75);
    const double iqr = q3 - q1;
    return {q1 - method.parameter * iqr, q3 + method.parameter * iqr};
}

/// Ascending indices of flagged points.
[[nodiscard]] inline std::vector<std::size_t> detect_outliers(const TimeSeries& series, const OutlierMethod& method) {
    if (series.has_missing()) throw Error(ErrorCode::argument, "outlier detection needs a series without missing values");
    if (series.size() < 4) throw Error(ErrorCode::argument, "outlier detection needs at least 4 points");
    if (!(method.parameter > 0.0)) throw Error(ErrorCode::argument, "outlier threshold must be positive");
    const auto x = series.values();
    std::vector<std::size_t> flagged;
    if (method.kind == OutlierMethod::Kind::zscore) {
        const double m = stats::mean(x);
        const double s = stats::population_std(x);
        if (s == 0.0) return flagged;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (std::abs(x[i] - m) > method.parameter * s) flagged.push_back(i);
        }
        return flagged;
    }
    const auto f = outlier_fences(x, method);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < f.lower || x[i] > f.upper) flagged.push_back(i);
    }
    return flagged;
}

/// interpolate: straight line between the nearest unflagged neighbours
/// (nearest neighbour value at either edge). clip_to_bound: clamp into the
/// fences recomputed from the unflagged points.
struct ReplaceStrategy {
    enum class Kind { interpolate, clip_to_bound } kind = Kind::interpolate;
    OutlierMethod bound = OutlierMethod::iqr(1.5);

    static ReplaceStrategy interpolate() { return {}; }
    static ReplaceStrategy clip_to_bound(OutlierMethod bound) { return {Kind::clip_to_bound, bound}; }

    [[nodiscard]] std::string describe() const {
        return kind == Kind::interpolate ? "interpolate" : "clip_to_bound(" + bound.describe() + ")";
    }
};

[[nodiscard]] inline TimeSeries replace_outliers(const TimeSeries& series, std::vector<std::size_t> indices,
                                                 const ReplaceStrategy& strategy) {
    const std::size_t n = series.size();
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    for (std::size_t i : indices) {
        if (i >= n) throw Error(ErrorCode::argument, "outlier index " + std::to_string(i) + " out of range", i);
    }
    if (indices.empty()) return series;
    if (indices.size() == n) throw Error(ErrorCode::argument, "every point is flagged; nothing to replace from");

    std::vector<char> flagged(n, 0);
    for (std::size_t i : indices) flagged[i] = 1;
    std::vector<double> x(series.values().begin(), series.values().end());

    if (strategy.kind == ReplaceStrategy::Kind::clip_to_bound) {
        std::vector<double> kept;
        for (std::size_t i = 0; i < n; ++i) {
            if (!flagged[i]) kept.push_back(x[i]);
        }
        const auto f = outlier_fences(kept, strategy.bound);
        for (std::size_t i : indices) x[i] = std::clamp(x[i], f.lower, f.upper);
        return series.with_values(std::move(x));
    }

    for (std::size_t i : indices) {
        std::ptrdiff_t left = static_cast<std::ptrdiff_t>(i) - 1;
        while (left >= 0 && flagged[static_cast<std::size_t>(left)]) --left;
        std::size_t right = i + 1;
        while (right < n && flagged[right]) ++right;
        if (left < 0) {
            x[i] = series[right];
        } else if (right >= n) {
            x[i] = series[static_cast<std::size_t>(left)];
        } else {
            const auto l = static_cast<std::size_t>(left);
            const double w = static_cast<double>(i - l) / static_cast<double>(right - l);
            x[i] = series[l] + w * (series[right] - series[l]);
        }
    }
    return series.with_values(std::move(x));
}

}  // namespace hybridcast::preprocess
