#pragma once

#include <cmath>
#include <optional>

#include "hybridcast/error.hpp"
#include "hybridcast/numeric/least_squares.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::preprocess {

/// Constant-only Dickey-Fuller 5% critical value.
inline constexpr double kAdfCritical5pct = -2.86;

struct AdfResult {
    double statistic = 0.0;
    bool stationary_at_5pct = false;
    std::size_t lags = 0;
};

/// Augmented Dickey-Fuller t-ratio for gamma in
///   dy_t = c + gamma * y_{t-1} + sum_i delta_i * dy_{t-i} + e_t.
/// max_lag defaults to floor(cbrt(n)).
[[nodiscard]] inline AdfResult adf_statistic(const TimeSeries& series, std::optional<std::size_t> max_lag = std::nullopt) {
    if (series.has_missing()) throw Error(ErrorCode::argument, "ADF needs a series without missing values");
    const auto y = series.values();
    const std::size_t n = y.size();
    const std::size_t lags = max_lag.value_or(static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n)))));
    if (n < lags + 10) {
        throw Error(ErrorCode::argument, "ADF with " + std::to_string(lags) + " lags needs at least " +
                                             std::to_string(lags + 10) + " points");
    }

    const std::size_t first = lags + 1;
    const auto rows = static_cast<Eigen::Index>(n - first);
    const auto cols = static_cast<Eigen::Index>(2 + lags);
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd dy(rows);
    for (std::size_t t = first; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - first);
        dy(r) = y[t] - y[t - 1];
        X(r, 0) = 1.0;
        X(r, 1) = y[t - 1];
        for (std::size_t i = 1; i <= lags; ++i) X(r, static_cast<Eigen::Index>(1 + i)) = y[t - i] - y[t - i - 1];
    }
    const auto fit = linalg::ols(X, dy);
    AdfResult out;
    out.lags = lags;
    out.statistic = fit.coefficients(1) / fit.standard_errors(1);
    if (!std::isfinite(out.statistic)) throw Error(ErrorCode::numerical, "ADF statistic is not finite");
    out.stationary_at_5pct = out.statistic < kAdfCritical5pct;
    return out;
}

}  // namespace hybridcast::preprocess
