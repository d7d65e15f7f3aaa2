#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "hybridcast/error.hpp"

namespace hybridcast::evaluate {

/// Accuracy summary over a set of (actual, predicted) pairs. `mape` is
/// empty when every actual is zero.
struct MetricSet {
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
    std::optional<double> mape;
    std::size_t n = 0;
    std::size_t mape_excluded = 0;
};

namespace detail {

struct Accumulator {
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    double pct_sum = 0.0;
    std::size_t n = 0;
    std::size_t pct_n = 0;
    std::size_t excluded = 0;

    void add(double actual, double predicted) {
        const double e = actual - predicted;
        abs_sum += std::abs(e);
        sq_sum += e * e;
        ++n;
        if (actual == 0.0) {
            ++excluded;
        } else {
            pct_sum += std::abs(e) / std::abs(actual);
            ++pct_n;
        }
    }

    [[nodiscard]] MetricSet finish() const {
        MetricSet m;
        m.n = n;
        m.mape_excluded = excluded;
        if (n == 0) return m;
        const double count = static_cast<double>(n);
        m.mae = abs_sum / count;
        m.mse = sq_sum / count;
        m.rmse = std::sqrt(m.mse);
        if (pct_n > 0) m.mape = 100.0 * pct_sum / static_cast<double>(pct_n);
        return m;
    }
};

}  // namespace detail

/// MAE, MSE, RMSE and MAPE. Zero actuals are skipped for MAPE and counted.
[[nodiscard]] inline MetricSet metrics(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) {
        throw Error(ErrorCode::argument, "metrics: " + std::to_string(actual.size()) + " actuals vs " +
                                             std::to_string(predicted.size()) + " predictions");
    }
    if (actual.empty()) throw Error(ErrorCode::argument, "metrics: empty input");
    detail::Accumulator acc;
    for (std::size_t i = 0; i < actual.size(); ++i) acc.add(actual[i], predicted[i]);
    const auto m = acc.finish();
    if (!std::isfinite(m.mse)) throw Error(ErrorCode::numerical, "metrics: non-finite error");
    return m;
}

inline nlohmann::json to_json(const MetricSet& m) {
    return {{"mae", m.mae},
            {"mse", m.mse},
            {"rmse", m.rmse},
            {"mape", m.mape ? nlohmann::json(*m.mape) : nlohmann::json(nullptr)},
            {"n", m.n},
            {"mape_excluded", m.mape_excluded}};
}

}  // namespace hybridcast::evaluate
