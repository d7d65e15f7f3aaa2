#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridcast/error.hpp"
#include "hybridcast/models/model.hpp"
#include "hybridcast/numeric/stats.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::evaluate {

enum class Direction { spike, drop };

struct AnomalyEvent {
    std::size_t index = 0;
    Timestamp timestamp = 0;
    double observed = 0.0;
    double expected = 0.0;
    double score = 0.0;
    Direction direction = Direction::spike;
};

/// Flags points whose one-step residual, scaled by 1.4826 * MAD of all
/// residuals, reaches `threshold` in absolute value. Positions without a
/// prediction are skipped. A zero scale yields no events.
[[nodiscard]] inline std::vector<AnomalyEvent> detect_anomalies(const TimeSeries& series,
                                                                const std::vector<std::optional<double>>& predictions,
                                                                double threshold) {
    if (!(threshold > 0.0)) throw Error(ErrorCode::argument, "anomaly threshold must be positive");
    if (predictions.size() != series.size()) throw Error(ErrorCode::argument, "predictions do not align with the series");
    std::vector<std::size_t> where;
    std::vector<double> residuals;
    for (std::size_t t = 0; t < series.size(); ++t) {
        if (predictions[t] && !is_missing(series[t])) {
            where.push_back(t);
            residuals.push_back(series[t] - *predictions[t]);
        }
    }
    std::vector<AnomalyEvent> events;
    if (residuals.empty()) return events;
    const double scale = stats::mad_scale(residuals);
    if (!(scale > 0.0) || !std::isfinite(scale)) return events;
    for (std::size_t k = 0; k < residuals.size(); ++k) {
        const double score = residuals[k] / scale;
        if (std::abs(score) >= threshold) {
            const auto t = where[k];
            events.push_back({t, series.timestamp(t), series[t], *predictions[t], score,
                              series[t] > *predictions[t] ? Direction::spike : Direction::drop});
        }
    }
    return events;
}

[[nodiscard]] inline std::vector<AnomalyEvent> detect_anomalies(const TimeSeries& series, const FittedModel& model, double threshold) {
    return detect_anomalies(series, one_step_predictions(model, series), threshold);
}

inline nlohmann::json to_json(const AnomalyEvent& e) {
    return {{"index", e.index},
            {"timestamp", format_timestamp(e.timestamp)},
            {"observed", e.observed},
            {"expected", e.expected},
            {"score", e.score},
            {"direction", e.direction == Direction::spike ? "spike" : "drop"}};
}

}  // namespace hybridcast::evaluate
