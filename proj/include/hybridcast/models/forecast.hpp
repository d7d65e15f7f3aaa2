#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridcast/error.hpp"
#include "hybridcast/numeric/normal.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast {

struct ForecastStep {
    Timestamp timestamp = 0;
    double point = 0.0;
    std::optional<double> lower;
    std::optional<double> upper;
};

/// Point forecasts over a horizon. `intervals_available` is false for
/// models that do not produce prediction intervals; the bounds are then empty.
struct Forecast {
    Timestamp origin = 0;
    double confidence = 0.95;
    bool intervals_available = false;
    std::string spec_digest;
    std::vector<ForecastStep> steps;

    [[nodiscard]] std::vector<double> points() const {
        std::vector<double> out;
        out.reserve(steps.size());
        for (const auto& s : steps) out.push_back(s.point);
        return out;
    }
};

inline void validate_confidence(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw Error(ErrorCode::argument, "confidence must lie in (0,1)");
}

/// Builds steps continuing the grid after `origin`. When half-widths are
/// given, bounds are point -/+ half-width.
[[nodiscard]] inline Forecast make_forecast(Timestamp origin, std::int64_t frequency, std::span<const double> points,
                                            std::optional<std::span<const double>> half_widths, double confidence) {
    Forecast fc;
    fc.origin = origin;
    fc.confidence = confidence;
    fc.intervals_available = half_widths.has_value();
    for (std::size_t h = 0; h < points.size(); ++h) {
        ForecastStep step;
        step.timestamp = origin + static_cast<Timestamp>(h + 1) * frequency;
        step.point = points[h];
        if (half_widths) {
            step.lower = points[h] - (*half_widths)[h];
            step.upper = points[h] + (*half_widths)[h];
        }
        fc.steps.push_back(step);
    }
    return fc;
}

/// z_{(1+confidence)/2}
[[nodiscard]] inline double interval_multiplier(double confidence) {
    validate_confidence(confidence);
    return stats::normal_quantile(0.5 * (1.0 + confidence));
}

inline nlohmann::json to_json(const Forecast& fc) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : fc.steps) {
        nlohmann::json j{{"timestamp", format_timestamp(s.timestamp)}, {"point", s.point}};
        j["lower"] = s.lower ? nlohmann::json(*s.lower) : nlohmann::json(nullptr);
        j["upper"] = s.upper ? nlohmann::json(*s.upper) : nlohmann::json(nullptr);
        steps.push_back(std::move(j));
    }
    return {{"origin", format_timestamp(fc.origin)},
            {"confidence", fc.confidence},
            {"intervals_available", fc.intervals_available},
            {"spec_digest", fc.spec_digest},
            {"steps", std::move(steps)}};
}

}  // namespace hybridcast
