#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hybridcast/error.hpp"
#include "hybridcast/evaluate/metrics.hpp"
#include "hybridcast/models/model.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::evaluate {

struct CvSettings {
    std::size_t folds = 5;
    std::size_t horizon = 1;
};

/// Fold i trains on [0, train_length) and is scored on [train_length, test_end).
struct Fold {
    std::size_t train_length = 0;
    std::size_t test_end = 0;
};

/// Maps a training series and a horizon to point forecasts.
using Forecaster = std::function<std::vector<double>(const TimeSeries&, Horizon)>;

/// Expanding-window geometry: origins are evenly spaced by the horizon so
/// the last test window ends at the end of the series.
[[nodiscard]] inline std::vector<Fold> fold_geometry(std::size_t n, const CvSettings& settings, std::size_t min_train = 1) {
    if (settings.folds < 2) throw Error(ErrorCode::argument, "cross-validation needs at least 2 folds");
    if (settings.horizon < 1) throw Error(ErrorCode::argument, "cross-validation horizon must be at least 1");
    const std::size_t reserved = settings.folds * settings.horizon;
    const std::size_t needed = reserved + std::max<std::size_t>(min_train, 1);
    if (n < needed) {
        throw Error(ErrorCode::argument, std::to_string(settings.folds) + " folds of horizon " + std::to_string(settings.horizon) +
                                             " need a series of at least " + std::to_string(needed) + " points, got " +
                                             std::to_string(n));
    }
    std::vector<Fold> folds;
    for (std::size_t i = 0; i < settings.folds; ++i) {
        const std::size_t train = n - (settings.folds - i) * settings.horizon;
        folds.push_back({train, train + settings.horizon});
    }
    return folds;
}

struct FoldResult {
    Fold fold;
    Timestamp train_end = 0;
    Timestamp test_start = 0;
    MetricSet metrics;
    std::vector<double> actual;
    std::vector<double> predicted;
};

/// Result of evaluating one model. On failure `error` is set and the
/// metrics are empty.
struct EvaluationReport {
    std::string model;
    std::string spec_digest;
    std::vector<FoldResult> folds;
    MetricSet pooled;
    double wall_clock_seconds = 0.0;
    std::optional<std::string> error;
    std::optional<ErrorCode> error_code;

    [[nodiscard]] bool ok() const { return !error.has_value(); }
};

/// Rolling-origin evaluation of an arbitrary forecaster. Exceptions from
/// the forecaster propagate.
[[nodiscard]] inline EvaluationReport rolling_origin_cv(const TimeSeries& series, const Forecaster& forecaster,
                                                       const CvSettings& settings, std::size_t min_train = 1,
                                                       std::string model = "custom", std::string digest = {}) {
    if (series.has_missing()) throw Error(ErrorCode::data, "series has missing values; impute before evaluation");
    const auto geometry = fold_geometry(series.size(), settings, min_train);
    const auto started = std::chrono::steady_clock::now();
    EvaluationReport report;
    report.model = std::move(model);
    report.spec_digest = std::move(digest);
    detail::Accumulator pooled;
    for (const auto& fold : geometry) {
        const auto train = series.slice(0, fold.train_length);
        auto predicted = forecaster(train, Horizon{settings.horizon});
        if (predicted.size() != settings.horizon) {
            throw Error(ErrorCode::fit_failure, "forecaster returned " + std::to_string(predicted.size()) + " points, expected " +
                                                    std::to_string(settings.horizon));
        }
        FoldResult fr;
        fr.fold = fold;
        fr.train_end = series.timestamp(fold.train_length - 1);
        fr.test_start = series.timestamp(fold.train_length);
        const auto v = series.values();
        fr.actual.assign(v.begin() + static_cast<std::ptrdiff_t>(fold.train_length), v.begin() + static_cast<std::ptrdiff_t>(fold.test_end));
        fr.predicted = std::move(predicted);
        fr.metrics = metrics(fr.actual, fr.predicted);
        for (std::size_t h = 0; h < fr.actual.size(); ++h) pooled.add(fr.actual[h], fr.predicted[h]);
        report.folds.push_back(std::move(fr));
    }
    report.pooled = pooled.finish();
    report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

/// Forecaster that refits `spec` on every training segment.
[[nodiscard]] inline Forecaster spec_forecaster(const ModelSpec& spec, std::uint64_t seed = 20240607) {
    return [spec, seed](const TimeSeries& train, Horizon h) {
        const auto fitted = fit_model(train, spec, seed);
        return forecast(fitted, h, 0.95).points();
    };
}

[[nodiscard]] inline EvaluationReport rolling_origin_cv(const TimeSeries& series, const ModelSpec& spec, const CvSettings& settings,
                                                       std::uint64_t seed = 20240607) {
    validate(spec);
    return rolling_origin_cv(series, spec_forecaster(spec, seed), settings, minimum_length(spec), describe(spec), spec_digest(spec));
}

inline nlohmann::json to_json(const FoldResult& f) {
    return {{"train_length", f.fold.train_length},
            {"test_length", f.fold.test_end - f.fold.train_length},
            {"train_end", format_timestamp(f.train_end)},
            {"test_start", format_timestamp(f.test_start)},
            {"metrics", to_json(f.metrics)},
            {"actual", f.actual},
            {"predicted", f.predicted}};
}

inline nlohmann::json to_json(const EvaluationReport& r, bool include_timing = false) {
    nlohmann::json j{{"model", r.model}, {"spec_digest", r.spec_digest}, {"ok", r.ok()}};
    if (r.ok()) {
        j["metrics"] = to_json(r.pooled);
        nlohmann::json folds = nlohmann::json::array();
        for (const auto& f : r.folds) folds.push_back(to_json(f));
        j["folds"] = folds;
    } else {
        j["error"] = {{"code", std::string(to_string(*r.error_code))}, {"message", *r.error}};
    }
    if (include_timing) j["wall_clock_seconds"] = r.wall_clock_seconds;
    return j;
}

}  // namespace hybridcast::evaluate
