#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hybridcast/error.hpp"
#include "hybridcast/preprocess/impute.hpp"
#include "hybridcast/preprocess/outliers.hpp"
#include "hybridcast/preprocess/transforms.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::preprocess {

/// One step of a caller-composed preprocessing pipeline.
struct PipelineStep {
    enum class Op { impute, outliers, log, difference, normalize } op = Op::impute;
    ImputeMethod impute = ImputeMethod::linear_interpolation;
    OutlierMethod detector = OutlierMethod::zscore(3.0);
    ReplaceStrategy strategy = ReplaceStrategy::interpolate();
    std::size_t lag = 1;
    NormalizeMethod normalize = NormalizeMethod::minmax;

    [[nodiscard]] bool invertible() const { return op == Op::log || op == Op::difference || op == Op::normalize; }
};

[[nodiscard]] inline std::pair<TimeSeries, TransformRecord> apply_step(const TimeSeries& series, const PipelineStep& step) {
    switch (step.op) {
        case PipelineStep::Op::impute: {
            std::size_t filled = 0;
            for (double v : series.values()) filled += is_missing(v) ? 1 : 0;
            return {impute_missing(series, step.impute), ImputeRecord{to_string(step.impute), filled}};
        }
        case PipelineStep::Op::outliers: {
            auto idx = detect_outliers(series, step.detector);
            auto cleaned = replace_outliers(series, idx, step.strategy);
            return {std::move(cleaned), OutlierRecord{step.detector.describe(), step.strategy.describe(), std::move(idx)}};
        }
        case PipelineStep::Op::log:
            if (series.has_missing()) throw Error(ErrorCode::argument, "log transform needs a series without missing values");
            return log_transform(series);
        case PipelineStep::Op::difference:
            if (series.has_missing()) throw Error(ErrorCode::argument, "differencing needs a series without missing values");
            return difference(series, step.lag);
        case PipelineStep::Op::normalize:
            return normalize(series, step.normalize);
    }
    throw Error(ErrorCode::argument, "unknown pipeline step");
}

struct PipelineResult {
    TimeSeries series;
    std::vector<TransformRecord> records;
};

/// Applies steps in order. Failures are rethrown with the failing step's
/// index attached.
[[nodiscard]] inline PipelineResult apply_pipeline(const TimeSeries& series, const std::vector<PipelineStep>& steps) {
    PipelineResult out{series, {}};
    for (std::size_t k = 0; k < steps.size(); ++k) {
        try {
            auto [next, rec] = apply_step(out.series, steps[k]);
            out.series = std::move(next);
            out.records.push_back(std::move(rec));
        } catch (const Error& e) {
            throw Error(e.code(), "step " + std::to_string(k) + ": " + e.what(), k);
        }
    }
    return out;
}

/// Maps forecast values back through every record, last step first.
[[nodiscard]] inline std::vector<double> invert_pipeline(std::vector<double> values, const std::vector<TransformRecord>& records) {
    for (auto it = records.rbegin(); it != records.rend(); ++it) values = invert_forecast_values(values, *it);
    return values;
}

/// Monotone increasing inverses (log, normalize) preserve interval bounds;
/// a difference step does not.
[[nodiscard]] inline bool bounds_survive(const std::vector<TransformRecord>& records) {
    for (const auto& r : records) {
        if (std::holds_alternative<DifferenceRecord>(r)) return false;
        if (const auto* n = std::get_if<NormalizeRecord>(&r); n && n->scale <= 0.0) return false;
    }
    return true;
}

// ---------------------------------------------------------------- JSON

inline nlohmann::json to_json(const PipelineStep& s) {
    using Op = PipelineStep::Op;
    switch (s.op) {
        case Op::impute: return {{"op", "impute"}, {"method", to_string(s.impute)}};
        case Op::outliers: {
            nlohmann::json j{{"op", "outliers"},
                             {"detector", s.detector.kind == OutlierMethod::Kind::zscore ? "zscore" : "iqr"},
                             {"parameter", s.detector.parameter},
                             {"strategy", s.strategy.kind == ReplaceStrategy::Kind::interpolate ? "interpolate" : "clip_to_bound"}};
            if (s.strategy.kind == ReplaceStrategy::Kind::clip_to_bound) {
                j["bound"] = s.strategy.bound.kind == OutlierMethod::Kind::zscore ? "zscore" : "iqr";
                j["bound_parameter"] = s.strategy.bound.parameter;
            }
            return j;
        }
        case Op::log: return {{"op", "log"}};
        case Op::difference: return {{"op", "difference"}, {"lag", s.lag}};
        case Op::normalize: return {{"op", "normalize"}, {"method", s.normalize == NormalizeMethod::minmax ? "minmax" : "zscore"}};
    }
    return {};
}

inline PipelineStep pipeline_step_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("op") || !j.at("op").is_string()) {
        throw Error(ErrorCode::argument, "pipeline step needs a string 'op'");
    }
    PipelineStep s;
    const auto op = j.at("op").get<std::string>();
    auto method_of = [&](const char* key, const char* fallback) {
        const auto& v = j.contains(key) ? j.at(key) : nlohmann::json(fallback);
        if (!v.is_string()) throw Error(ErrorCode::argument, std::string("'") + key + "' must be a string");
        return v.get<std::string>();
    };
    auto number_of = [&](const char* key, double fallback) {
        if (!j.contains(key)) return fallback;
        if (!j.at(key).is_number()) throw Error(ErrorCode::argument, std::string("'") + key + "' must be a number");
        return j.at(key).get<double>();
    };
    auto detector_of = [&](const std::string& kind, double param) {
        if (kind == "zscore") return OutlierMethod::zscore(param);
        if (kind == "iqr") return OutlierMethod::iqr(param);
        throw Error(ErrorCode::argument, "unknown outlier detector '" + kind + "'");
    };
    if (op == "impute") {
        s.op = PipelineStep::Op::impute;
        const auto m = method_of("method", "linear_interpolation");
        if (m == "linear_interpolation") s.impute = ImputeMethod::linear_interpolation;
        else if (m == "forward_fill") s.impute = ImputeMethod::forward_fill;
        else throw Error(ErrorCode::argument, "unknown impute method '" + m + "'");
    } else if (op == "outliers") {
        s.op = PipelineStep::Op::outliers;
        const auto det = method_of("detector", "zscore");
        s.detector = detector_of(det, number_of("parameter", det == "zscore" ? 3.0 : 1.5));
        const auto strat = method_of("strategy", "interpolate");
        if (strat == "interpolate") {
            s.strategy = ReplaceStrategy::interpolate();
        } else if (strat == "clip_to_bound") {
            const auto bound = method_of("bound", "iqr");
            s.strategy = ReplaceStrategy::clip_to_bound(detector_of(bound, number_of("bound_parameter", bound == "zscore" ? 3.0 : 1.5)));
        } else {
            throw Error(ErrorCode::argument, "unknown outlier strategy '" + strat + "'");
        }
    } else if (op == "log") {
        s.op = PipelineStep::Op::log;
    } else if (op == "difference") {
        s.op = PipelineStep::Op::difference;
        const double lag = number_of("lag", 1.0);
        if (!(lag >= 1.0) || lag != std::floor(lag)) throw Error(ErrorCode::argument, "difference lag must be a positive integer");
        s.lag = static_cast<std::size_t>(lag);
    } else if (op == "normalize") {
        s.op = PipelineStep::Op::normalize;
        const auto m = method_of("method", "minmax");
        if (m == "minmax") s.normalize = NormalizeMethod::minmax;
        else if (m == "zscore") s.normalize = NormalizeMethod::zscore;
        else throw Error(ErrorCode::argument, "unknown normalize method '" + m + "'");
    } else {
        throw Error(ErrorCode::argument, "unknown pipeline op '" + op + "'");
    }
    return s;
}

inline std::vector<PipelineStep> pipeline_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw Error(ErrorCode::argument, "pipeline must be an array of steps");
    std::vector<PipelineStep> steps;
    for (std::size_t k = 0; k < j.size(); ++k) {
        try {
            steps.push_back(pipeline_step_from_json(j[k]));
        } catch (const Error& e) {
            throw Error(e.code(), "step " + std::to_string(k) + ": " + e.what(), k);
        }
    }
    return steps;
}

}  // namespace hybridcast::preprocess
