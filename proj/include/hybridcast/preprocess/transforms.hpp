#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hybridcast/error.hpp"
#include "hybridcast/numeric/stats.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::preprocess {

enum class NormalizeMethod { minmax, zscore };

struct LogRecord {
    friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

/// Keeps the first `lag` inputs for reconstruction and the last `lag`
/// inputs to continue a forecast made on the differenced scale.
struct DifferenceRecord {
    std::size_t lag = 1;
    std::size_t original_length = 0;
    std::vector<double> head;
    std::vector<double> tail;
    friend bool operator==(const DifferenceRecord&, const DifferenceRecord&) = default;
};

/// minmax: (x - offset) / scale with offset = min, scale = max - min.
/// zscore: offset = mean, scale = population std.
struct NormalizeRecord {
    NormalizeMethod method = NormalizeMethod::minmax;
    double offset = 0.0;
    double scale = 1.0;
    friend bool operator==(const NormalizeRecord&, const NormalizeRecord&) = default;
};

/// Non-invertible cleaning steps are recorded for lineage only.
struct ImputeRecord {
    std::string method;
    std::size_t filled = 0;
    friend bool operator==(const ImputeRecord&, const ImputeRecord&) = default;
};

struct OutlierRecord {
    std::string detector;
    std::string strategy;
    std::vector<std::size_t> indices;
    friend bool operator==(const OutlierRecord&, const OutlierRecord&) = default;
};

using TransformRecord = std::variant<LogRecord, DifferenceRecord, NormalizeRecord, ImputeRecord, OutlierRecord>;

[[nodiscard]] inline bool is_invertible(const TransformRecord& r) {
    return std::holds_alternative<LogRecord>(r) || std::holds_alternative<DifferenceRecord>(r) ||
           std::holds_alternative<NormalizeRecord>(r);
}

template <typename T>
std::pair<TimeSeries, TransformRecord> transformed(TimeSeries s, T record) {
    return {std::move(s), TransformRecord{std::move(record)}};
}

// ---------------------------------------------------------------- differencing

[[nodiscard]] inline std::vector<double> difference_values(std::span<const double> x, std::size_t lag) {
    if (lag == 0 || lag >= x.size()) {
        throw Error(ErrorCode::argument, "difference lag " + std::to_string(lag) + " needs a series longer than the lag");
    }
    std::vector<double> out(x.size() - lag);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = x[t + lag] - x[t];
    return out;
}

/// out[t] = x[t + lag] - x[t], stamped at the later timestamp.
[[nodiscard]] inline std::pair<TimeSeries, TransformRecord> difference(const TimeSeries& series, std::size_t lag) {
    auto diffed = difference_values(series.values(), lag);
    const auto x = series.values();
    DifferenceRecord rec{lag, x.size(), {x.begin(), x.begin() + static_cast<std::ptrdiff_t>(lag)},
                         {x.end() - static_cast<std::ptrdiff_t>(lag), x.end()}};
    return transformed(TimeSeries(series.timestamp(lag), series.frequency(), std::move(diffed), series.name()),
                       std::move(rec));
}

[[nodiscard]] inline std::vector<double> undifference_values(std::span<const double> diffed, const DifferenceRecord& rec) {
    if (rec.head.size() != rec.lag || diffed.size() + rec.lag != rec.original_length) {
        throw Error(ErrorCode::argument, "difference record does not match the differenced series");
    }
    std::vector<double> out(rec.head.begin(), rec.head.end());
    out.reserve(rec.original_length);
    for (std::size_t t = 0; t < diffed.size(); ++t) out.push_back(out[t] + diffed[t]);
    return out;
}

[[nodiscard]] inline TimeSeries undifference(const TimeSeries& diffed, const TransformRecord& record) {
    const auto* rec = std::get_if<DifferenceRecord>(&record);
    if (rec == nullptr) throw Error(ErrorCode::argument, "undifference needs a difference record");
    auto values = undifference_values(diffed.values(), *rec);
    return TimeSeries(diffed.start() - static_cast<Timestamp>(rec->lag) * diffed.frequency(), diffed.frequency(),
                      std::move(values), diffed.name());
}

/// Maps values forecast on the differenced scale back to levels that
/// continue the original series.
[[nodiscard]] inline std::vector<double> integrate_forecast(std::span<const double> diffed_forecast,
                                                            const DifferenceRecord& rec) {
    std::vector<double> history(rec.tail.begin(), rec.tail.end());
    std::vector<double> out;
    out.reserve(diffed_forecast.size());
    for (std::size_t h = 0; h < diffed_forecast.size(); ++h) {
        const double level = history[history.size() - rec.lag] + diffed_forecast[h];
        history.push_back(level);
        out.push_back(level);
    }
    return out;
}

// ---------------------------------------------------------------- log

[[nodiscard]] inline std::pair<TimeSeries, TransformRecord> log_transform(const TimeSeries& series) {
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!(series[i] > 0.0)) {
            throw Error(ErrorCode::domain, "log transform needs positive values; index " + std::to_string(i) + " is " +
                                               format_number(series[i]), i);
        }
        out[i] = std::log(series[i]);
    }
    return transformed(series.with_values(std::move(out)), LogRecord{});
}

[[nodiscard]] inline TimeSeries exp_inverse(const TimeSeries& logged) {
    std::vector<double> out(logged.values().begin(), logged.values().end());
    for (double& v : out) v = std::exp(v);
    return logged.with_values(std::move(out));
}

// ---------------------------------------------------------------- normalization

[[nodiscard]] inline std::pair<TimeSeries, TransformRecord> normalize(const TimeSeries& series, NormalizeMethod method) {
    if (series.size() < 2) throw Error(ErrorCode::argument, "normalization needs at least two points");
    if (series.has_missing()) throw Error(ErrorCode::argument, "normalization needs a series without missing values");
    const auto x = series.values();
    NormalizeRecord rec{method, 0.0, 1.0};
    if (method == NormalizeMethod::minmax) {
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        if (*hi == *lo) throw Error(ErrorCode::degenerate_range, "minmax normalization of a constant series");
        rec.offset = *lo;
        rec.scale = *hi - *lo;
    } else {
        rec.offset = stats::mean(x);
        rec.scale = stats::population_std(x);
        if (rec.scale == 0.0) throw Error(ErrorCode::degenerate_range, "zscore normalization of a constant series");
    }
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - rec.offset) / rec.scale;
    return transformed(series.with_values(std::move(out)), rec);
}

[[nodiscard]] inline double denormalize_value(double v, const NormalizeRecord& rec) { return v * rec.scale + rec.offset; }

[[nodiscard]] inline TimeSeries denormalize(const TimeSeries& normalized, const TransformRecord& record) {
    const auto* rec = std::get_if<NormalizeRecord>(&record);
    if (rec == nullptr) throw Error(ErrorCode::argument, "denormalize needs a normalize record");
    std::vector<double> out(normalized.values().begin(), normalized.values().end());
    for (double& v : out) v = denormalize_value(v, *rec);
    return normalized.with_values(std::move(out));
}

/// Inverts one record on a block of forecast values; cleaning records pass
/// values through unchanged.
[[nodiscard]] inline std::vector<double> invert_forecast_values(std::span<const double> values, const TransformRecord& record) {
    std::vector<double> out(values.begin(), values.end());
    std::visit(
        [&](const auto& rec) {
            using R = std::decay_t<decltype(rec)>;
            if constexpr (std::is_same_v<R, LogRecord>) {
                for (double& v : out) v = std::exp(v);
            } else if constexpr (std::is_same_v<R, NormalizeRecord>) {
                for (double& v : out) v = denormalize_value(v, rec);
            } else if constexpr (std::is_same_v<R, DifferenceRecord>) {
                out = integrate_forecast(values, rec);
            }
        },
        record);
    return out;
}

// ---------------------------------------------------------------- serialization

inline nlohmann::json to_json(const TransformRecord& record) {
    using nlohmann::json;
    return std::visit(
        [](const auto& rec) -> json {
            using R = std::decay_t<decltype(rec)>;
            if constexpr (std::is_same_v<R, LogRecord>) {
                return json{{"kind", "log"}};
            } else if constexpr (std::is_same_v<R, DifferenceRecord>) {
                return json{{"kind", "difference"}, {"lag", rec.lag}, {"original_length", rec.original_length},
                            {"head", rec.head},     {"tail", rec.tail}};
            } else if constexpr (std::is_same_v<R, NormalizeRecord>) {
                return json{{"kind", "normalize"},
                            {"method", rec.method == NormalizeMethod::minmax ? "minmax" : "zscore"},
                            {"offset", rec.offset},
                            {"scale", rec.scale}};
            } else if constexpr (std::is_same_v<R, ImputeRecord>) {
                return json{{"kind", "impute"}, {"method", rec.method}, {"filled", rec.filled}};
            } else {
                return json{{"kind", "outliers"}, {"detector", rec.detector}, {"strategy", rec.strategy},
                            {"indices", rec.indices}};
            }
        },
        record);
}

inline TransformRecord transform_from_json(const nlohmann::json& j) {
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "log") return LogRecord{};
        if (kind == "difference") {
            return DifferenceRecord{j.at("lag").get<std::size_t>(), j.at("original_length").get<std::size_t>(),
                                    j.at("head").get<std::vector<double>>(), j.at("tail").get<std::vector<double>>()};
        }
        if (kind == "normalize") {
            const auto m = j.at("method").get<std::string>();
            if (m != "minmax" && m != "zscore") throw Error(ErrorCode::argument, "unknown normalize method '" + m + "'");
            return NormalizeRecord{m == "minmax" ? NormalizeMethod::minmax : NormalizeMethod::zscore,
                                   j.at("offset").get<double>(), j.at("scale").get<double>()};
        }
        if (kind == "impute") return ImputeRecord{j.at("method").get<std::string>(), j.at("filled").get<std::size_t>()};
        if (kind == "outliers") {
            return OutlierRecord{j.at("detector").get<std::string>(), j.at("strategy").get<std::string>(),
                                 j.at("indices").get<std::vector<std::size_t>>()};
        }
        throw Error(ErrorCode::argument, "unknown transform kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::argument, std::string("malformed transform record: ") + e.what());
    }
}

}  // namespace hybridcast::preprocess
