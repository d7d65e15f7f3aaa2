#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "hybridcast/error.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::preprocess {

/// Row r describes time index `index[r]`; every feature is computed from
/// strictly earlier observations.
struct FeatureMatrix {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    std::vector<std::size_t> index;
};

/// Columns `lag_k` hold x[t-k]; columns `rollmean_w` hold the mean of
/// x[t-w .. t-1]. Rows whose features would reach before the series start
/// are dropped.
[[nodiscard]] inline FeatureMatrix make_features(const TimeSeries& series, const std::vector<std::size_t>& lags,
                                                 const std::vector<std::size_t>& rolling_windows) {
    if (lags.empty() && rolling_windows.empty()) throw Error(ErrorCode::argument, "no lags or rolling windows requested");
    if (series.has_missing()) throw Error(ErrorCode::argument, "feature construction needs a series without missing values");
    std::size_t reach = 0;
    for (auto k : lags) {
        if (k == 0) throw Error(ErrorCode::argument, "lags must be positive");
        reach = std::max(reach, k);
    }
    for (auto w : rolling_windows) {
        if (w == 0) throw Error(ErrorCode::argument, "rolling windows must be positive");
        reach = std::max(reach, w);
    }
    if (reach >= series.size()) {
        throw Error(ErrorCode::argument, "largest lag/window " + std::to_string(reach) + " needs more than " +
                                             std::to_string(series.size()) + " points");
    }

    FeatureMatrix fm;
    for (auto k : lags) fm.columns.push_back("lag_" + std::to_string(k));
    for (auto w : rolling_windows) fm.columns.push_back("rollmean_" + std::to_string(w));
    const auto x = series.values();
    for (std::size_t t = reach; t < x.size(); ++t) {
        std::vector<double> row;
        row.reserve(fm.columns.size());
        for (auto k : lags) row.push_back(x[t - k]);
        for (auto w : rolling_windows) {
            double sum = 0.0;
            for (std::size_t j = t - w; j < t; ++j) sum += x[j];
            row.push_back(sum / static_cast<double>(w));
        }
        fm.rows.push_back(std::move(row));
        fm.targets.push_back(x[t]);
        fm.index.push_back(t);
    }
    return fm;
}

}  // namespace hybridcast::preprocess
