#pragma once

#include <string>
#include <vector>

#include "hybridcast/error.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::preprocess {

enum class ImputeMethod { linear_interpolation, forward_fill };

[[nodiscard]] inline std::string to_string(ImputeMethod m) {
    return m == ImputeMethod::linear_interpolation ? "linear_interpolation" : "forward_fill";
}

/// Fills missing markers. Present values are never touched.
[[nodiscard]] inline TimeSeries impute_missing(const TimeSeries& series, ImputeMethod method) {
    std::vector<double> x(series.values().begin(), series.values().end());
    const std::size_t n = x.size();
    std::size_t first = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_missing(x[i])) {
            first = i;
            break;
        }
    }
    if (first == n) throw Error(ErrorCode::impute, "cannot impute an all-missing series");
    if (first != 0) {
        throw Error(ErrorCode::impute, to_string(method) + " needs the first value present (no predecessor for index 0)", 0);
    }

    if (method == ImputeMethod::forward_fill) {
        for (std::size_t i = 1; i < n; ++i) {
            if (is_missing(x[i])) x[i] = x[i - 1];
        }
        return series.with_values(std::move(x));
    }

    if (is_missing(x[n - 1])) {
        throw Error(ErrorCode::impute, "linear interpolation needs the last value present", n - 1);
    }
    std::size_t prev = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (is_missing(x[i])) continue;
        for (std::size_t k = prev + 1; k < i; ++k) {
            const double w = static_cast<double>(k - prev) / static_cast<double>(i - prev);
            x[k] = x[prev] + w * (x[i] - x[prev]);
        }
        prev = i;
    }
    return series.with_values(std::move(x));
}

}  // namespace hybridcast::preprocess
