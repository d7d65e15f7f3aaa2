#pragma once

#include <algorithm>
#include <future>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "hybridcast/error.hpp"
#include "hybridcast/evaluate/cv.hpp"
#include "hybridcast/models/model.hpp"

namespace hybridcast::evaluate {

/// A named forecaster taking part in a comparison.
struct Candidate {
    std::string label;
    std::string digest;
    Forecaster forecaster;
    std::size_t min_train = 1;
};

struct CompareOptions {
    /// Evaluate candidates on separate threads. Ranking does not depend on it.
    bool parallel = false;
    std::uint64_t seed = 20240607;
};

namespace detail {

inline EvaluationReport evaluate_candidate(const TimeSeries& series, const Candidate& c, const CvSettings& settings) {
    try {
        return rolling_origin_cv(series, c.forecaster, settings, c.min_train, c.label, c.digest);
    } catch (const Error& e) {
        EvaluationReport r;
        r.model = c.label;
        r.spec_digest = c.digest;
        r.error = e.what();
        r.error_code = e.code();
        return r;
    } catch (const std::exception& e) {
        EvaluationReport r;
        r.model = c.label;
        r.spec_digest = c.digest;
        r.error = e.what();
        r.error_code = ErrorCode::fit_failure;
        return r;
    }
}

/// Pooled MAPE, then pooled RMSE, then digest, then label. Failures last.
inline auto rank_key(const EvaluationReport& r) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const bool failed = !r.ok();
    const double mape = failed ? inf : r.pooled.mape.value_or(inf);
    const double rmse = failed ? inf : r.pooled.rmse;
    return std::make_tuple(failed, mape, rmse, r.spec_digest, r.model);
}

}  // namespace detail

/// Leaderboard over arbitrary candidates evaluated on identical folds.
[[nodiscard]] inline std::vector<EvaluationReport> compare_candidates(const TimeSeries& series, const std::vector<Candidate>& candidates,
                                                                      const CvSettings& settings, bool parallel = false) {
    if (candidates.empty()) throw Error(ErrorCode::argument, "comparison needs at least one model");
    // Geometry is fixed up front so every candidate sees the same folds.
    (void)fold_geometry(series.size(), settings, 1);
    std::vector<EvaluationReport> reports(candidates.size());
    if (parallel && candidates.size() > 1) {
        std::vector<std::future<EvaluationReport>> pending;
        for (const auto& c : candidates) {
            pending.push_back(std::async(std::launch::async, [&series, &c, &settings] { return detail::evaluate_candidate(series, c, settings); }));
        }
        for (std::size_t i = 0; i < pending.size(); ++i) reports[i] = pending[i].get();
    } else {
        for (std::size_t i = 0; i < candidates.size(); ++i) reports[i] = detail::evaluate_candidate(series, candidates[i], settings);
    }
    std::stable_sort(reports.begin(), reports.end(),
                     [](const EvaluationReport& a, const EvaluationReport& b) { return detail::rank_key(a) < detail::rank_key(b); });
    if (std::none_of(reports.begin(), reports.end(), [](const auto& r) { return r.ok(); })) {
        std::string causes;
        for (const auto& r : reports) causes += "\n  " + r.model + ": " + *r.error;
        throw Error(ErrorCode::comparison, "every model failed:" + causes);
    }
    return reports;
}

/// Rolling-origin comparison of model specs, ranked best first.
[[nodiscard]] inline std::vector<EvaluationReport> compare_models(const TimeSeries& series, const std::vector<ModelSpec>& specs,
                                                                  const CvSettings& settings, const CompareOptions& options = {}) {
    if (specs.empty()) throw Error(ErrorCode::argument, "comparison needs at least one model spec");
    if (series.has_missing()) throw Error(ErrorCode::data, "series has missing values; impute before comparing");
    std::vector<Candidate> candidates;
    for (const auto& s : specs) {
        validate(s);
        candidates.push_back({describe(s), spec_digest(s), spec_forecaster(s, options.seed), minimum_length(s)});
    }
    return compare_candidates(series, candidates, settings, options.parallel);
}

inline nlohmann::json leaderboard_json(const std::vector<EvaluationReport>& reports, const CvSettings& settings,
                                       bool include_timing = false) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        auto j = to_json(reports[i], include_timing);
        j["rank"] = i + 1;
        rows.push_back(std::move(j));
    }
    return {{"cv", {{"folds", settings.folds}, {"horizon", settings.horizon}}}, {"leaderboard", rows}};
}

}  // namespace hybridcast::evaluate
