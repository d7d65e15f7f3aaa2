#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hybridcast/evaluate/anomaly.hpp"
#include "hybridcast/evaluate/compare.hpp"
#include "hybridcast/evaluate/cv.hpp"
#include "hybridcast/evaluate/metrics.hpp"
#include "hybridcast/evaluate/report.hpp"
#include "hybridcast/synth.hpp"

using namespace hybridcast;
using namespace hybridcast::evaluate;

namespace {

TimeSeries series_of(std::vector<double> v) { return TimeSeries(0, 60, std::move(v)); }

ModelSpec spec(const char* text) { return model_spec_from_json(nlohmann::json::parse(text)); }

Forecaster naive() {
    return [](const TimeSeries& train, Horizon h) { return std::vector<double>(h.steps, train[train.size() - 1]); };
}

Forecaster peeking(const TimeSeries& full) {
    return [full](const TimeSeries& train, Horizon h) {
        const auto v = full.values();
        return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(train.size()),
                                   v.begin() + static_cast<std::ptrdiff_t>(train.size() + h.steps));
    };
}

}  // namespace

// ---------------------------------------------------------------- metrics

TEST(Metrics, HandExample) {
    const std::vector<double> a{1, 2, 4}, p{1, 3, 2};
    const auto m = metrics(a, p);
    EXPECT_DOUBLE_EQ(m.mae, 1.0);
    EXPECT_DOUBLE_EQ(m.mse, 5.0 / 3.0);
    EXPECT_DOUBLE_EQ(m.rmse, std::sqrt(5.0 / 3.0));
    EXPECT_DOUBLE_EQ(*m.mape, 100.0 * (0.5 + 0.5) / 3.0);
    EXPECT_EQ(m.n, 3u);
}

TEST(Metrics, ZeroActualsAreLeftOutOfMape) {
    const std::vector<double> a{0, 2}, p{1, 1};
    const auto m = metrics(a, p);
    EXPECT_DOUBLE_EQ(*m.mape, 50.0);
    EXPECT_EQ(m.mape_excluded, 1u);
    const std::vector<double> zeros{0, 0};
    EXPECT_FALSE(metrics(zeros, p).mape.has_value());
}

TEST(Metrics, InputErrors) {
    const std::vector<double> a{1, 2}, p{1};
    EXPECT_THROW((void)metrics(a, p), Error);
    EXPECT_THROW((void)metrics(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST(Metrics, Properties) {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> e(0.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(1 + rng() % 40), p;
        for (auto& v : a) v = 50.0 + e(rng);
        for (double v : a) p.push_back(v + e(rng));
        const auto m = metrics(a, p);
        EXPECT_GE(m.rmse + 1e-12, m.mae);
        EXPECT_NEAR(m.rmse * m.rmse, m.mse, 1e-9 * m.mse);
        const auto same = metrics(a, a);
        EXPECT_EQ(same.mae, 0.0);
        EXPECT_EQ(*same.mape, 0.0);
        // Symmetric in the sign of the error.
        std::vector<double> mirrored;
        for (std::size_t i = 0; i < a.size(); ++i) mirrored.push_back(2.0 * a[i] - p[i]);
        EXPECT_NEAR(metrics(a, mirrored).mse, m.mse, 1e-9 * std::max(1.0, m.mse));
    }
}

// ---------------------------------------------------------------- cv

TEST(Cv, FoldGeometry) {
    const auto folds = fold_geometry(10, {2, 2});
    ASSERT_EQ(folds.size(), 2u);
    EXPECT_EQ(folds[0].train_length, 6u);
    EXPECT_EQ(folds[0].test_end, 8u);
    EXPECT_EQ(folds[1].train_length, 8u);
    EXPECT_EQ(folds[1].test_end, 10u);
}

TEST(Cv, TooShortNamesTheMinimum) {
    try {
        (void)fold_geometry(20, {5, 4}, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::argument);
        EXPECT_NE(std::string(e.what()).find("at least 23"), std::string::npos) << e.what();
    }
    EXPECT_THROW((void)fold_geometry(100, {1, 1}), Error);
}

TEST(Cv, ForecasterNeverSeesTheFuture) {
    std::vector<double> v(40);
    for (std::size_t t = 0; t < v.size(); ++t) v[t] = static_cast<double>(t * t);
    const auto s = series_of(v);
    std::vector<std::size_t> seen;
    const Forecaster spy = [&](const TimeSeries& train, Horizon h) {
        seen.push_back(train.size());
        for (std::size_t t = 0; t < train.size(); ++t) EXPECT_EQ(train[t], v[t]);
        return std::vector<double>(h.steps, 0.0);
    };
    const auto report = rolling_origin_cv(s, spy, {4, 3});
    EXPECT_EQ(seen, (std::vector<std::size_t>{28, 31, 34, 37}));
    for (const auto& f : report.folds) {
        EXPECT_LT(f.train_end, f.test_start);
        EXPECT_EQ(f.actual.size(), 3u);
    }
}

TEST(Cv, OracleForecasterScoresZero) {
    const auto s = synth::seasonal({.n = 80});
    const auto report = rolling_origin_cv(s, peeking(s), {5, 4});
    EXPECT_EQ(report.pooled.mae, 0.0);
    EXPECT_EQ(report.pooled.n, 20u);
}

TEST(Cv, WrongForecastLengthIsFitFailure) {
    const Forecaster bad = [](const TimeSeries&, Horizon) { return std::vector<double>{1.0}; };
    try {
        (void)rolling_origin_cv(series_of(std::vector<double>(30, 1.0)), bad, {2, 3});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::fit_failure);
    }
}

TEST(Cv, PooledMetricsMatchConcatenatedFolds) {
    const auto s = synth::seasonal({.n = 90, .seed = 5});
    const auto report = rolling_origin_cv(s, naive(), {3, 6});
    std::vector<double> a, p;
    for (const auto& f : report.folds) {
        a.insert(a.end(), f.actual.begin(), f.actual.end());
        p.insert(p.end(), f.predicted.begin(), f.predicted.end());
    }
    const auto m = metrics(a, p);
    EXPECT_DOUBLE_EQ(report.pooled.mae, m.mae);
    EXPECT_DOUBLE_EQ(report.pooled.rmse, m.rmse);
}

// ---------------------------------------------------------------- compare

TEST(Compare, OracleBeatsNaive) {
    const auto s = synth::seasonal({.n = 100});
    const auto reports = compare_candidates(s, {{"naive", "d1", naive(), 1}, {"oracle", "d2", peeking(s), 1}}, {4, 3});
    EXPECT_EQ(reports[0].model, "oracle");
    EXPECT_EQ(reports[1].model, "naive");
}

TEST(Compare, TiesFallBackToDigest) {
    const auto s = synth::seasonal({.n = 60});
    const auto reports = compare_candidates(s, {{"first", "bbb", naive(), 1}, {"second", "aaa", naive(), 1}}, {3, 2});
    EXPECT_EQ(reports[0].spec_digest, "aaa");
    EXPECT_EQ(reports[1].spec_digest, "bbb");
}

TEST(Compare, RankingDoesNotDependOnInputOrderOrThreads) {
    const auto s = synth::seasonal({.n = 96, .seed = 8});
    std::vector<ModelSpec> specs{spec(R"({"family":"arima","order":{"p":1,"d":1,"q":0}})"),
                                 spec(R"({"family":"ets","ets":{"trend":"additive","seasonal":"additive","period":12}})"),
                                 spec(R"({"family":"ets","ets":{"trend":"none","seasonal":"none"}})")};
    auto names = [](const std::vector<EvaluationReport>& r) {
        std::vector<std::string> out;
        for (const auto& x : r) out.push_back(x.model);
        return out;
    };
    const auto base = names(compare_models(s, specs, {3, 6}));
    std::reverse(specs.begin(), specs.end());
    EXPECT_EQ(names(compare_models(s, specs, {3, 6})), base);
    EXPECT_EQ(names(compare_models(s, specs, {3, 6}, {.parallel = true})), base);
}

TEST(Compare, SeasonalArimaBeatsPlainArimaOnSeasonalData) {
    const auto s = synth::seasonal({});
    const auto reports = compare_models(
        s,
        {spec(R"({"family":"arima","order":{"p":1,"d":1,"q":1}})"),
         spec(R"({"family":"sarima","order":{"p":1,"d":1,"q":1},"seasonal_order":{"P":1,"D":1,"Q":1,"s":12}})")},
        {5, 12});
    EXPECT_EQ(reports[0].model, "SARIMA(1,1,1)(1,1,1)_12");
    EXPECT_LT(*reports[0].pooled.mape, *reports[1].pooled.mape);
}

TEST(Compare, FailuresRankLastAndAllFailingThrows) {
    const auto s = synth::seasonal({.n = 40});
    const Forecaster broken = [](const TimeSeries&, Horizon) -> std::vector<double> {
        throw Error(ErrorCode::fit_failure, "no");
    };
    const auto reports = compare_candidates(s, {{"broken", "a", broken, 1}, {"naive", "b", naive(), 1}}, {2, 2});
    EXPECT_EQ(reports[0].model, "naive");
    EXPECT_FALSE(reports[1].ok());
    EXPECT_EQ(reports[1].error_code, ErrorCode::fit_failure);
    try {
        (void)compare_candidates(s, {{"broken", "a", broken, 1}}, {2, 2});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::comparison);
    }
}

TEST(Compare, LeaderboardJsonHasRanks) {
    const auto s = synth::seasonal({.n = 50});
    const auto reports = compare_candidates(s, {{"naive", "d1", naive(), 1}, {"oracle", "d2", peeking(s), 1}}, {2, 2});
    const auto j = leaderboard_json(reports, {2, 2});
    EXPECT_EQ(j["cv"]["folds"], 2);
    EXPECT_EQ(j["leaderboard"][0]["rank"], 1);
    EXPECT_EQ(j["leaderboard"][1]["model"], "naive");
    EXPECT_FALSE(j["leaderboard"][0].contains("wall_clock_seconds"));
}

// ---------------------------------------------------------------- anomalies

TEST(Anomaly, FlagsTheInjectedSpikeOnly) {
    const auto fixture = synth::traffic({});
    const auto fitted =
        fit_model(fixture.series, spec(R"({"family":"ets","ets":{"trend":"additive","seasonal":"additive","period":7}})"));
    const auto events = detect_anomalies(fixture.series, fitted, 4.0);
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].index, fixture.spike_indices.at(0));
    EXPECT_EQ(events[0].direction, Direction::spike);
    EXPECT_GE(events[0].score, 4.0);
}

TEST(Anomaly, CountShrinksAsThresholdGrows) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> e(0.0, 1.0);
    std::vector<double> v(300);
    std::vector<std::optional<double>> pred(300);
    for (std::size_t t = 0; t < v.size(); ++t) {
        v[t] = 10.0 + e(rng) * (t % 37 == 0 ? 6.0 : 1.0);
        pred[t] = 10.0;
    }
    std::size_t previous = v.size() + 1;
    for (double thr = 0.5; thr <= 8.0; thr += 0.5) {
        const auto n = detect_anomalies(series_of(v), pred, thr).size();
        EXPECT_LE(n, previous);
        previous = n;
    }
}

TEST(Anomaly, PerfectFitYieldsNothing) {
    const std::vector<double> v{1, 5, 2, 8, 3};
    std::vector<std::optional<double>> pred(v.begin(), v.end());
    EXPECT_TRUE(detect_anomalies(series_of(v), pred, 3.0).empty());
}

TEST(Anomaly, DropDirectionAndSkippedPositions) {
    std::vector<double> v;
    std::vector<std::optional<double>> pred;
    for (int t = 0; t < 20; ++t) {
        v.push_back(100.0 + static_cast<double>(t % 5) - 2.0);
        pred.push_back(100.0);
    }
    v[12] = 40.0;  // residual -60
    pred[0] = std::nullopt;
    const auto events = detect_anomalies(series_of(v), pred, 5.0);
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].index, 12u);
    EXPECT_EQ(events[0].direction, Direction::drop);
    EXPECT_EQ(events[0].expected, 100.0);
    // Remaining residuals are 19 values from {-2..2} plus -60: median 0, MAD 1.
    EXPECT_NEAR(events[0].score, -60.0 / 1.4826, 1e-3);
    EXPECT_THROW((void)detect_anomalies(series_of(v), pred, 0.0), Error);
}

// ---------------------------------------------------------------- report

TEST(Report, TableLayout) {
    EvaluationReport good;
    good.model = "ETS";
    good.pooled.mae = 1.5;
    good.pooled.mse = 2.25;
    good.pooled.rmse = 1.5;
    good.pooled.mape = 3.0;
    EvaluationReport bad;
    bad.model = "LSTM(x)";
    bad.error = "diverged";
    const auto table = leaderboard_table({good, bad});
    const std::string expected =
        "Model   |    MAE |  MSE | RMSE | MAPE\n"
        "--------+--------+------+------+-----\n"
        "ETS     |    1.5 | 2.25 |  1.5 |    3\n"
        "LSTM(x) | failed |    - |    - |    -\n"
        "! LSTM(x): diverged\n";
    EXPECT_EQ(table, expected);
}
