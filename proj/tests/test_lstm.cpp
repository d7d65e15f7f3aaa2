#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hybridcast/models/lstm.hpp"

using namespace hybridcast;
using namespace hybridcast::lstm;

namespace {

LstmConfig small(std::size_t layers, std::size_t units, std::size_t window) {
    LstmConfig c;
    c.layers = layers;
    c.hidden_units = units;
    c.window = window;
    return c;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> sinusoid(std::size_t n, double period) {
    std::vector<double> v(n);
    for (std::size_t t = 0; t < n; ++t) v[t] = 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
    return v;
}

}  // namespace

TEST(Lstm, ZeroWeightsPredictZero) {
    const auto w = LstmWeights::zeros(small(2, 4, 5));
    EXPECT_EQ(forward(w, std::vector<double>{1, 2, 3, 4, 5}), 0.0);
}

TEST(Lstm, SingleUnitForwardByHand) {
    auto w = LstmWeights::zeros(small(1, 1, 2));
    auto& L = w.layers[0];
    // Rows: input, forget, output, candidate.
    L.W << 0.5, -0.3, 0.8, 1.2;
    L.U << 0.1, 0.2, -0.4, 0.7;
    L.b << 0.0, 1.0, 0.1, -0.2;
    w.head << 1.5;
    w.head_bias = 0.25;

    const std::vector<double> x{0.3, -0.6};
    double h = 0.0, c = 0.0;
    const double Wv[4] = {0.5, -0.3, 0.8, 1.2}, Uv[4] = {0.1, 0.2, -0.4, 0.7}, bv[4] = {0.0, 1.0, 0.1, -0.2};
    for (double xt : x) {
        const double i = sig(Wv[0] * xt + Uv[0] * h + bv[0]);
        const double f = sig(Wv[1] * xt + Uv[1] * h + bv[1]);
        const double o = sig(Wv[2] * xt + Uv[2] * h + bv[2]);
        const double g = std::tanh(Wv[3] * xt + Uv[3] * h + bv[3]);
        c = f * c + i * g;
        h = o * std::tanh(c);
    }
    EXPECT_NEAR(forward(w, x), 1.5 * h + 0.25, 1e-12);
}

TEST(Lstm, OrderOfTheWindowMatters) {
    std::mt19937_64 rng(1);
    const auto w = initialize(small(1, 8, 4), rng);
    EXPECT_NE(forward(w, std::vector<double>{0.1, 0.2, 0.3, 0.9}), forward(w, std::vector<double>{0.9, 0.3, 0.2, 0.1}));
}

TEST(Lstm, ShapeMismatchIsConfigurationError) {
    auto w = LstmWeights::zeros(small(1, 3, 2));
    w.layers[0].U.resize(2, 2);
    try {
        (void)forward(w, std::vector<double>{1, 2});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::configuration);
    }
}

TEST(Lstm, MakeWindows) {
    const std::vector<double> v{1, 2, 3, 4, 5};
    const auto pairs = make_windows(v, 3);
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].window, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(pairs[0].target, 4.0);
    EXPECT_EQ(pairs[1].target, 5.0);
}

TEST(Lstm, AnalyticGradientMatchesCentralDifferences) {
    std::mt19937_64 rng(7);
    for (std::size_t layers : {1u, 2u}) {
        const auto cfg = small(layers, 5, 6);
        const auto w = initialize(cfg, rng);
        const WindowPair pair{{0.1, 0.5, -0.2, 0.8, 0.3, 0.0}, 0.7};
        EXPECT_LE(gradient_check(w, pair, 1e-5), 1e-4) << layers << " layer(s)";
    }
}

TEST(Lstm, GradientCheckRejectsCoarseEpsilon) {
    std::mt19937_64 rng(7);
    const auto w = initialize(small(1, 2, 2), rng);
    try {
        (void)gradient_check(w, WindowPair{{0.1, 0.2}, 0.3}, 1e-1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::argument);
    }
}

TEST(Lstm, OverfitsASinusoid) {
    auto cfg = small(1, 16, 10);
    cfg.epochs = 300;
    cfg.learning_rate = 0.01;
    cfg.batch_size = 8;
    const auto pairs = make_windows(sinusoid(120, 12.0), cfg.window);
    const auto result = train(pairs, {}, cfg);
    EXPECT_LT(mean_squared_error(result.weights, pairs), 1e-3);
    EXPECT_EQ(result.report.train_loss.size(), cfg.epochs);
    EXPECT_LT(result.report.train_loss.back(), result.report.train_loss.front());
}

TEST(Lstm, ZeroLearningRateKeepsInitialWeights) {
    auto cfg = small(1, 4, 3);
    cfg.learning_rate = 0.0;
    cfg.epochs = 5;
    const auto result = train(make_windows(sinusoid(30, 6.0), 3), {}, cfg);
    std::mt19937_64 rng(cfg.seed);
    const auto init = initialize(cfg, rng);
    EXPECT_EQ(to_json(result.weights), to_json(init));
}

TEST(Lstm, TrainingIsDeterministic) {
    auto cfg = small(2, 6, 5);
    cfg.epochs = 20;
    cfg.dropout = 0.2;
    const auto pairs = make_windows(sinusoid(60, 8.0), cfg.window);
    const auto a = train(pairs, {}, cfg);
    const auto b = train(pairs, {}, cfg);
    EXPECT_EQ(to_json(a.weights).dump(), to_json(b.weights).dump());
    EXPECT_EQ(a.report.train_loss, b.report.train_loss);
    cfg.seed += 1;
    const auto c = train(pairs, {}, cfg);
    EXPECT_NE(to_json(a.weights).dump(), to_json(c.weights).dump());
}

TEST(Lstm, ValidationLossIsRecordedPerEpoch) {
    auto cfg = small(1, 4, 4);
    cfg.epochs = 10;
    const auto pairs = make_windows(sinusoid(50, 10.0), cfg.window);
    const std::vector<WindowPair> train_part(pairs.begin(), pairs.end() - 8);
    const std::vector<WindowPair> valid_part(pairs.end() - 8, pairs.end());
    const auto r = train(train_part, valid_part, cfg);
    EXPECT_EQ(r.report.validation_loss.size(), 10u);
    EXPECT_GT(r.report.wall_clock_seconds, 0.0);
}

TEST(Lstm, ForecastFeedsPredictionsBack) {
    std::mt19937_64 rng(3);
    const auto cfg = small(1, 4, 3);
    const auto w = initialize(cfg, rng);
    const std::vector<double> tail{0.2, 0.4, 0.6};
    const auto fc = forecast_normalized(w, cfg, tail, 3);
    ASSERT_EQ(fc.size(), 3u);
    EXPECT_EQ(fc[0], forward(w, tail));
    EXPECT_EQ(fc[1], forward(w, std::vector<double>{0.4, 0.6, fc[0]}));
    EXPECT_EQ(fc[2], forward(w, std::vector<double>{0.6, fc[0], fc[1]}));
    EXPECT_THROW((void)forecast_normalized(w, cfg, std::vector<double>{0.1}, 2), Error);
}

TEST(Lstm, ConfigValidation) {
    auto cfg = small(1, 4, 3);
    cfg.dropout = 1.0;
    EXPECT_THROW(validate(cfg), Error);
    cfg = small(0, 4, 3);
    EXPECT_THROW(validate(cfg), Error);
    EXPECT_THROW((void)train({}, {}, small(1, 2, 2)), Error);
}

TEST(Lstm, JsonRoundTrip) {
    std::mt19937_64 rng(10);
    auto cfg = small(2, 3, 4);
    cfg.dropout = 0.1;
    const auto w = initialize(cfg, rng);
    const auto back = lstm_weights_from_json(nlohmann::json::parse(to_json(w).dump()));
    const std::vector<double> x{0.3, 0.1, 0.9, 0.5};
    EXPECT_EQ(forward(back, x), forward(w, x));
    const auto cfg_back = lstm_config_from_json(to_json(cfg));
    EXPECT_EQ(to_json(cfg_back), to_json(cfg));
}
