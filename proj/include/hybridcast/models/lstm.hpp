#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hybridcast/error.hpp"

namespace hybridcast::lstm {

struct LstmConfig {
    std::size_t layers = 1;
    std::size_t hidden_units = 16;
    std::size_t window = 10;
    double dropout = 0.0;
    double learning_rate = 0.01;
    std::size_t epochs = 100;
    std::size_t batch_size = 16;
    std::uint64_t seed = 42;
    double clip_norm = 1.0;
};

inline void validate(const LstmConfig& c) {
    if (c.layers < 1 || c.hidden_units < 1 || c.window < 1 || c.epochs < 1 || c.batch_size < 1) {
        throw Error(ErrorCode::configuration, "LSTM layers, hidden_units, window, epochs and batch_size must be >= 1");
    }
    if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw Error(ErrorCode::configuration, "LSTM dropout must lie in [0,1)");
    if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate)) {
        throw Error(ErrorCode::configuration, "LSTM learning rate must be finite and non-negative");
    }
    if (!(c.clip_norm > 0.0)) throw Error(ErrorCode::configuration, "LSTM clip_norm must be positive");
}

/// Gate blocks are stacked in the order input, forget, output, candidate:
/// rows [0,H) = i, [H,2H) = f, [2H,3H) = o, [3H,4H) = g.
struct LayerWeights {
    Eigen::MatrixXd W;  // 4H x input
    Eigen::MatrixXd U;  // 4H x H
    Eigen::VectorXd b;  // 4H
};

struct LstmWeights {
    std::vector<LayerWeights> layers;
    Eigen::VectorXd head;  // W_y, length H
    double head_bias = 0.0;

    [[nodiscard]] std::size_t hidden_units() const { return static_cast<std::size_t>(head.size()); }

    /// Zero weights with the shapes implied by the config.
    static LstmWeights zeros(const LstmConfig& c) {
        LstmWeights w;
        const auto H = static_cast<Eigen::Index>(c.hidden_units);
        for (std::size_t l = 0; l < c.layers; ++l) {
            const Eigen::Index in = l == 0 ? 1 : H;
            w.layers.push_back({Eigen::MatrixXd::Zero(4 * H, in), Eigen::MatrixXd::Zero(4 * H, H), Eigen::VectorXd::Zero(4 * H)});
        }
        w.head = Eigen::VectorXd::Zero(H);
        return w;
    }

    /// Visits every scalar parameter in serialization order.
    template <typename F>
    void for_each_parameter(F&& f) {
        for (auto& L : layers) {
            for (Eigen::Index r = 0; r < L.W.rows(); ++r)
                for (Eigen::Index c = 0; c < L.W.cols(); ++c) f(L.W(r, c));
            for (Eigen::Index r = 0; r < L.U.rows(); ++r)
                for (Eigen::Index c = 0; c < L.U.cols(); ++c) f(L.U(r, c));
            for (Eigen::Index r = 0; r < L.b.size(); ++r) f(L.b(r));
        }
        for (Eigen::Index r = 0; r < head.size(); ++r) f(head(r));
        f(head_bias);
    }

    [[nodiscard]] std::size_t parameter_count() const {
        std::size_t n = 0;
        const_cast<LstmWeights*>(this)->for_each_parameter([&](double&) { ++n; });
        return n;
    }
};

/// Uniform(-k, k) with k = 1/sqrt(H); forget-gate biases start at 1.
[[nodiscard]] inline LstmWeights initialize(const LstmConfig& c, std::mt19937_64& rng) {
    auto w = LstmWeights::zeros(c);
    const double k = 1.0 / std::sqrt(static_cast<double>(c.hidden_units));
    // 53-bit mantissa draw keeps the sequence identical across standard libraries.
    auto uniform = [&] { return (static_cast<double>(rng() >> 11) * 0x1.0p-53) * 2.0 * k - k; };
    w.for_each_parameter([&](double& v) { v = uniform(); });
    const auto H = static_cast<Eigen::Index>(c.hidden_units);
    for (auto& L : w.layers) L.b.segment(H, H).setConstant(1.0);
    return w;
}

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct StepCache {
    Eigen::VectorXd x, h_prev_masked, mask, i, f, o, g, c_prev, c, tanh_c, h;
};

struct ForwardCache {
    std::vector<std::vector<StepCache>> layers;  // [layer][t]
    double prediction = 0.0;
};

/// `masks` (optional) holds one inverted-dropout mask per layer and step,
/// applied to the recurrent input h_{t-1}.
inline ForwardCache forward_cached(const LstmWeights& w, std::span<const double> window,
                                   const std::vector<std::vector<Eigen::VectorXd>>* masks) {
    const auto H = static_cast<Eigen::Index>(w.hidden_units());
    const std::size_t T = window.size();
    ForwardCache cache;
    cache.layers.resize(w.layers.size());
    std::vector<Eigen::VectorXd> inputs(T);
    for (std::size_t t = 0; t < T; ++t) inputs[t] = Eigen::VectorXd::Constant(1, window[t]);

    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        const auto& L = w.layers[l];
        Eigen::VectorXd h = Eigen::VectorXd::Zero(H), c = Eigen::VectorXd::Zero(H);
        auto& steps = cache.layers[l];
        steps.resize(T);
        for (std::size_t t = 0; t < T; ++t) {
            auto& s = steps[t];
            s.x = inputs[t];
            s.mask = masks ? (*masks)[l][t] : Eigen::VectorXd::Ones(H);
            s.h_prev_masked = h.cwiseProduct(s.mask);
            const Eigen::VectorXd a = L.W * s.x + L.U * s.h_prev_masked + L.b;
            s.i = a.segment(0, H).unaryExpr([](double v) { return sigmoid(v); });
            s.f = a.segment(H, H).unaryExpr([](double v) { return sigmoid(v); });
            s.o = a.segment(2 * H, H).unaryExpr([](double v) { return sigmoid(v); });
            s.g = a.segment(3 * H, H).array().tanh();
            s.c_prev = c;
            c = s.f.cwiseProduct(c) + s.i.cwiseProduct(s.g);
            s.c = c;
            s.tanh_c = c.array().tanh();
            h = s.o.cwiseProduct(s.tanh_c);
            s.h = h;
            inputs[t] = h;
        }
    }
    cache.prediction = w.head.dot(cache.layers.back().back().h) + w.head_bias;
    return cache;
}

/// Accumulates d(prediction)/d(params) * upstream into `grad`.
inline void backward(const LstmWeights& w, const ForwardCache& cache, double upstream, LstmWeights& grad) {
    const auto H = static_cast<Eigen::Index>(w.hidden_units());
    const std::size_t T = cache.layers.front().size();
    const auto& top = cache.layers.back();
    grad.head += upstream * top.back().h;
    grad.head_bias += upstream;

    std::vector<Eigen::VectorXd> dh_above(T, Eigen::VectorXd::Zero(H));
    dh_above[T - 1] = upstream * w.head;

    for (std::size_t l = w.layers.size(); l-- > 0;) {
        const auto& L = w.layers[l];
        auto& G = grad.layers[l];
        const auto& steps = cache.layers[l];
        std::vector<Eigen::VectorXd> dx(T);
        Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H), dc_next = Eigen::VectorXd::Zero(H);
        Eigen::VectorXd da(4 * H);
        for (std::size_t t = T; t-- > 0;) {
            const auto& s = steps[t];
            const Eigen::VectorXd dh = dh_above[t] + dh_next;
            const Eigen::VectorXd d_o = dh.cwiseProduct(s.tanh_c);
            const Eigen::VectorXd dc =
                dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix()) + dc_next;
            da.segment(0, H) = dc.cwiseProduct(s.g).cwiseProduct(s.i.cwiseProduct((1.0 - s.i.array()).matrix()));
            da.segment(H, H) = dc.cwiseProduct(s.c_prev).cwiseProduct(s.f.cwiseProduct((1.0 - s.f.array()).matrix()));
            da.segment(2 * H, H) = d_o.cwiseProduct(s.o.cwiseProduct((1.0 - s.o.array()).matrix()));
            da.segment(3 * H, H) = dc.cwiseProduct(s.i).cwiseProduct((1.0 - s.g.array().square()).matrix());
            dc_next = dc.cwiseProduct(s.f);
            G.W.noalias() += da * s.x.transpose();
            G.U.noalias() += da * s.h_prev_masked.transpose();
            G.b += da;
            dh_next = (L.U.transpose() * da).cwiseProduct(s.mask);
            dx[t] = L.W.transpose() * da;
        }
        if (l > 0) dh_above = std::move(dx);
    }
}

}  // namespace detail

/// Single prediction: the stacked cells run over the window (oldest value
/// first) and a linear head reads the final top-layer hidden state.
[[nodiscard]] inline double forward(const LstmWeights& w, std::span<const double> window) {
    if (w.layers.empty() || window.empty()) throw Error(ErrorCode::configuration, "LSTM needs layers and a non-empty window");
    const auto H = static_cast<Eigen::Index>(w.hidden_units());
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        const auto& L = w.layers[l];
        const Eigen::Index in = l == 0 ? 1 : H;
        if (L.W.rows() != 4 * H || L.W.cols() != in || L.U.rows() != 4 * H || L.U.cols() != H || L.b.size() != 4 * H) {
            throw Error(ErrorCode::configuration, "LSTM weight shapes are inconsistent at layer " + std::to_string(l));
        }
    }
    return detail::forward_cached(w, window, nullptr).prediction;
}

struct WindowPair {
    std::vector<double> window;
    double target = 0.0;
};

/// Sliding windows over `values`: pair k uses values[k .. k+window) to predict values[k+window].
[[nodiscard]] inline std::vector<WindowPair> make_windows(std::span<const double> values, std::size_t window) {
    std::vector<WindowPair> out;
    for (std::size_t k = 0; k + window < values.size(); ++k) {
        out.push_back({std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(k),
                                           values.begin() + static_cast<std::ptrdiff_t>(k + window)),
                       values[k + window]});
    }
    return out;
}

/// Squared error of one pair and its analytic gradient.
[[nodiscard]] inline double loss_and_gradient(const LstmWeights& w, const WindowPair& pair, LstmWeights& grad) {
    const auto cache = detail::forward_cached(w, pair.window, nullptr);
    const double err = cache.prediction - pair.target;
    detail::backward(w, cache, 2.0 * err, grad);
    return err * err;
}

/// Largest relative error |a - n| / max(|a|, |n|, 1e-12) between the
/// analytic gradient and central differences over every parameter.
[[nodiscard]] inline double gradient_check(const LstmWeights& weights, const WindowPair& pair, double epsilon) {
    if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
        throw Error(ErrorCode::argument, "gradient check epsilon must lie in [1e-7, 1e-3]");
    }
    auto grad = weights;
    grad.for_each_parameter([](double& v) { v = 0.0; });
    (void)loss_and_gradient(weights, pair, grad);

    std::vector<double> analytic;
    grad.for_each_parameter([&](double& v) { analytic.push_back(v); });

    auto probe = weights;
    auto loss = [&] {
        const double e = forward(probe, pair.window) - pair.target;
        return e * e;
    };
    double worst = 0.0;
    std::size_t idx = 0;
    probe.for_each_parameter([&](double& v) {
        const double saved = v;
        v = saved + epsilon;
        const double up = loss();
        v = saved - epsilon;
        const double down = loss();
        v = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double a = analytic[idx++];
        worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-12}));
    });
    return worst;
}

struct TrainingReport {
    std::vector<double> train_loss;
    std::vector<double> validation_loss;
    double wall_clock_seconds = 0.0;
    double final_gradient_norm = 0.0;
};

struct TrainResult {
    LstmWeights weights;
    TrainingReport report;
};

[[nodiscard]] inline double mean_squared_error(const LstmWeights& w, const std::vector<WindowPair>& pairs) {
    double s = 0.0;
    for (const auto& p : pairs) {
        const double e = forward(w, p.window) - p.target;
        s += e * e;
    }
    return s / static_cast<double>(pairs.size());
}

/// Mini-batch Adam (0.9, 0.999, 1e-8) on the squared error with full BPTT,
/// global-norm clipping and inverted dropout on the recurrent connections.
/// The generator seeded from config.seed drives initialization, shuffling
/// and dropout masks, so a run is reproducible bit for bit.
[[nodiscard]] inline TrainResult train(const std::vector<WindowPair>& train_pairs, const std::vector<WindowPair>& validation,
                                       const LstmConfig& config) {
    validate(config);
    if (train_pairs.empty()) throw Error(ErrorCode::data, "LSTM training set is empty");
    for (const auto& p : train_pairs) {
        if (p.window.size() != config.window) throw Error(ErrorCode::configuration, "training window length does not match config");
    }
    const auto started = std::chrono::steady_clock::now();
    std::mt19937_64 rng(config.seed);
    TrainResult result;
    result.weights = initialize(config, rng);
    auto& w = result.weights;

    auto zero = LstmWeights::zeros(config);
    auto m = zero, v = zero, grad = zero;
    const auto H = static_cast<Eigen::Index>(config.hidden_units);
    const double keep = 1.0 - config.dropout;
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    std::size_t step = 0;

    std::vector<std::size_t> order(train_pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<Eigen::VectorXd>> masks(config.layers, std::vector<Eigen::VectorXd>(config.window));
    auto draw = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);

        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            grad = zero;
            for (std::size_t k = start; k < end; ++k) {
                const auto& pair = train_pairs[order[k]];
                const std::vector<std::vector<Eigen::VectorXd>>* mask_ptr = nullptr;
                if (config.dropout > 0.0) {
                    for (auto& layer : masks)
                        for (auto& mk : layer) {
                            mk.resize(H);
                            for (Eigen::Index u = 0; u < H; ++u) mk(u) = draw() < keep ? 1.0 / keep : 0.0;
                        }
                    mask_ptr = &masks;
                }
                const auto cache = detail::forward_cached(w, pair.window, mask_ptr);
                detail::backward(w, cache, 2.0 * (cache.prediction - pair.target) * inv_batch, grad);
            }

            double norm2 = 0.0;
            grad.for_each_parameter([&](double& g) { norm2 += g * g; });
            const double norm = std::sqrt(norm2);
            result.report.final_gradient_norm = norm;
            const double clip = norm > config.clip_norm ? config.clip_norm / norm : 1.0;

            ++step;
            const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
            std::vector<double*> gp, mp, vp;
            grad.for_each_parameter([&](double& x) { gp.push_back(&x); });
            m.for_each_parameter([&](double& x) { mp.push_back(&x); });
            v.for_each_parameter([&](double& x) { vp.push_back(&x); });
            std::size_t idx = 0;
            w.for_each_parameter([&](double& param) {
                const double g = *gp[idx] * clip;
                double& mm = *mp[idx];
                double& vv = *vp[idx];
                mm = b1 * mm + (1.0 - b1) * g;
                vv = b2 * vv + (1.0 - b2) * g * g;
                param -= config.learning_rate * (mm / c1) / (std::sqrt(vv / c2) + eps);
                ++idx;
            });
        }

        const double loss = mean_squared_error(w, train_pairs);
        if (!std::isfinite(loss)) {
            throw Error(ErrorCode::divergence, "LSTM training diverged at epoch " + std::to_string(epoch + 1), epoch + 1);
        }
        result.report.train_loss.push_back(loss);
        if (!validation.empty()) result.report.validation_loss.push_back(mean_squared_error(w, validation));
    }
    result.report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

/// Recursive multi-step forecast on the normalized scale: each prediction
/// is shifted into the window for the next step.
[[nodiscard]] inline std::vector<double> forecast_normalized(const LstmWeights& w, const LstmConfig& config,
                                                             std::span<const double> tail, std::size_t horizon) {
    if (tail.size() != config.window) {
        throw Error(ErrorCode::argument, "forecast tail has " + std::to_string(tail.size()) + " values, window is " +
                                             std::to_string(config.window));
    }
    std::vector<double> window(tail.begin(), tail.end());
    std::vector<double> out;
    for (std::size_t h = 0; h < horizon; ++h) {
        const double next = forward(w, window);
        out.push_back(next);
        window.erase(window.begin());
        window.push_back(next);
    }
    return out;
}

// ---------------------------------------------------------------- serialization

inline nlohmann::json to_json(const LstmConfig& c) {
    return {{"layers", c.layers},       {"hidden_units", c.hidden_units},   {"window", c.window},
            {"dropout", c.dropout},     {"learning_rate", c.learning_rate}, {"epochs", c.epochs},
            {"batch_size", c.batch_size}, {"seed", c.seed},                 {"clip_norm", c.clip_norm}};
}

inline LstmConfig lstm_config_from_json(const nlohmann::json& j) {
    LstmConfig c;
    c.layers = j.value("layers", c.layers);
    c.hidden_units = j.value("hidden_units", c.hidden_units);
    c.window = j.value("window", c.window);
    c.dropout = j.value("dropout", c.dropout);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    validate(c);
    return c;
}

inline constexpr int kWeightsFormatVersion = 1;

/// Versioned document: shape header, gate order "ifog", row-major matrices.
inline nlohmann::json to_json(const LstmWeights& w) {
    auto flat = [](const Eigen::MatrixXd& M) {
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(M.size()));
        for (Eigen::Index r = 0; r < M.rows(); ++r)
            for (Eigen::Index c = 0; c < M.cols(); ++c) out.push_back(M(r, c));
        return out;
    };
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& L : w.layers) {
        layers.push_back({{"input_size", L.W.cols()},
                          {"W", flat(L.W)},
                          {"U", flat(L.U)},
                          {"b", std::vector<double>(L.b.data(), L.b.data() + L.b.size())}});
    }
    return {{"format", "lstm-weights"},
            {"version", kWeightsFormatVersion},
            {"gate_order", "ifog"},
            {"layout", "row-major"},
            {"shape", {{"layers", w.layers.size()}, {"hidden_units", w.hidden_units()}}},
            {"layers", layers},
            {"head", std::vector<double>(w.head.data(), w.head.data() + w.head.size())},
            {"head_bias", w.head_bias}};
}

inline LstmWeights lstm_weights_from_json(const nlohmann::json& j) {
    if (j.value("format", std::string()) != "lstm-weights" || j.value("version", 0) != kWeightsFormatVersion ||
        j.value("gate_order", std::string()) != "ifog") {
        throw Error(ErrorCode::configuration, "unsupported LSTM weights document");
    }
    const auto H = j.at("shape").at("hidden_units").get<Eigen::Index>();
    const auto n_layers = j.at("shape").at("layers").get<std::size_t>();
    if (H < 1 || n_layers < 1 || j.at("layers").size() != n_layers) throw Error(ErrorCode::configuration, "bad LSTM shape header");
    auto unflat = [](const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols) {
        if (static_cast<Eigen::Index>(v.size()) != rows * cols) throw Error(ErrorCode::configuration, "LSTM matrix size mismatch");
        Eigen::MatrixXd M(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = v[static_cast<std::size_t>(r * cols + c)];
        return M;
    };
    LstmWeights w;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const auto& L = j.at("layers")[l];
        const auto in = L.at("input_size").get<Eigen::Index>();
        if (in != (l == 0 ? 1 : H)) throw Error(ErrorCode::configuration, "LSTM layer input size mismatch");
        w.layers.push_back({unflat(L.at("W").get<std::vector<double>>(), 4 * H, in),
                            unflat(L.at("U").get<std::vector<double>>(), 4 * H, H),
                            unflat(L.at("b").get<std::vector<double>>(), 4 * H, 1)});
    }
    const auto head = j.at("head").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(head.size()) != H) throw Error(ErrorCode::configuration, "LSTM head size mismatch");
    w.head = Eigen::Map<const Eigen::VectorXd>(head.data(), H);
    w.head_bias = j.at("head_bias").get<double>();
    bool finite = true;
    w.for_each_parameter([&](double& x) { finite = finite && std::isfinite(x); });
    if (!finite) throw Error(ErrorCode::configuration, "LSTM weights contain non-finite values");
    return w;
}

inline nlohmann::json to_json(const TrainingReport& r, bool include_timing) {
    nlohmann::json j{{"train_loss", r.train_loss},
                     {"validation_loss", r.validation_loss},
                     {"final_gradient_norm", r.final_gradient_norm}};
    if (include_timing) j["wall_clock_seconds"] = r.wall_clock_seconds;
    return j;
}

inline TrainingReport training_report_from_json(const nlohmann::json& j) {
    TrainingReport r;
    r.train_loss = j.at("train_loss").get<std::vector<double>>();
    r.validation_loss = j.at("validation_loss").get<std::vector<double>>();
    r.final_gradient_norm = j.at("final_gradient_norm").get<double>();
    r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
    return r;
}

}  // namespace hybridcast::lstm
