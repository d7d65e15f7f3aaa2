#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hybridcast/error.hpp"
#include "hybridcast/models/arima.hpp"
#include "hybridcast/models/ets.hpp"
#include "hybridcast/models/forecast.hpp"
#include "hybridcast/models/lstm.hpp"
#include "hybridcast/numeric/digest.hpp"
#include "hybridcast/preprocess/pipeline.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast {

enum class Family { arima, sarima, ets, lstm };

[[nodiscard]] inline std::string to_string(Family f) {
    switch (f) {
        case Family::arima: return "arima";
        case Family::sarima: return "sarima";
        case Family::ets: return "ets";
        case Family::lstm: return "lstm";
    }
    return "arima";
}

[[nodiscard]] inline Family family_from_string(const std::string& s) {
    if (s == "arima") return Family::arima;
    if (s == "sarima") return Family::sarima;
    if (s == "ets") return Family::ets;
    if (s == "lstm") return Family::lstm;
    throw Error(ErrorCode::configuration, "unknown model family '" + s + "'");
}

struct ArimaModelSpec {
    arima::ArimaOrder order;
    std::optional<arima::SeasonalOrder> seasonal;
    std::optional<bool> include_intercept;
};

struct EtsModelSpec {
    ets::EtsSpec spec;
    ets::EtsFixed fixed;
};

struct LstmModelSpec {
    lstm::LstmConfig config;
    /// Share of the trailing windows held out for validation loss.
    double validation_fraction = 0.0;
};

/// Family plus its configuration. `preprocess` holds invertible steps
/// (log, difference, normalize) applied before fitting and undone on
/// every forecast.
struct ModelSpec {
    Family family = Family::arima;
    std::variant<ArimaModelSpec, EtsModelSpec, LstmModelSpec> config;
    std::vector<preprocess::PipelineStep> preprocess;
    std::string label;
};

// ---------------------------------------------------------------- spec JSON

namespace detail {

inline nlohmann::json canonical_config(const ModelSpec& s) {
    using nlohmann::json;
    json j{{"family", to_string(s.family)}};
    if (const auto* a = std::get_if<ArimaModelSpec>(&s.config)) {
        j["order"] = {{"p", a->order.p}, {"d", a->order.d}, {"q", a->order.q}};
        if (a->seasonal) {
            j["seasonal_order"] = {{"P", a->seasonal->P}, {"D", a->seasonal->D}, {"Q", a->seasonal->Q}, {"s", a->seasonal->s}};
        }
        if (a->include_intercept) j["include_intercept"] = *a->include_intercept;
    } else if (const auto* e = std::get_if<EtsModelSpec>(&s.config)) {
        j["ets"] = ets::to_json(e->spec);
        json fixed = json::object();
        if (e->fixed.alpha) fixed["alpha"] = *e->fixed.alpha;
        if (e->fixed.beta) fixed["beta"] = *e->fixed.beta;
        if (e->fixed.gamma) fixed["gamma"] = *e->fixed.gamma;
        if (e->fixed.initial_level) fixed["initial_level"] = *e->fixed.initial_level;
        if (e->fixed.initial_trend) fixed["initial_trend"] = *e->fixed.initial_trend;
        if (!fixed.empty()) j["ets"]["fixed"] = fixed;
    } else if (const auto* l = std::get_if<LstmModelSpec>(&s.config)) {
        j["lstm"] = lstm::to_json(l->config);
        j["lstm"]["validation_fraction"] = l->validation_fraction;
    }
    if (!s.preprocess.empty()) {
        json steps = json::array();
        for (const auto& st : s.preprocess) steps.push_back(preprocess::to_json(st));
        j["preprocess"] = steps;
    }
    return j;
}

inline std::size_t size_field(const nlohmann::json& j, const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw Error(ErrorCode::configuration, std::string("'") + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

}  // namespace detail

[[nodiscard]] inline std::string describe(const ModelSpec& s) {
    if (!s.label.empty()) return s.label;
    std::string base;
    if (const auto* a = std::get_if<ArimaModelSpec>(&s.config)) {
        base = arima::describe(a->order, a->seasonal.value_or(arima::SeasonalOrder{}));
    } else if (const auto* e = std::get_if<EtsModelSpec>(&s.config)) {
        base = ets::describe(e->spec);
    } else if (const auto* l = std::get_if<LstmModelSpec>(&s.config)) {
        base = "LSTM(layers=" + std::to_string(l->config.layers) + ",units=" + std::to_string(l->config.hidden_units) +
               ",window=" + std::to_string(l->config.window) + ")";
    }
    return base;
}

inline nlohmann::json to_json(const ModelSpec& s) {
    auto j = detail::canonical_config(s);
    if (!s.label.empty()) j["label"] = s.label;
    return j;
}

/// SHA-256 over the canonical configuration (label excluded).
[[nodiscard]] inline std::string spec_digest(const ModelSpec& s) { return sha256_hex(detail::canonical_config(s).dump()); }

inline void validate(const ModelSpec& s) {
    switch (s.family) {
        case Family::arima:
        case Family::sarima: {
            const auto* a = std::get_if<ArimaModelSpec>(&s.config);
            if (a == nullptr) throw Error(ErrorCode::configuration, "ARIMA family needs an order");
            const auto seasonal = a->seasonal.value_or(arima::SeasonalOrder{});
            if (s.family == Family::sarima && !seasonal.active()) {
                throw Error(ErrorCode::configuration, "sarima family needs a seasonal order with P, D or Q positive");
            }
            if (s.family == Family::arima && seasonal.active()) {
                throw Error(ErrorCode::configuration, "arima family takes no seasonal order; use sarima");
            }
            arima::detail::validate(a->order, seasonal, a->include_intercept.value_or(a->order.d + seasonal.D == 0));
            break;
        }
        case Family::ets: {
            const auto* e = std::get_if<EtsModelSpec>(&s.config);
            if (e == nullptr) throw Error(ErrorCode::configuration, "ets family needs an ETS spec");
            ets::validate(e->spec);
            break;
        }
        case Family::lstm: {
            const auto* l = std::get_if<LstmModelSpec>(&s.config);
            if (l == nullptr) throw Error(ErrorCode::configuration, "lstm family needs an LSTM config");
            lstm::validate(l->config);
            if (!(l->validation_fraction >= 0.0 && l->validation_fraction < 1.0)) {
                throw Error(ErrorCode::configuration, "validation_fraction must lie in [0,1)");
            }
            break;
        }
    }
    for (std::size_t k = 0; k < s.preprocess.size(); ++k) {
        if (!s.preprocess[k].invertible()) {
            throw Error(ErrorCode::configuration, "model preprocessing step " + std::to_string(k) +
                                                      " is not invertible; clean the dataset instead", k);
        }
    }
}

inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::configuration, "model spec must be an object");
    try {
        ModelSpec s;
        if (!j.contains("family") || !j.at("family").is_string()) throw Error(ErrorCode::configuration, "model spec needs a 'family'");
        s.family = family_from_string(j.at("family").get<std::string>());
        s.label = j.value("label", std::string());
        switch (s.family) {
            case Family::arima:
            case Family::sarima: {
                ArimaModelSpec a;
                const auto order = j.value("order", nlohmann::json::object());
                a.order = {detail::size_field(order, "p", 0), detail::size_field(order, "d", 0), detail::size_field(order, "q", 0)};
                if (j.contains("seasonal_order")) {
                    const auto& so = j.at("seasonal_order");
                    a.seasonal = arima::SeasonalOrder{detail::size_field(so, "P", 0), detail::size_field(so, "D", 0),
                                                      detail::size_field(so, "Q", 0), detail::size_field(so, "s", 0)};
                    if (!a.seasonal->active()) a.seasonal.reset();
                }
                if (j.contains("include_intercept")) a.include_intercept = j.at("include_intercept").get<bool>();
                s.config = a;
                break;
            }
            case Family::ets: {
                EtsModelSpec e;
                const auto cfg = j.value("ets", nlohmann::json::object());
                e.spec = ets::ets_spec_from_json(cfg);
                if (cfg.contains("fixed")) {
                    const auto& f = cfg.at("fixed");
                    if (f.contains("alpha")) e.fixed.alpha = f.at("alpha").get<double>();
                    if (f.contains("beta")) e.fixed.beta = f.at("beta").get<double>();
                    if (f.contains("gamma")) e.fixed.gamma = f.at("gamma").get<double>();
                    if (f.contains("initial_level")) e.fixed.initial_level = f.at("initial_level").get<double>();
                    if (f.contains("initial_trend")) e.fixed.initial_trend = f.at("initial_trend").get<double>();
                }
                s.config = e;
                break;
            }
            case Family::lstm: {
                LstmModelSpec l;
                auto cfg = j.value("lstm", nlohmann::json::object());
                // Window defaults to two seasonal periods when a period is known.
                if (!cfg.contains("window") && cfg.contains("period")) cfg["window"] = 2 * detail::size_field(cfg, "period", 5);
                cfg.erase("period");
                l.validation_fraction = cfg.value("validation_fraction", 0.0);
                l.config = lstm::lstm_config_from_json(cfg);
                s.config = l;
                break;
            }
        }
        if (j.contains("preprocess")) s.preprocess = preprocess::pipeline_from_json(j.at("preprocess"));
        validate(s);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::configuration, std::string("malformed model spec: ") + e.what());
    }
}

/// Shortest series the spec can be fitted on.
[[nodiscard]] inline std::size_t minimum_length(const ModelSpec& s) {
    std::size_t consumed = 0;
    for (const auto& st : s.preprocess) {
        if (st.op == preprocess::PipelineStep::Op::difference) consumed += st.lag;
    }
    if (const auto* a = std::get_if<ArimaModelSpec>(&s.config)) {
        const auto so = a->seasonal.value_or(arima::SeasonalOrder{});
        return consumed + a->order.d + so.D * so.s + 10 + a->order.p + a->order.q + so.P + so.Q;
    }
    if (const auto* e = std::get_if<EtsModelSpec>(&s.config)) {
        return consumed + (e->spec.seasonal == ets::SeasonalKind::none ? 4 : 2 * e->spec.period + 2);
    }
    const auto& l = std::get<LstmModelSpec>(s.config);
    return consumed + l.config.window + 2;
}

// ---------------------------------------------------------------- fitted models

struct FittedLstm {
    lstm::LstmConfig config;
    lstm::LstmWeights weights;
    preprocess::NormalizeRecord normalization;
    std::vector<double> tail_normalized;
    lstm::TrainingReport report;
    Timestamp last_timestamp = 0;
    std::int64_t frequency = 1;
    std::size_t series_length = 0;
};

struct FittedModel {
    ModelSpec spec;
    std::string spec_digest;
    std::vector<preprocess::TransformRecord> directives;
    std::variant<arima::FittedArima, ets::FittedEts, FittedLstm> fitted;
    Timestamp last_timestamp = 0;
    std::int64_t frequency = 1;
    std::size_t series_length = 0;
};

[[nodiscard]] inline FittedLstm fit_lstm(const TimeSeries& series, const LstmModelSpec& spec) {
    if (series.has_missing()) throw Error(ErrorCode::data, "series has missing values; impute before fitting");
    const auto& cfg = spec.config;
    if (series.size() < cfg.window + 2) {
        throw Error(ErrorCode::data, "LSTM window " + std::to_string(cfg.window) + " needs at least " +
                                         std::to_string(cfg.window + 2) + " points");
    }
    auto [normalized, rec] = preprocess::normalize(series, preprocess::NormalizeMethod::minmax);
    auto pairs = lstm::make_windows(normalized.values(), cfg.window);
    std::vector<lstm::WindowPair> validation;
    const auto n_val = static_cast<std::size_t>(std::floor(spec.validation_fraction * static_cast<double>(pairs.size())));
    if (n_val > 0 && n_val < pairs.size()) {
        validation.assign(pairs.end() - static_cast<std::ptrdiff_t>(n_val), pairs.end());
        pairs.resize(pairs.size() - n_val);
    }
    auto trained = lstm::train(pairs, validation, cfg);
    FittedLstm out;
    out.config = cfg;
    out.weights = std::move(trained.weights);
    out.report = std::move(trained.report);
    out.normalization = std::get<preprocess::NormalizeRecord>(rec);
    const auto v = normalized.values();
    out.tail_normalized.assign(v.end() - static_cast<std::ptrdiff_t>(cfg.window), v.end());
    out.last_timestamp = series.last_timestamp();
    out.frequency = series.frequency();
    out.series_length = series.size();
    return out;
}

/// LSTM forecasts carry no prediction intervals.
[[nodiscard]] inline Forecast forecast_lstm(const FittedLstm& fit, Horizon horizon) {
    auto normalized = lstm::forecast_normalized(fit.weights, fit.config, fit.tail_normalized, horizon.steps);
    for (double& v : normalized) v = preprocess::denormalize_value(v, fit.normalization);
    return make_forecast(fit.last_timestamp, fit.frequency, normalized, std::nullopt, 0.0);
}

[[nodiscard]] inline FittedModel fit_model(const TimeSeries& series, const ModelSpec& spec, std::uint64_t seed = 20240607) {
    validate(spec);
    if (series.has_missing()) throw Error(ErrorCode::data, "series has missing values; impute before fitting");
    FittedModel fm;
    fm.spec = spec;
    fm.spec_digest = spec_digest(spec);
    fm.last_timestamp = series.last_timestamp();
    fm.frequency = series.frequency();
    fm.series_length = series.size();
    TimeSeries working = series;
    if (!spec.preprocess.empty()) {
        auto applied = preprocess::apply_pipeline(series, spec.preprocess);
        working = std::move(applied.series);
        fm.directives = std::move(applied.records);
    }
    if (const auto* a = std::get_if<ArimaModelSpec>(&spec.config)) {
        arima::ArimaOptions opts;
        opts.include_intercept = a->include_intercept;
        opts.seed = seed;
        fm.fitted = arima::fit_arima(working, a->order, a->seasonal, opts);
    } else if (const auto* e = std::get_if<EtsModelSpec>(&spec.config)) {
        ets::EtsOptions opts;
        opts.fixed = e->fixed;
        fm.fitted = ets::fit_ets(working, e->spec, opts);
    } else {
        fm.fitted = fit_lstm(working, std::get<LstmModelSpec>(spec.config));
    }
    return fm;
}

/// Forecast in original units: every preprocessing directive is inverted.
[[nodiscard]] inline Forecast forecast(const FittedModel& fm, Horizon horizon, double confidence = 0.95) {
    validate_confidence(confidence);
    Forecast fc = std::visit(
        [&](const auto& f) -> Forecast {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, arima::FittedArima>) return arima::forecast_arima(f, horizon, confidence);
            else if constexpr (std::is_same_v<F, ets::FittedEts>) return ets::forecast_ets(f, horizon, confidence);
            else return forecast_lstm(f, horizon);
        },
        fm.fitted);
    fc.spec_digest = fm.spec_digest;
    if (!fc.intervals_available) fc.confidence = confidence;
    if (!fm.directives.empty()) {
        const auto points = preprocess::invert_pipeline(fc.points(), fm.directives);
        const bool keep_bounds = fc.intervals_available && preprocess::bounds_survive(fm.directives);
        for (std::size_t h = 0; h < fc.steps.size(); ++h) {
            auto& st = fc.steps[h];
            if (keep_bounds) {
                st.lower = preprocess::invert_pipeline({*st.lower}, fm.directives).front();
                st.upper = preprocess::invert_pipeline({*st.upper}, fm.directives).front();
            } else {
                st.lower.reset();
                st.upper.reset();
            }
            st.point = points[h];
        }
        fc.intervals_available = keep_bounds;
    }
    return fc;
}

/// One-step-ahead in-sample predictions aligned with `series` (the series
/// the model was fitted on); entries without enough history are empty.
[[nodiscard]] inline std::vector<std::optional<double>> one_step_predictions(const FittedModel& fm, const TimeSeries& series) {
    if (series.size() != fm.series_length || series.last_timestamp() != fm.last_timestamp) {
        throw Error(ErrorCode::conflict, "series does not match the fitted model");
    }
    // Rebuild the intermediate series each directive saw.
    std::vector<TimeSeries> stages{series};
    for (const auto& step : fm.spec.preprocess) stages.push_back(preprocess::apply_step(stages.back(), step).first);
    const TimeSeries& working = stages.back();

    std::vector<std::optional<double>> preds = std::visit(
        [&](const auto& f) -> std::vector<std::optional<double>> {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, arima::FittedArima>) {
                return arima::one_step_predictions(f, working);
            } else if constexpr (std::is_same_v<F, ets::FittedEts>) {
                return {f.fitted_values.begin(), f.fitted_values.end()};
            } else {
                std::vector<std::optional<double>> out(working.size());
                std::vector<double> norm(working.size());
                for (std::size_t i = 0; i < working.size(); ++i) {
                    norm[i] = (working[i] - f.normalization.offset) / f.normalization.scale;
                }
                for (std::size_t t = f.config.window; t < working.size(); ++t) {
                    const double p = lstm::forward(f.weights, std::span<const double>(norm).subspan(t - f.config.window, f.config.window));
                    out[t] = preprocess::denormalize_value(p, f.normalization);
                }
                return out;
            }
        },
        fm.fitted);

    for (std::size_t k = fm.directives.size(); k-- > 0;) {
        const auto& rec = fm.directives[k];
        const TimeSeries& before = stages[k];
        std::vector<std::optional<double>> mapped(before.size());
        if (const auto* d = std::get_if<preprocess::DifferenceRecord>(&rec)) {
            for (std::size_t t = 0; t < preds.size(); ++t) {
                if (preds[t]) mapped[t + d->lag] = before[t] + *preds[t];
            }
        } else {
            for (std::size_t t = 0; t < preds.size(); ++t) {
                if (preds[t]) mapped[t] = preprocess::invert_forecast_values(std::vector<double>{*preds[t]}, rec).front();
            }
        }
        preds = std::move(mapped);
    }
    return preds;
}

// ---------------------------------------------------------------- serialization

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json fitted_to_json(const FittedLstm& f, bool include_timing) {
    return {{"config", lstm::to_json(f.config)},
            {"weights", lstm::to_json(f.weights)},
            {"normalization", preprocess::to_json(preprocess::TransformRecord{f.normalization})},
            {"tail_normalized", f.tail_normalized},
            {"report", lstm::to_json(f.report, include_timing)},
            {"last_timestamp", f.last_timestamp},
            {"frequency", f.frequency},
            {"series_length", f.series_length}};
}

inline nlohmann::json to_json(const FittedModel& fm, bool include_timing = false) {
    nlohmann::json directives = nlohmann::json::array();
    for (const auto& r : fm.directives) directives.push_back(preprocess::to_json(r));
    nlohmann::json fitted = std::visit(
        [&](const auto& f) -> nlohmann::json {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, FittedLstm>) return fitted_to_json(f, include_timing);
            else if constexpr (std::is_same_v<F, ets::FittedEts>) return ets::to_json(f);
            else return arima::to_json(f);
        },
        fm.fitted);
    return {{"format", "hybridcast-model"},
            {"version", kModelFormatVersion},
            {"spec", to_json(fm.spec)},
            {"spec_digest", fm.spec_digest},
            {"directives", directives},
            {"last_timestamp", fm.last_timestamp},
            {"frequency", fm.frequency},
            {"series_length", fm.series_length},
            {"fitted", fitted}};
}

inline FittedModel fitted_model_from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", std::string()) != "hybridcast-model" || j.value("version", 0) != kModelFormatVersion) {
            throw Error(ErrorCode::configuration, "not a model document of a supported version");
        }
        FittedModel fm;
        fm.spec = model_spec_from_json(j.at("spec"));
        fm.spec_digest = j.at("spec_digest").get<std::string>();
        if (fm.spec_digest != spec_digest(fm.spec)) throw Error(ErrorCode::configuration, "model spec digest mismatch");
        for (const auto& r : j.at("directives")) fm.directives.push_back(preprocess::transform_from_json(r));
        if (fm.directives.size() != fm.spec.preprocess.size()) throw Error(ErrorCode::configuration, "directive count mismatch");
        fm.last_timestamp = j.at("last_timestamp").get<Timestamp>();
        fm.frequency = j.at("frequency").get<std::int64_t>();
        fm.series_length = j.at("series_length").get<std::size_t>();
        const auto& f = j.at("fitted");
        switch (fm.spec.family) {
            case Family::arima:
            case Family::sarima: fm.fitted = arima::fitted_arima_from_json(f); break;
            case Family::ets: fm.fitted = ets::fitted_ets_from_json(f); break;
            case Family::lstm: {
                FittedLstm l;
                l.config = lstm::lstm_config_from_json(f.at("config"));
                l.weights = lstm::lstm_weights_from_json(f.at("weights"));
                const auto rec = preprocess::transform_from_json(f.at("normalization"));
                if (!std::holds_alternative<preprocess::NormalizeRecord>(rec)) {
                    throw Error(ErrorCode::configuration, "LSTM normalization record missing");
                }
                l.normalization = std::get<preprocess::NormalizeRecord>(rec);
                l.tail_normalized = f.at("tail_normalized").get<std::vector<double>>();
                l.report = lstm::training_report_from_json(f.at("report"));
                l.last_timestamp = f.at("last_timestamp").get<Timestamp>();
                l.frequency = f.at("frequency").get<std::int64_t>();
                l.series_length = f.at("series_length").get<std::size_t>();
                if (l.tail_normalized.size() != l.config.window || l.weights.layers.size() != l.config.layers ||
                    l.weights.hidden_units() != l.config.hidden_units) {
                    throw Error(ErrorCode::configuration, "LSTM weights do not match the config");
                }
                fm.fitted = std::move(l);
                break;
            }
        }
        return fm;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::configuration, std::string("malformed model document: ") + e.what());
    }
}

/// Family, parameters and fit diagnostics for display.
inline nlohmann::json fit_summary(const FittedModel& fm, bool include_timing = false) {
    nlohmann::json j{{"family", to_string(fm.spec.family)}, {"model", describe(fm.spec)}, {"spec_digest", fm.spec_digest}};
    if (const auto* a = std::get_if<arima::FittedArima>(&fm.fitted)) {
        j["parameters"] = {{"phi", a->params.phi},
                           {"theta", a->params.theta},
                           {"seasonal_phi", a->params.seasonal_phi},
                           {"seasonal_theta", a->params.seasonal_theta},
                           {"intercept", a->params.intercept},
                           {"sigma2", a->params.sigma2}};
        j["diagnostics"] = {{"css", a->css}, {"aic", a->aic}, {"n_effective", a->n_effective}};
    } else if (const auto* e = std::get_if<ets::FittedEts>(&fm.fitted)) {
        nlohmann::json p{{"alpha", e->params.alpha}, {"initial_level", e->params.initial_level}};
        if (e->params.beta) p["beta"] = *e->params.beta;
        if (e->params.gamma) p["gamma"] = *e->params.gamma;
        if (e->spec.trend == ets::TrendKind::additive) p["initial_trend"] = e->params.initial_trend;
        if (!e->params.initial_seasonals.empty()) p["initial_seasonals"] = e->params.initial_seasonals;
        j["parameters"] = p;
        j["diagnostics"] = {{"sse", e->sse}, {"aic", e->aic}, {"free_parameters", e->free_parameters}};
    } else {
        const auto& l = std::get<FittedLstm>(fm.fitted);
        j["parameters"] = lstm::to_json(l.config);
        j["diagnostics"] = {{"training_report", lstm::to_json(l.report, include_timing)},
                            {"final_train_loss", l.report.train_loss.back()}};
    }
    return j;
}

}  // namespace hybridcast
