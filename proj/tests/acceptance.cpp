// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: acceptance <path-to-hybridcast-cli>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hybridcast/evaluate/anomaly.hpp"
#include "hybridcast/evaluate/compare.hpp"
#include "hybridcast/evaluate/cv.hpp"
#include "hybridcast/evaluate/metrics.hpp"
#include "hybridcast/models/arima.hpp"
#include "hybridcast/models/ets.hpp"
#include "hybridcast/models/lstm.hpp"
#include "hybridcast/models/model.hpp"
#include "hybridcast/preprocess/transforms.hpp"
#include "hybridcast/synth.hpp"
#include "cli_runner.hpp"
#include "oracles.hpp"
#include "service_harness.hpp"

using namespace hybridcast;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

TimeSeries hourly(std::vector<double> v) { return TimeSeries(0, 3600, std::move(v)); }

ModelSpec spec(const char* text) { return model_spec_from_json(nlohmann::json::parse(text)); }

// ---------------------------------------------------------------- criteria

Verdict metric_oracle() {
    const std::vector<double> a{100, 200}, p{110, 180};
    // Independent hand arithmetic straight from the definitions.
    double abs_sum = 0, sq_sum = 0, pct_sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = a[i] - p[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        pct_sum += std::abs(e) / std::abs(a[i]);
    }
    const double n = static_cast<double>(a.size());
    const double mae = abs_sum / n, mse = sq_sum / n, rmse = std::sqrt(mse), mape = 100.0 * pct_sum / n;

    const auto m = evaluate::metrics(a, p);
    Verdict v;
    v.require(std::abs(m.mae - 15.0) <= 1e-9 && std::abs(m.mae - mae) <= 1e-9, "mae " + num(m.mae));
    v.require(std::abs(m.mse - 250.0) <= 1e-9 && std::abs(m.mse - mse) <= 1e-9, "mse " + num(m.mse));
    v.require(std::abs(m.rmse - 15.8113883) <= 1e-7 && std::abs(m.rmse - rmse) <= 1e-9, "rmse " + num(m.rmse));
    v.require(m.mape.has_value() && std::abs(*m.mape - mape) <= 1e-9, "mape " + (m.mape ? num(*m.mape) : std::string("absent")));
    if (v.ok) v.detail = "mae 15, mse 250, rmse " + num(m.rmse) + ", mape " + num(*m.mape) + " (|e|/|a| = 0.1, 0.1)";
    return v;
}

Verdict ar1_recovery() {
    const auto y = oracle::simulate_ar({0.7}, 0.0, 1.0, 500, 20240607);
    const auto fit = arima::fit_arima(hourly(y), {1, 0, 0});
    Verdict v;
    v.require(fit.params.phi.size() == 1 && std::abs(fit.params.phi[0] - 0.7) <= 0.1, "phi " + num(fit.params.phi.at(0)));
    if (v.ok) v.detail = "phi_hat " + num(fit.params.phi[0]);
    return v;
}

Verdict ar1_closed_form() {
    const auto y = oracle::simulate_ar({0.7}, 0.0, 1.0, 500, 20240607);
    const auto fitted = fit_model(hourly(y), spec(R"({"family":"arima","order":{"p":1,"d":0,"q":0},"include_intercept":false})"));
    const double phi = std::get<arima::FittedArima>(fitted.fitted).params.phi.at(0);
    const auto fc = forecast(fitted, Horizon(20));
    double worst = 0;
    for (std::size_t h = 1; h <= 20; ++h) worst = std::max(worst, std::abs(fc.steps[h - 1].point - std::pow(phi, h) * y.back()));
    Verdict v;
    v.require(worst <= 1e-6, "max deviation " + num(worst));
    if (v.ok) v.detail = "max deviation " + num(worst) + " over h=1..20";
    return v;
}

Verdict ar2_vs_ols() {
    const auto y = oracle::simulate_ar({0.5, -0.3}, 1.0, 1.0, 600, 77);
    const auto fit = arima::fit_arima(hourly(y), {2, 0, 0});
    std::vector<std::vector<double>> X;
    std::vector<double> target;
    for (std::size_t t = 2; t < y.size(); ++t) {
        X.push_back({1.0, y[t - 1], y[t - 2]});
        target.push_back(y[t]);
    }
    const auto ols = oracle::ols(X, target);
    const double d = std::max({std::abs(fit.params.intercept - ols.beta[0]), std::abs(fit.params.phi[0] - ols.beta[1]),
                               std::abs(fit.params.phi[1] - ols.beta[2])});
    Verdict v;
    v.require(d <= 1e-3, "max coefficient gap " + num(d));
    if (v.ok) v.detail = "max coefficient gap " + num(d);
    return v;
}

Verdict seasonal_ranking() {
    const auto s = synth::seasonal({.n = 240, .period = 12});
    const auto reports = evaluate::compare_models(
        s,
        {spec(R"({"family":"arima","order":{"p":1,"d":1,"q":1}})"),
         spec(R"({"family":"sarima","order":{"p":1,"d":1,"q":1},"seasonal_order":{"P":1,"D":1,"Q":1,"s":12}})")},
        {5, 12});
    Verdict v;
    v.require(reports.size() == 2 && reports[0].ok() && reports[1].ok(), "a candidate failed");
    if (!v.ok) return v;
    v.require(reports[0].model == "SARIMA(1,1,1)(1,1,1)_12", "winner " + reports[0].model);
    v.require(*reports[0].pooled.mape < *reports[1].pooled.mape, "mape not lower");
    v.detail = reports[0].model + " mape " + num(*reports[0].pooled.mape) + " vs " + reports[1].model + " mape " +
               num(*reports[1].pooled.mape);
    return v;
}

Verdict ets_oracles() {
    Verdict v;
    std::mt19937_64 rng(6);
    std::normal_distribution<double> e(0.0, 3.0);
    std::vector<double> walk(60);
    double level = 50.0;
    for (auto& x : walk) x = level += e(rng);
    ets::EtsOptions alpha_one;
    alpha_one.fixed.alpha = 1.0;
    const auto naive = ets::fit_ets(hourly(walk), {ets::TrendKind::none, ets::SeasonalKind::none, 0}, alpha_one);
    bool exact = true;
    for (std::size_t t = 1; t < walk.size(); ++t) exact = exact && naive.fitted_values[t] == walk[t - 1];
    v.require(exact, "alpha=1 one-step forecasts differ from lagged values");

    std::vector<double> ramp(30);
    for (std::size_t t = 0; t < ramp.size(); ++t) ramp[t] = 10.0 + 3.0 * static_cast<double>(t);
    const auto holt = ets::forecast_ets(ets::fit_ets(hourly(ramp), {ets::TrendKind::additive, ets::SeasonalKind::none, 0}), Horizon(10));
    double ramp_err = 0;
    for (std::size_t h = 0; h < 10; ++h) ramp_err = std::max(ramp_err, std::abs(holt.steps[h].point - (10.0 + 3.0 * static_cast<double>(30 + h))));
    v.require(ramp_err <= 1e-6, "holt ramp error " + num(ramp_err));

    ets::EtsParams p;
    p.alpha = 0.5;
    p.initial_level = 10.0;
    const std::vector<double> data{12, 8};
    const double sse = ets::ets_filter({ets::TrendKind::none, ets::SeasonalKind::none, 0}, p, data).sse;
    v.require(std::abs(sse - 13.0) <= 1e-12, "hand SSE " + num(sse));
    if (v.ok) v.detail = "alpha=1 exact, holt ramp error " + num(ramp_err) + ", hand SSE " + num(sse);
    return v;
}

Verdict ets_shift() {
    const auto s = synth::seasonal({.n = 72, .seed = 12});
    const double K = 1000.0;
    std::vector<double> moved;
    for (double x : s.values()) moved.push_back(x + K);
    const ets::EtsSpec hw{ets::TrendKind::additive, ets::SeasonalKind::additive, 12};
    const auto f1 = ets::forecast_ets(ets::fit_ets(s, hw), Horizon(12));
    const auto f2 = ets::forecast_ets(ets::fit_ets(s.with_values(moved), hw), Horizon(12));
    double worst = 0;
    for (std::size_t h = 0; h < 12; ++h) worst = std::max(worst, std::abs(f2.steps[h].point - (f1.steps[h].point + K)));
    Verdict v;
    v.require(worst <= 1e-6, "max deviation " + num(worst));
    if (v.ok) v.detail = "K=1000, max deviation " + num(worst);
    return v;
}

Verdict lstm_gradients() {
    std::mt19937_64 rng(7);
    Verdict v;
    std::string parts;
    for (std::size_t layers : {1u, 2u}) {
        lstm::LstmConfig cfg;
        cfg.layers = layers;
        cfg.hidden_units = 5;
        cfg.window = 6;
        const auto w = lstm::initialize(cfg, rng);
        const double err = lstm::gradient_check(w, lstm::WindowPair{{0.1, 0.5, -0.2, 0.8, 0.3, 0.0}, 0.7}, 1e-5);
        v.require(err <= 1e-4, std::to_string(layers) + " layer(s): " + num(err));
        parts += (parts.empty() ? "" : ", ") + std::to_string(layers) + " layer(s) " + num(err);
    }
    if (v.ok) v.detail = "relative error " + parts;
    return v;
}

Verdict lstm_overfit() {
    std::vector<double> wave(50);
    for (std::size_t t = 0; t < wave.size(); ++t) wave[t] = 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 12.0);
    lstm::LstmConfig cfg;
    cfg.hidden_units = 16;
    cfg.window = 10;
    cfg.epochs = 500;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.01;
    cfg.seed = 42;
    const auto pairs = lstm::make_windows(wave, cfg.window);
    const auto trained = lstm::train(pairs, {}, cfg);
    const double mse = lstm::mean_squared_error(trained.weights, pairs);
    Verdict v;
    v.require(mse < 1e-3, "training mse " + num(mse));
    if (v.ok) v.detail = "training mse " + num(mse) + " after 500 epochs";
    return v;
}

Verdict transform_round_trips() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.5, 500.0);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(120);
        for (auto& x : v) x = u(rng);
        const auto s = hourly(v);
        auto check = [&](const TimeSeries& back) {
            worst = std::max(worst, oracle::max_relative_error({back.values().begin(), back.values().end()}, v));
        };
        for (std::size_t lag : {1u, 12u}) {
            auto [d, rec] = preprocess::difference(s, lag);
            check(preprocess::undifference(d, rec));
        }
        auto [l, lrec] = preprocess::log_transform(s);
        check(preprocess::exp_inverse(l));
        for (auto m : {preprocess::NormalizeMethod::minmax, preprocess::NormalizeMethod::zscore}) {
            auto [n, nrec] = preprocess::normalize(s, m);
            check(preprocess::denormalize(n, nrec));
        }
    }
    Verdict v;
    v.require(worst <= 1e-12, "max relative error " + num(worst));
    if (v.ok) v.detail = "100 series, max relative error " + num(worst);
    return v;
}

Verdict cv_leakage() {
    const auto s = synth::seasonal({.n = 120});
    Verdict v;
    std::size_t folds_seen = 0;
    const evaluate::CvSettings settings{5, 6};
    const auto geometry = evaluate::fold_geometry(s.size(), settings);
    const evaluate::Forecaster spy = [&](const TimeSeries& train, Horizon h) {
        const auto& fold = geometry.at(folds_seen++);
        const Timestamp max_train = train.timestamp(train.size() - 1);
        const Timestamp min_test = s.timestamp(train.size());
        v.require(max_train < min_test, "fold " + std::to_string(folds_seen) + " trains past its test window");
        v.require(train.size() == fold.train_length, "fold " + std::to_string(folds_seen) + " train length");
        return std::vector<double>(h.steps, train[train.size() - 1]);
    };
    const auto report = evaluate::rolling_origin_cv(s, spy, settings);
    for (const auto& f : report.folds) v.require(f.train_end < f.test_start, "report fold order");
    // The same guard on real model folds.
    const auto real = evaluate::rolling_origin_cv(s, spec(R"({"family":"ets"})"), settings);
    for (const auto& f : real.folds) v.require(f.train_end < f.test_start, "model fold order");
    v.require(folds_seen == 5, "forecaster called " + std::to_string(folds_seen) + " times");
    if (v.ok) v.detail = "5 folds, max train timestamp < min test timestamp in each";
    return v;
}

Verdict anomaly_fixture() {
    const auto fixture = synth::traffic({});
    const auto fitted = fit_model(fixture.series, spec(R"({"family":"ets","ets":{"trend":"additive","seasonal":"additive","period":7}})"));
    const auto events = evaluate::detect_anomalies(fixture.series, fitted, 4.0);
    Verdict v;
    v.require(events.size() == 1 && events[0].index == fixture.spike_indices.at(0),
              std::to_string(events.size()) + " events at threshold 4");
    std::size_t previous = fixture.series.size() + 1;
    for (double thr = 0.5; thr <= 10.0; thr += 0.25) {
        const auto n = evaluate::detect_anomalies(fixture.series, fitted, thr).size();
        v.require(n <= previous, "count rises at threshold " + num(thr));
        previous = n;
    }
    if (v.ok) v.detail = "flagged index " + std::to_string(events[0].index) + " only; counts monotone over 0.5..10";
    return v;
}

Verdict cli_determinism(const std::string& binary) {
    const auto dir = harness::fresh_dir("accept-cli");
    const auto path = [&](const char* name) { return cli::quote((dir / name).string()); };
    Verdict v;
    std::ofstream(dir / "specs.json") << R"([{"family":"arima","order":{"p":1,"d":1,"q":0}},
        {"family":"sarima","order":{"p":0,"d":1,"q":1},"seasonal_order":{"P":0,"D":1,"Q":1,"s":12}},
        {"family":"ets","ets":{"trend":"additive","seasonal":"additive","period":12}},
        {"family":"lstm","lstm":{"hidden_units":4,"window":12,"epochs":5}}])";
    auto run = [&](const std::string& args) {
        const auto r = cli::run(binary, args, dir);
        v.require(r.exit_code == 0, "exit " + std::to_string(r.exit_code) + ": " + r.err);
        return r.out;
    };
    auto once = [&] {
        std::string all = run("synth --kind seasonal --n 96 --seed 3 --out " + path("d.csv"));
        all += cli::slurp(dir / "d.csv");
        for (const std::string fam : {"arima --p 1 --d 1 --q 0", "sarima --p 0 --d 1 --q 1 --P 0 --D 1 --Q 1 --s 12",
                                      "ets --trend additive --seasonal additive --period 12", "lstm --units 4 --window 12 --epochs 5"}) {
            all += run("fit --in " + path("d.csv") + " --out " + path("m.json") + " --seed 5 --format structured --family " + fam);
            all += cli::slurp(dir / "m.json");
        }
        return all + run("compare --in " + path("d.csv") + " --specs " + path("specs.json") +
                         " --folds 2 --horizon 6 --seed 5 --format structured");
    };
    const auto a = once();
    const auto b = once();
    v.require(!a.empty() && a == b, "outputs differ between runs");
    std::filesystem::remove_all(dir);
    if (v.ok) v.detail = std::to_string(a.size()) + " bytes identical across two runs";
    return v;
}

Verdict service_contract() {
    const auto dir = harness::fresh_dir("accept-svc");
    Verdict v;
    {
        service::ServiceConfig cfg;
        cfg.data_dir = dir;
        harness::LiveService live(cfg);
        auto c = live.client();
        auto status = [&](const httplib::Result& r, int want, const std::string& what) {
            v.require(r && r->status == want, what + " returned " + (r ? std::to_string(r->status) : std::string("nothing")));
            return r && r->status == want;
        };

        const auto full = synth::seasonal({.n = 132, .noise_sd = 1.0});
        const auto csv = to_csv(full.slice(0, 120));
        auto up = harness::upload(c, csv);
        if (!status(up, 201, "upload")) return v;
        auto again = harness::upload(c, csv, "renamed.csv");
        status(again, 200, "duplicate upload");
        const auto raw = harness::body_of(up)["dataset"]["id"].get<std::string>();
        v.require(again && harness::body_of(again)["dataset"]["id"] == raw, "duplicate upload changed the id");

        const auto steps = nlohmann::json::parse(R"([{"op":"log"},{"op":"normalize","method":"minmax"}])");
        auto pre = harness::post_json(c, "/datasets/" + raw + "/preprocess", {{"steps", steps}});
        if (!status(pre, 201, "preprocess")) return v;
        const auto derived = harness::body_of(pre)["dataset"]["id"].get<std::string>();

        auto submit = harness::post_json(c, "/models", {{"dataset_id", derived},
                                                        {"spec", nlohmann::json::parse(R"({"family":"ets","ets":{"trend":"additive","seasonal":"additive","period":12}})")}});
        if (!status(submit, 202, "fit")) return v;
        const auto job = harness::wait_for_job(c, harness::body_of(submit)["job"]["id"].get<std::string>());
        v.require(job["status"] == "done", "fit job ended " + job["status"].get<std::string>());
        const auto model = job["id"].get<std::string>();

        auto fr = harness::post_json(c, "/models/" + model + "/forecast", {{"horizon", 12}});
        if (!status(fr, 200, "forecast")) return v;
        const auto points = harness::body_of(fr)["forecast"]["steps"];
        double ape = 0;
        for (std::size_t h = 0; h < points.size(); ++h) ape += std::abs(points[h]["point"].get<double>() - full[120 + h]) / full[120 + h];
        const double mape = points.empty() ? 1e9 : 100.0 * ape / static_cast<double>(points.size());
        v.require(points.size() == 12 && mape < 5.0, "forecast not in original scale (mape " + num(mape) + ")");

        status(c.Get("/datasets/" + derived + "/anomalies?model=" + model), 200, "anomalies");
        if (v.ok) v.detail = "201/200/201/202/200/200, original-scale forecast mape " + num(mape);
    }
    std::filesystem::remove_all(dir);
    return v;
}

struct Criterion {
    const char* name;
    double limit_seconds;
    std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
    const std::string binary = argc > 1 ? argv[1] : "";
    const double none = 0;
    const std::vector<Criterion> criteria{
        {"metric oracle", none, metric_oracle},
        {"AR(1) coefficient recovery", 5, ar1_recovery},
        {"AR(1) forecast closed form", none, ar1_closed_form},
        {"ARIMA(2,0,0) matches least squares", none, ar2_vs_ols},
        {"seasonal model ranked first on seasonal data", 60, seasonal_ranking},
        {"ETS closed forms", none, ets_oracles},
        {"Holt-Winters shift equivariance", none, ets_shift},
        {"LSTM gradient check", 10, lstm_gradients},
        {"LSTM overfits a sinusoid", 60, lstm_overfit},
        {"transform round trips", none, transform_round_trips},
        {"cross-validation leakage guard", none, cv_leakage},
        {"anomaly fixture", none, anomaly_fixture},
        {"CLI pipeline determinism", none, [&] {
             if (binary.empty()) return Verdict{false, "no CLI path given"};
             return cli_determinism(binary);
         }},
        {"service contract", none, service_contract},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_seconds > 0 && secs > c.limit_seconds) v.require(false, "took longer than " + num(c.limit_seconds) + " s");
        if (!v.ok) ++failures;
        std::printf("%s  %-46s %s [%.2f s]\n", v.ok ? "PASS" : "FAIL", c.name, v.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
