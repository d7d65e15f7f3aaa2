// Command-line driver: synth, preprocess, fit, forecast, compare, anomalies, serve.
//
// Exit codes: 0 success, 1 operational failure, 2 usage error.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybridcast/evaluate/anomaly.hpp"
#include "hybridcast/evaluate/compare.hpp"
#include "hybridcast/evaluate/report.hpp"
#include "hybridcast/models/model.hpp"
#include "hybridcast/preprocess/pipeline.hpp"
#include "hybridcast/service/server.hpp"
#include "hybridcast/synth.hpp"
#include "hybridcast/timeseries.hpp"

namespace hc = hybridcast;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw hc::Error(hc::ErrorCode::not_found, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw hc::Error(hc::ErrorCode::data, "cannot write " + path);
    out << text;
}

/// op[:arg[:arg...]] or a JSON object.
json parse_step(const std::string& text) {
    if (!text.empty() && text.front() == '{') return json::parse(text);
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.empty()) throw hc::Error(hc::ErrorCode::argument, "empty --step");
    json j{{"op", parts[0]}};
    const auto& op = parts[0];
    if ((op == "impute" || op == "normalize") && parts.size() > 1) j["method"] = parts[1];
    if (op == "difference" && parts.size() > 1) j["lag"] = std::stoll(parts[1]);
    if (op == "outliers") {
        if (parts.size() > 1) j["detector"] = parts[1];
        if (parts.size() > 2) j["parameter"] = std::stod(parts[2]);
        if (parts.size() > 3) j["strategy"] = parts[3];
    }
    return j;
}

std::vector<hc::preprocess::PipelineStep> parse_steps(const std::vector<std::string>& steps) {
    json arr = json::array();
    for (const auto& s : steps) arr.push_back(parse_step(s));
    return hc::preprocess::pipeline_from_json(arr);
}

hc::TimeSeries load_series(const std::string& path, const std::string& ts_col, const std::string& val_col) {
    return hc::ingest_csv(read_text(path), ts_col, val_col, path);
}

std::string forecast_csv(const hc::Forecast& fc) {
    std::string out = "timestamp,point,lower,upper\n";
    for (const auto& s : fc.steps) {
        out += hc::format_timestamp(s.timestamp) + "," + hc::format_number(s.point) + ",";
        if (s.lower) out += hc::format_number(*s.lower);
        out += ",";
        if (s.upper) out += hc::format_number(*s.upper);
        out += "\n";
    }
    return out;
}

std::string forecast_table(const hc::Forecast& fc) {
    std::ostringstream os;
    os << "origin " << hc::format_timestamp(fc.origin) << ", confidence " << hc::format_number(fc.confidence)
       << (fc.intervals_available ? "" : " (intervals unavailable)") << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-22s %16s %16s %16s\n", "timestamp", "point", "lower", "upper");
    os << line;
    for (const auto& s : fc.steps) {
        std::snprintf(line, sizeof line, "%-22s %16.6f %16s %16s\n", hc::format_timestamp(s.timestamp).c_str(), s.point,
                      s.lower ? hc::format_number(*s.lower).c_str() : "-", s.upper ? hc::format_number(*s.upper).c_str() : "-");
        os << line;
    }
    return os.str();
}

std::string summary_table(const json& summary) {
    std::ostringstream os;
    os << "model:  " << summary.at("model").get<std::string>() << "\n";
    os << "family: " << summary.at("family").get<std::string>() << "\n";
    os << "digest: " << summary.at("spec_digest").get<std::string>() << "\n";
    for (const auto& [k, v] : summary.at("parameters").items()) os << "  " << k << " = " << v.dump() << "\n";
    for (const auto& [k, v] : summary.at("diagnostics").items()) os << "  " << k << " = " << v.dump() << "\n";
    return os.str();
}

std::atomic<hc::service::Service*> g_service{nullptr};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid time-series forecasting: ARIMA, SARIMA, ETS and LSTM"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a TOML/INI file");

    const std::vector<std::string> formats{"table", "structured", "csv"};

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic dataset as CSV");
    std::string synth_kind = "seasonal";
    std::size_t synth_n = 240, synth_period = 0, synth_spikes = 1;
    std::uint64_t synth_seed = 7;
    std::string synth_out;
    synth->add_option("--kind", synth_kind, "seasonal or traffic")->check(CLI::IsMember({"seasonal", "traffic"}));
    synth->add_option("--n", synth_n, "Number of points")->check(CLI::Range(12, 1000000));
    synth->add_option("--period", synth_period, "Seasonal period (default 12 seasonal, 7 traffic)");
    synth->add_option("--spikes", synth_spikes, "Injected spikes (traffic only)");
    synth->add_option("--seed", synth_seed, "Random seed");
    synth->add_option("--out", synth_out, "Output file (default stdout)");

    // preprocess
    auto* prep = app.add_subcommand("preprocess", "Apply a preprocessing pipeline to a CSV series");
    std::string prep_in, prep_out, prep_records, ts_col = "timestamp", val_col = "value";
    std::vector<std::string> prep_steps;
    prep->add_option("--in", prep_in, "Input CSV")->required()->check(CLI::ExistingFile);
    prep->add_option("--step", prep_steps, "Step: op[:arg...] or a JSON object; repeat in order")->required();
    prep->add_option("--out", prep_out, "Output CSV (default stdout)");
    prep->add_option("--records", prep_records, "Write transform records as JSON to this file");
    prep->add_option("--timestamp-column", ts_col);
    prep->add_option("--value-column", val_col);

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a model and write it to a file");
    std::string fit_in, fit_out, fit_family, fit_spec_file, fit_format = "table", fit_label;
    std::size_t p = 1, d = 0, q = 0, P = 0, D = 0, Q = 0, s = 0;
    std::optional<bool> intercept;
    std::string trend = "none", seasonal = "none";
    std::size_t period = 0;
    std::optional<double> alpha;
    hc::lstm::LstmConfig lstm_cfg;
    std::optional<std::size_t> window;
    double validation_fraction = 0.0;
    std::uint64_t seed = 42;
    std::vector<std::string> fit_steps;
    fit->add_option("--in", fit_in, "Input CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--out", fit_out, "Model file to write")->required();
    auto* family_opt = fit->add_option("--family", fit_family, "arima, sarima, ets or lstm")
                           ->check(CLI::IsMember({"arima", "sarima", "ets", "lstm"}));
    auto* spec_opt = fit->add_option("--spec", fit_spec_file, "Model spec JSON file")->check(CLI::ExistingFile);
    family_opt->excludes(spec_opt);
    fit->add_option("--label", fit_label);
    fit->add_option("--p", p);
    fit->add_option("--d", d);
    fit->add_option("--q", q);
    fit->add_option("--P", P);
    fit->add_option("--D", D);
    fit->add_option("--Q", Q);
    fit->add_option("--s", s, "Seasonal period for SARIMA");
    fit->add_option("--intercept", intercept, "Override the ARIMA intercept default");
    fit->add_option("--trend", trend)->check(CLI::IsMember({"none", "additive"}));
    fit->add_option("--seasonal", seasonal)->check(CLI::IsMember({"none", "additive", "multiplicative"}));
    fit->add_option("--period", period, "Seasonal period for ETS and the LSTM window default");
    fit->add_option("--alpha", alpha, "Fix the ETS level smoothing parameter");
    fit->add_option("--layers", lstm_cfg.layers);
    fit->add_option("--units", lstm_cfg.hidden_units);
    fit->add_option("--window", window);
    fit->add_option("--dropout", lstm_cfg.dropout);
    fit->add_option("--learning-rate", lstm_cfg.learning_rate);
    fit->add_option("--epochs", lstm_cfg.epochs);
    fit->add_option("--batch-size", lstm_cfg.batch_size);
    fit->add_option("--clip-norm", lstm_cfg.clip_norm);
    fit->add_option("--validation-fraction", validation_fraction);
    fit->add_option("--preprocess", fit_steps, "Invertible step applied before fitting: log, difference[:lag], normalize[:method]");
    fit->add_option("--seed", seed, "Seed for optimizer restarts and LSTM initialisation");
    fit->add_option("--format", fit_format)->check(CLI::IsMember({"table", "structured"}));
    fit->add_option("--timestamp-column", ts_col);
    fit->add_option("--value-column", val_col);

    // forecast
    auto* fc_cmd = app.add_subcommand("forecast", "Forecast from a fitted model file");
    std::string fc_model, fc_format = "csv", fc_out;
    std::size_t horizon = 12;
    double confidence = 0.95;
    fc_cmd->add_option("--model", fc_model, "Model file")->required()->check(CLI::ExistingFile);
    fc_cmd->add_option("--horizon", horizon)->check(CLI::PositiveNumber);
    fc_cmd->add_option("--confidence", confidence)->check(CLI::Range(0.0, 1.0));
    fc_cmd->add_option("--format", fc_format)->check(CLI::IsMember(formats));
    fc_cmd->add_option("--out", fc_out);

    // compare
    auto* cmp = app.add_subcommand("compare", "Rank model specs by rolling-origin cross-validation");
    std::string cmp_in, cmp_specs, cmp_format = "table", cmp_out;
    std::size_t folds = 5, cv_horizon = 1;
    bool cmp_parallel = false, timing = false;
    cmp->add_option("--in", cmp_in, "Input CSV")->required()->check(CLI::ExistingFile);
    cmp->add_option("--specs", cmp_specs, "JSON file holding an array of model specs")->required()->check(CLI::ExistingFile);
    cmp->add_option("--folds", folds)->check(CLI::Range(2, 1000));
    cmp->add_option("--horizon", cv_horizon)->check(CLI::PositiveNumber);
    cmp->add_option("--format", cmp_format)->check(CLI::IsMember(formats));
    cmp->add_option("--seed", seed, "Seed for ARIMA optimizer restarts");
    cmp->add_flag("--parallel", cmp_parallel, "Evaluate specs on separate threads");
    cmp->add_flag("--timing", timing, "Include wall-clock seconds in structured output");
    cmp->add_option("--out", cmp_out);
    cmp->add_option("--timestamp-column", ts_col);
    cmp->add_option("--value-column", val_col);

    // anomalies
    auto* anom = app.add_subcommand("anomalies", "Flag one-step residual outliers under a fitted model");
    std::string an_in, an_model, an_format = "table";
    double threshold = 4.0;
    anom->add_option("--in", an_in, "The CSV the model was fitted on")->required()->check(CLI::ExistingFile);
    anom->add_option("--model", an_model, "Model file")->required()->check(CLI::ExistingFile);
    anom->add_option("--threshold", threshold)->check(CLI::PositiveNumber);
    anom->add_option("--format", an_format)->check(CLI::IsMember(formats));
    anom->add_option("--timestamp-column", ts_col);
    anom->add_option("--value-column", val_col);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    int port = 8080;
    std::string host = "127.0.0.1", data_dir = "hybridcast-data";
    std::size_t workers = 2, max_upload = 8u << 20;
    serve->add_option("--port", port)->envname("HYBRIDCAST_PORT")->check(CLI::Range(0, 65535));
    serve->add_option("--host", host);
    serve->add_option("--data-dir", data_dir)->envname("HYBRIDCAST_DATA_DIR");
    serve->add_option("--workers", workers)->check(CLI::Range(1, 64));
    serve->add_option("--max-upload-bytes", max_upload);
    serve->add_option("--seed", seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*synth) {
            std::string csv;
            if (synth_kind == "seasonal") {
                hc::synth::SeasonalRecipe r;
                r.n = synth_n;
                r.period = synth_period ? synth_period : 12;
                r.seed = synth_seed;
                csv = hc::to_csv(hc::synth::seasonal(r));
            } else {
                hc::synth::TrafficRecipe r;
                r.n = synth_n;
                r.period = synth_period ? synth_period : 7;
                r.spikes = synth_spikes;
                r.seed = synth_seed;
                csv = hc::to_csv(hc::synth::traffic(r).series);
            }
            write_text(synth_out, csv);
            return kExitOk;
        }

        if (*prep) {
            const auto series = load_series(prep_in, ts_col, val_col);
            const auto result = hc::preprocess::apply_pipeline(series, parse_steps(prep_steps));
            write_text(prep_out, hc::to_csv(result.series));
            if (!prep_records.empty()) {
                json records = json::array();
                for (const auto& r : result.records) records.push_back(hc::preprocess::to_json(r));
                write_text(prep_records, records.dump(2) + "\n");
            }
            return kExitOk;
        }

        if (*fit) {
            if (fit_family.empty() && fit_spec_file.empty()) {
                std::cerr << "fit: one of --family or --spec is required\n";
                return kExitUsage;
            }
            json spec_json;
            if (!fit_spec_file.empty()) {
                spec_json = json::parse(read_text(fit_spec_file));
            } else {
                spec_json = {{"family", fit_family}};
                if (fit_family == "arima" || fit_family == "sarima") {
                    spec_json["order"] = {{"p", p}, {"d", d}, {"q", q}};
                    if (fit_family == "sarima") spec_json["seasonal_order"] = {{"P", P}, {"D", D}, {"Q", Q}, {"s", s}};
                    if (intercept) spec_json["include_intercept"] = *intercept;
                } else if (fit_family == "ets") {
                    spec_json["ets"] = {{"trend", trend}, {"seasonal", seasonal}, {"period", period}};
                    if (alpha) spec_json["ets"]["fixed"] = {{"alpha", *alpha}};
                } else {
                    lstm_cfg.seed = seed;
                    lstm_cfg.window = window.value_or(period >= 2 ? 2 * period : 10);
                    spec_json["lstm"] = hc::lstm::to_json(lstm_cfg);
                    spec_json["lstm"]["validation_fraction"] = validation_fraction;
                }
                if (!fit_steps.empty()) {
                    json steps = json::array();
                    for (const auto& st : fit_steps) steps.push_back(parse_step(st));
                    spec_json["preprocess"] = steps;
                }
                if (!fit_label.empty()) spec_json["label"] = fit_label;
            }
            const auto spec = hc::model_spec_from_json(spec_json);
            const auto series = load_series(fit_in, ts_col, val_col);
            const auto model = hc::fit_model(series, spec, seed);
            write_text(fit_out, hc::to_json(model).dump() + "\n");
            const auto summary = hc::fit_summary(model);
            std::cout << (fit_format == "structured" ? summary.dump(2) + "\n" : summary_table(summary));
            return kExitOk;
        }

        if (*fc_cmd) {
            hc::FittedModel model = [&] {
                try {
                    return hc::fitted_model_from_json(json::parse(read_text(fc_model)));
                } catch (const json::exception& e) {
                    throw hc::Error(hc::ErrorCode::configuration, std::string("corrupt model file: ") + e.what());
                }
            }();
            const auto fc = hc::forecast(model, hc::Horizon{horizon}, confidence);
            std::string text;
            if (fc_format == "csv") text = forecast_csv(fc);
            else if (fc_format == "structured") text = hc::to_json(fc).dump(2) + "\n";
            else text = forecast_table(fc);
            write_text(fc_out, text);
            return kExitOk;
        }

        if (*cmp) {
            const auto specs_json = json::parse(read_text(cmp_specs));
            if (!specs_json.is_array() || specs_json.empty()) {
                throw hc::Error(hc::ErrorCode::argument, "spec file must hold a non-empty JSON array");
            }
            std::vector<hc::ModelSpec> specs;
            for (std::size_t i = 0; i < specs_json.size(); ++i) {
                try {
                    specs.push_back(hc::model_spec_from_json(specs_json[i]));
                } catch (const hc::Error& e) {
                    throw hc::Error(e.code(), "spec " + std::to_string(i) + ": " + e.what(), i);
                }
            }
            const auto series = load_series(cmp_in, ts_col, val_col);
            const hc::evaluate::CvSettings cv{folds, cv_horizon};
            hc::evaluate::CompareOptions options;
            options.parallel = cmp_parallel;
            options.seed = seed;
            const auto board = hc::evaluate::compare_models(series, specs, cv, options);
            std::string text;
            if (cmp_format == "structured") {
                text = hc::evaluate::leaderboard_json(board, cv, timing).dump(2) + "\n";
            } else if (cmp_format == "csv") {
                text = "rank,model,spec_digest,mae,mse,rmse,mape,error\n";
                for (std::size_t i = 0; i < board.size(); ++i) {
                    const auto& r = board[i];
                    text += std::to_string(i + 1) + "," + hc::csv::escape(r.model) + "," + r.spec_digest + ",";
                    if (r.ok()) {
                        text += hc::format_number(r.pooled.mae) + "," + hc::format_number(r.pooled.mse) + "," +
                                hc::format_number(r.pooled.rmse) + "," + (r.pooled.mape ? hc::format_number(*r.pooled.mape) : "") + ",\n";
                    } else {
                        text += ",,,," + hc::csv::escape(*r.error) + "\n";
                    }
                }
            } else {
                text = hc::evaluate::leaderboard_table(board);
            }
            write_text(cmp_out, text);
            return kExitOk;
        }

        if (*anom) {
            const auto model = hc::fitted_model_from_json(json::parse(read_text(an_model)));
            const auto series = load_series(an_in, ts_col, val_col);
            const auto events = hc::evaluate::detect_anomalies(series, model, threshold);
            if (an_format == "structured") {
                json arr = json::array();
                for (const auto& e : events) arr.push_back(hc::evaluate::to_json(e));
                std::cout << json{{"threshold", threshold}, {"anomalies", arr}}.dump(2) << "\n";
            } else {
                std::cout << "timestamp,observed,expected,score,direction\n";
                for (const auto& e : events) {
                    std::cout << hc::format_timestamp(e.timestamp) << "," << hc::format_number(e.observed) << ","
                              << hc::format_number(e.expected) << "," << hc::format_number(e.score) << ","
                              << (e.direction == hc::evaluate::Direction::spike ? "spike" : "drop") << "\n";
                }
            }
            return kExitOk;
        }

        if (*serve) {
            // Signals are taken synchronously on a helper thread so shutdown
            // never runs inside a signal handler.
            sigset_t set;
            sigemptyset(&set);
            sigaddset(&set, SIGINT);
            sigaddset(&set, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &set, nullptr);

            hc::service::ServiceConfig config;
            config.data_dir = data_dir;
            config.workers = workers;
            config.max_upload_bytes = max_upload;
            config.seed = seed;
            hc::service::Service service(config);
            const auto bound = service.bind(host, port);
            if (!bound) {
                std::cerr << "error: cannot bind " << host << ":" << port << " (port busy?)\n";
                return kExitFailure;
            }
            std::cout << "listening on http://" << host << ":" << *bound << " (data in " << data_dir << ")" << std::endl;
            g_service = &service;
            std::thread waiter([&set] {
                int sig = 0;
                sigwait(&set, &sig);
                if (auto* s = g_service.load()) s->stop();
            });
            service.listen();
            g_service = nullptr;
            // Wake the waiter if the server stopped for another reason.
            pthread_kill(waiter.native_handle(), SIGTERM);
            waiter.join();
            std::cout << "stopped" << std::endl;
            return kExitOk;
        }
    } catch (const hc::Error& e) {
        std::cerr << "error: " << hc::to_string(e.code()) << ": " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
