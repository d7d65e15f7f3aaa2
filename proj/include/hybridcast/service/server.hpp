#pragma once

#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridcast/error.hpp"
#include "hybridcast/evaluate/anomaly.hpp"
#include "hybridcast/evaluate/compare.hpp"
#include "hybridcast/models/model.hpp"
#include "hybridcast/numeric/digest.hpp"
#include "hybridcast/preprocess/pipeline.hpp"
#include "hybridcast/service/jobs.hpp"
#include "hybridcast/service/store.hpp"
#include "hybridcast/timeseries.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro
// that collides with Eigen parameter names.
#include <httplib.h>

namespace hybridcast::service {

inline constexpr const char* kApiVersion = "1";

struct ServiceConfig {
    std::filesystem::path data_dir = "hybridcast-data";
    std::size_t workers = 2;
    std::size_t max_upload_bytes = 8u << 20;
    std::uint64_t seed = 20240607;
    std::size_t default_folds = 5;
};

namespace detail {

inline void send(httplib::Response& res, int status, nlohmann::json body) {
    body["api_version"] = kApiVersion;
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, std::string code, const std::string& message,
                       std::optional<std::size_t> step = std::nullopt, nlohmann::json extra = nullptr) {
    nlohmann::json body{{"code", std::move(code)}, {"message", message}};
    if (step) body["step"] = *step;
    if (!extra.is_null()) body["details"] = std::move(extra);
    send(res, status, std::move(body));
}

inline void send_error(httplib::Response& res, int status, const Error& e) {
    send_error(res, status, std::string(to_string(e.code())), e.what(), e.index());
}

inline std::optional<nlohmann::json> parse_body(const httplib::Request& req, httplib::Response& res) {
    try {
        auto j = nlohmann::json::parse(req.body);
        if (!j.is_object()) {
            send_error(res, 400, "bad_request", "request body must be a JSON object");
            return std::nullopt;
        }
        return j;
    } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, "bad_request", std::string("malformed JSON: ") + e.what());
        return std::nullopt;
    }
}

}  // namespace detail

/// HTTP API over a flat-file store and a background fit queue.
class Service {
public:
    explicit Service(ServiceConfig config)
        : config_(std::move(config)), store_(config_.data_dir), runner_(store_, config_.workers, config_.seed) {
        routes();
    }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    ~Service() {
        stop();
        runner_.shutdown();
    }

    /// Binds to `port` (0 picks a free one). Returns the bound port or
    /// nullopt when the address is unavailable.
    std::optional<int> bind(const std::string& host, int port) {
        if (port == 0) {
            const int p = server_.bind_to_any_port(host);
            if (p <= 0) return std::nullopt;
            return p;
        }
        if (!server_.bind_to_port(host, port)) return std::nullopt;
        return port;
    }

    /// Serves until stop() is called.
    bool listen() { return server_.listen_after_bind(); }

    void stop() {
        if (server_.is_running()) server_.stop();
    }

    void wait_until_ready() { server_.wait_until_ready(); }

    Store& store() { return store_; }
    JobRunner& runner() { return runner_; }

private:
    void routes() {
        server_.set_payload_max_length(config_.max_upload_bytes);
        // The library default adds SO_REUSEPORT, which lets a second process
        // share a port that is already in use. Keep only SO_REUSEADDR.
        server_.set_socket_options([](socket_t sock) {
            int yes = 1;
            ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
        });
        server_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                     {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                     {"Access-Control-Allow-Headers", "Content-Type"}});
        server_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return;
            if (res.status == 413) {
                detail::send_error(res, 413, "payload_too_large", "request body exceeds the upload cap");
            } else if (res.status == 404) {
                detail::send_error(res, 404, "not_found", "no such resource");
            } else {
                detail::send_error(res, res.status, "http_error", httplib::status_message(res.status));
            }
        });
        server_.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const Error& e) {
                detail::send_error(res, 500, e);
            } catch (const std::exception& e) {
                detail::send_error(res, 500, "internal_error", e.what());
            }
        });
        server_.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server_.Get("/datasets", [this](const httplib::Request&, httplib::Response& res) {
            nlohmann::json list = nlohmann::json::array();
            for (const auto& d : store_.datasets()) list.push_back(to_json(d));
            detail::send(res, 200, {{"datasets", list}});
        });
        server_.Post("/datasets", [this](const httplib::Request& req, httplib::Response& res) { upload(req, res); });
        server_.Get(R"(/datasets/([A-Za-z0-9-]+))", [this](const httplib::Request& req, httplib::Response& res) { get_dataset(req, res); });
        server_.Post(R"(/datasets/([A-Za-z0-9-]+)/preprocess)",
                     [this](const httplib::Request& req, httplib::Response& res) { preprocess(req, res); });
        server_.Get(R"(/datasets/([A-Za-z0-9-]+)/anomalies)",
                    [this](const httplib::Request& req, httplib::Response& res) { anomalies(req, res); });
        server_.Get("/models", [this](const httplib::Request&, httplib::Response& res) {
            nlohmann::json list = nlohmann::json::array();
            for (const auto& j : store_.jobs()) list.push_back(to_json(j));
            detail::send(res, 200, {{"jobs", list}});
        });
        server_.Post("/models", [this](const httplib::Request& req, httplib::Response& res) { submit(req, res); });
        server_.Get(R"(/models/([A-Za-z0-9-]+))", [this](const httplib::Request& req, httplib::Response& res) {
            auto job = store_.job(req.matches[1]);
            if (!job) return detail::send_error(res, 404, "not_found", "unknown model job " + std::string(req.matches[1]));
            detail::send(res, 200, {{"job", to_json(*job)}});
        });
        server_.Post(R"(/models/([A-Za-z0-9-]+)/forecast)",
                     [this](const httplib::Request& req, httplib::Response& res) { forecast_job(req, res); });
        server_.Post("/compare", [this](const httplib::Request& req, httplib::Response& res) { compare(req, res); });
    }

    void upload(const httplib::Request& req, httplib::Response& res) {
        if (!req.has_file("file")) return detail::send_error(res, 400, "bad_request", "multipart field 'file' is required");
        const auto file = req.get_file_value("file");
        const auto ts_col = req.has_file("timestamp_column") ? req.get_file_value("timestamp_column").content : std::string("timestamp");
        const auto val_col = req.has_file("value_column") ? req.get_file_value("value_column").content : std::string("value");
        std::optional<TimeSeries> parsed;
        try {
            parsed = ingest_csv(file.content, ts_col, val_col, file.filename.empty() ? "dataset" : file.filename);
        } catch (const Error& e) {
            return detail::send_error(res, 400, e);
        }
        const TimeSeries& series = *parsed;
        const auto canonical = to_csv(series);
        DatasetRecord record;
        record.id = sha256_hex(canonical);
        record.name = series.name();
        record.created_at = now_seconds();
        record.row_count = series.size();
        record.start = series.start();
        record.frequency = series.frequency();
        for (double v : series.values()) record.missing_count += is_missing(v) ? 1 : 0;
        const auto [stored, created] = store_.put_dataset(record, canonical);
        detail::send(res, created ? 201 : 200, {{"dataset", to_json(stored)}});
    }

    void get_dataset(const httplib::Request& req, httplib::Response& res) {
        const auto record = store_.dataset(req.matches[1]);
        if (!record) return detail::send_error(res, 404, "not_found", "unknown dataset " + std::string(req.matches[1]));
        nlohmann::json body{{"dataset", to_json(*record)}};
        if (req.get_param_value("values") == "true") {
            const auto series = store_.series(*record);
            nlohmann::json points = nlohmann::json::array();
            for (std::size_t i = 0; i < series.size(); ++i) {
                points.push_back({{"timestamp", format_timestamp(series.timestamp(i))},
                                  {"value", is_missing(series[i]) ? nlohmann::json(nullptr) : nlohmann::json(series[i])}});
            }
            body["values"] = points;
        }
        detail::send(res, 200, body);
    }

    void preprocess(const httplib::Request& req, httplib::Response& res) {
        const auto source = store_.dataset(req.matches[1]);
        if (!source) return detail::send_error(res, 404, "not_found", "unknown dataset " + std::string(req.matches[1]));
        const auto body = detail::parse_body(req, res);
        if (!body) return;
        if (!body->contains("steps") || !body->at("steps").is_array() || body->at("steps").empty()) {
            return detail::send_error(res, 422, "argument_error", "'steps' must be a non-empty array");
        }
        try {
            const auto steps = preprocess::pipeline_from_json(body->at("steps"));
            const auto series = store_.series(*source);
            auto result = preprocess::apply_pipeline(series, steps);
            nlohmann::json pipeline_json = nlohmann::json::array();
            for (const auto& s : steps) pipeline_json.push_back(preprocess::to_json(s));
            const auto canonical = to_csv(result.series);
            DatasetRecord record;
            record.id = sha256_hex(canonical + "\n" + source->id + "\n" + pipeline_json.dump());
            record.name = body->value("name", source->name + "+preprocessed");
            record.created_at = now_seconds();
            record.row_count = result.series.size();
            record.start = result.series.start();
            record.frequency = result.series.frequency();
            for (double v : result.series.values()) record.missing_count += is_missing(v) ? 1 : 0;
            record.parent = source->id;
            record.pipeline = steps;
            record.transforms = std::move(result.records);
            const auto [stored, created] = store_.put_dataset(record, canonical);
            detail::send(res, created ? 201 : 200, {{"dataset", to_json(stored)}});
        } catch (const Error& e) {
            detail::send_error(res, 422, e);
        }
    }

    void submit(const httplib::Request& req, httplib::Response& res) {
        const auto body = detail::parse_body(req, res);
        if (!body) return;
        if (!body->contains("dataset_id") || !body->at("dataset_id").is_string()) {
            return detail::send_error(res, 422, "argument_error", "'dataset_id' is required");
        }
        const auto id = body->at("dataset_id").get<std::string>();
        if (!store_.dataset(id)) return detail::send_error(res, 404, "not_found", "unknown dataset " + id);
        try {
            const auto spec = model_spec_from_json(body->value("spec", nlohmann::json()));
            const auto job = runner_.submit(id, spec);
            detail::send(res, 202, {{"job", to_json(job)}});
        } catch (const Error& e) {
            detail::send_error(res, 422, e);
        }
    }

    void forecast_job(const httplib::Request& req, httplib::Response& res) {
        const auto job = store_.job(req.matches[1]);
        if (!job) return detail::send_error(res, 404, "not_found", "unknown model job " + std::string(req.matches[1]));
        const auto body = detail::parse_body(req, res);
        if (!body) return;
        if (job->status != JobStatus::done) {
            return detail::send_error(res, 409, "conflict", "job is " + to_string(job->status) + ", not done");
        }
        const auto& h = body->contains("horizon") ? body->at("horizon") : nlohmann::json();
        if (!h.is_number_integer() || h.get<long long>() < 1 || h.get<long long>() > 100000) {
            return detail::send_error(res, 422, "argument_error", "'horizon' must be a positive integer");
        }
        const auto& c = body->contains("confidence") ? body->at("confidence") : nlohmann::json(0.95);
        if (!c.is_number() || !(c.get<double>() > 0.0 && c.get<double>() < 1.0)) {
            return detail::send_error(res, 422, "argument_error", "'confidence' must lie in (0,1)");
        }
        try {
            const auto model = store_.model(job->id);
            auto fc = hybridcast::forecast(model, Horizon{h.get<std::size_t>()}, c.get<double>());
            // Return to the scale of the uploaded data.
            const auto record = store_.dataset(job->dataset_id);
            const auto lineage = record ? store_.lineage_transforms(*record) : std::vector<preprocess::TransformRecord>{};
            if (!lineage.empty()) {
                const auto points = preprocess::invert_pipeline(fc.points(), lineage);
                const bool keep = fc.intervals_available && preprocess::bounds_survive(lineage);
                for (std::size_t i = 0; i < fc.steps.size(); ++i) {
                    auto& st = fc.steps[i];
                    st.point = points[i];
                    if (keep) {
                        st.lower = preprocess::invert_pipeline({*st.lower}, lineage).front();
                        st.upper = preprocess::invert_pipeline({*st.upper}, lineage).front();
                    } else {
                        st.lower.reset();
                        st.upper.reset();
                    }
                }
                fc.intervals_available = keep;
            }
            detail::send(res, 200, {{"job_id", job->id}, {"dataset_id", job->dataset_id}, {"forecast", to_json(fc)}});
        } catch (const Error& e) {
            detail::send_error(res, 422, e);
        }
    }

    void compare(const httplib::Request& req, httplib::Response& res) {
        const auto body = detail::parse_body(req, res);
        if (!body) return;
        const auto id = body->value("dataset_id", std::string());
        const auto record = store_.dataset(id);
        if (!record) return detail::send_error(res, 404, "not_found", "unknown dataset '" + id + "'");
        if (!body->contains("specs") || !body->at("specs").is_array() || body->at("specs").empty()) {
            return detail::send_error(res, 422, "argument_error", "'specs' must be a non-empty array");
        }
        std::vector<ModelSpec> specs;
        for (std::size_t i = 0; i < body->at("specs").size(); ++i) {
            try {
                specs.push_back(model_spec_from_json(body->at("specs")[i]));
            } catch (const Error& e) {
                return detail::send_error(res, 422, std::string(to_string(e.code())), "spec " + std::to_string(i) + ": " + e.what(), i);
            }
        }
        evaluate::CvSettings cv{config_.default_folds, 1};
        const auto cvj = body->value("cv", nlohmann::json::object());
        try {
            cv.folds = detail_size(cvj, "folds", cv.folds);
            cv.horizon = detail_size(cvj, "horizon", cv.horizon);
        } catch (const Error& e) {
            return detail::send_error(res, 422, e);
        }
        try {
            const auto series = store_.series(*record);
            (void)evaluate::fold_geometry(series.size(), cv, 1);
            evaluate::CompareOptions options;
            options.seed = config_.seed;
            const auto board = evaluate::compare_models(series, specs, cv, options);
            auto out = evaluate::leaderboard_json(board, cv);
            out["dataset_id"] = id;
            detail::send(res, 200, out);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::comparison) return detail::send_error(res, 500, e);
            detail::send_error(res, 422, e);
        }
    }

    void anomalies(const httplib::Request& req, httplib::Response& res) {
        const auto record = store_.dataset(req.matches[1]);
        if (!record) return detail::send_error(res, 404, "not_found", "unknown dataset " + std::string(req.matches[1]));
        const auto job_id = req.get_param_value("model");
        const auto job = store_.job(job_id);
        if (!job) return detail::send_error(res, 404, "not_found", "unknown model job '" + job_id + "'");
        if (job->dataset_id != record->id) return detail::send_error(res, 409, "conflict", "model was fitted on another dataset");
        if (job->status != JobStatus::done) return detail::send_error(res, 409, "conflict", "job is " + to_string(job->status) + ", not done");
        double threshold = 4.0;
        if (req.has_param("threshold")) {
            auto t = parse_number(req.get_param_value("threshold"));
            if (!t || !(*t > 0.0) || !std::isfinite(*t)) return detail::send_error(res, 422, "argument_error", "'threshold' must be a positive number");
            threshold = *t;
        }
        try {
            const auto series = store_.series(*record);
            const auto model = store_.model(job->id);
            nlohmann::json events = nlohmann::json::array();
            for (const auto& e : evaluate::detect_anomalies(series, model, threshold)) events.push_back(evaluate::to_json(e));
            detail::send(res, 200, {{"dataset_id", record->id}, {"job_id", job->id}, {"threshold", threshold}, {"anomalies", events}});
        } catch (const Error& e) {
            detail::send_error(res, 422, e);
        }
    }

    static std::size_t detail_size(const nlohmann::json& j, const char* key, std::size_t fallback) {
        if (!j.contains(key)) return fallback;
        const auto& v = j.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 1) throw Error(ErrorCode::argument, std::string("'") + key + "' must be a positive integer");
        return v.get<std::size_t>();
    }

    ServiceConfig config_;
    Store store_;
    JobRunner runner_;
    httplib::Server server_;
};

}  // namespace hybridcast::service
