#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridcast/csv.hpp"
#include "hybridcast/error.hpp"
#include "hybridcast/models/model.hpp"
#include "hybridcast/preprocess/pipeline.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::service {

[[nodiscard]] inline Timestamp now_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

struct DatasetRecord {
    std::string id;
    std::string name;
    Timestamp created_at = 0;
    std::size_t row_count = 0;
    std::size_t missing_count = 0;
    Timestamp start = 0;
    std::int64_t frequency = 1;
    std::optional<std::string> parent;
    std::vector<preprocess::PipelineStep> pipeline;
    std::vector<preprocess::TransformRecord> transforms;
};

inline nlohmann::json to_json(const DatasetRecord& d) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : d.pipeline) steps.push_back(preprocess::to_json(s));
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : d.transforms) records.push_back(preprocess::to_json(r));
    return {{"id", d.id},
            {"name", d.name},
            {"created_at", format_timestamp(d.created_at)},
            {"row_count", d.row_count},
            {"missing_count", d.missing_count},
            {"start", format_timestamp(d.start)},
            {"end", format_timestamp(d.start + static_cast<Timestamp>(d.row_count - 1) * d.frequency)},
            {"frequency", d.frequency},
            {"parent", d.parent ? nlohmann::json(*d.parent) : nlohmann::json(nullptr)},
            {"pipeline", steps},
            {"transforms", records}};
}

inline DatasetRecord dataset_record_from_json(const nlohmann::json& j) {
    DatasetRecord d;
    d.id = j.at("id").get<std::string>();
    d.name = j.at("name").get<std::string>();
    d.created_at = parse_timestamp(j.at("created_at").get<std::string>()).value_or(0);
    d.row_count = j.at("row_count").get<std::size_t>();
    d.missing_count = j.value("missing_count", std::size_t{0});
    d.start = parse_timestamp(j.at("start").get<std::string>()).value_or(0);
    d.frequency = j.at("frequency").get<std::int64_t>();
    if (!j.at("parent").is_null()) d.parent = j.at("parent").get<std::string>();
    d.pipeline = preprocess::pipeline_from_json(j.at("pipeline"));
    for (const auto& r : j.at("transforms")) d.transforms.push_back(preprocess::transform_from_json(r));
    return d;
}

enum class JobStatus { queued, running, done, failed };

[[nodiscard]] inline std::string to_string(JobStatus s) {
    switch (s) {
        case JobStatus::queued: return "queued";
        case JobStatus::running: return "running";
        case JobStatus::done: return "done";
        case JobStatus::failed: return "failed";
    }
    return "queued";
}

[[nodiscard]] inline JobStatus job_status_from_string(const std::string& s) {
    if (s == "queued") return JobStatus::queued;
    if (s == "running") return JobStatus::running;
    if (s == "done") return JobStatus::done;
    if (s == "failed") return JobStatus::failed;
    throw Error(ErrorCode::configuration, "unknown job status '" + s + "'");
}

/// queued -> running -> done | failed. A restart may move running back to queued.
[[nodiscard]] inline bool transition_allowed(JobStatus from, JobStatus to) {
    switch (from) {
        case JobStatus::queued: return to == JobStatus::running;
        case JobStatus::running: return to == JobStatus::done || to == JobStatus::failed;
        case JobStatus::done:
        case JobStatus::failed: return false;
    }
    return false;
}

struct JobError {
    std::string code;
    std::string message;
};

struct FitJob {
    std::string id;
    std::uint64_t sequence = 0;
    std::string dataset_id;
    nlohmann::json spec;
    std::string spec_digest;
    JobStatus status = JobStatus::queued;
    Timestamp submitted_at = 0;
    std::optional<Timestamp> started_at;
    std::optional<Timestamp> finished_at;
    std::optional<JobError> error;
    std::optional<nlohmann::json> summary;
};

inline nlohmann::json to_json(const FitJob& job) {
    auto opt_time = [](const std::optional<Timestamp>& t) { return t ? nlohmann::json(format_timestamp(*t)) : nlohmann::json(nullptr); };
    nlohmann::json j{{"id", job.id},
                     {"sequence", job.sequence},
                     {"dataset_id", job.dataset_id},
                     {"spec", job.spec},
                     {"spec_digest", job.spec_digest},
                     {"status", to_string(job.status)},
                     {"submitted_at", format_timestamp(job.submitted_at)},
                     {"started_at", opt_time(job.started_at)},
                     {"finished_at", opt_time(job.finished_at)}};
    j["error"] = job.error ? nlohmann::json{{"code", job.error->code}, {"message", job.error->message}} : nlohmann::json(nullptr);
    j["result"] = job.summary ? *job.summary : nlohmann::json(nullptr);
    return j;
}

inline FitJob fit_job_from_json(const nlohmann::json& j) {
    auto opt_time = [&](const char* key) -> std::optional<Timestamp> {
        if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
        return parse_timestamp(j.at(key).get<std::string>());
    };
    FitJob job;
    job.id = j.at("id").get<std::string>();
    job.sequence = j.at("sequence").get<std::uint64_t>();
    job.dataset_id = j.at("dataset_id").get<std::string>();
    job.spec = j.at("spec");
    job.spec_digest = j.at("spec_digest").get<std::string>();
    job.status = job_status_from_string(j.at("status").get<std::string>());
    job.submitted_at = parse_timestamp(j.at("submitted_at").get<std::string>()).value_or(0);
    job.started_at = opt_time("started_at");
    job.finished_at = opt_time("finished_at");
    if (!j.at("error").is_null()) job.error = JobError{j.at("error").at("code").get<std::string>(), j.at("error").at("message").get<std::string>()};
    if (!j.at("result").is_null()) job.summary = j.at("result");
    return job;
}

/// Flat-file persistence under one data directory:
///   datasets/<id>.csv, datasets/<id>.json, jobs/<id>.json, models/<id>.json
/// Every file is written to a temporary name and renamed into place.
class Store {
public:
    explicit Store(std::filesystem::path root) : root_(std::move(root)) {
        for (const char* sub : {"datasets", "jobs", "models"}) std::filesystem::create_directories(root_ / sub);
    }

    [[nodiscard]] const std::filesystem::path& root() const { return root_; }

    /// Stores a dataset unless one with the same id exists; returns the
    /// stored record and whether it was newly created.
    std::pair<DatasetRecord, bool> put_dataset(const DatasetRecord& record, const std::string& canonical_csv) {
        std::lock_guard lock(mutex_);
        if (auto existing = read_json(dataset_meta(record.id))) return {dataset_record_from_json(*existing), false};
        write_file(dataset_csv(record.id), canonical_csv);
        write_file(dataset_meta(record.id), to_json(record).dump(2));
        return {record, true};
    }

    [[nodiscard]] std::optional<DatasetRecord> dataset(const std::string& id) const {
        std::lock_guard lock(mutex_);
        if (!valid_id(id)) return std::nullopt;
        auto j = read_json(dataset_meta(id));
        if (!j) return std::nullopt;
        return dataset_record_from_json(*j);
    }

    [[nodiscard]] std::vector<DatasetRecord> datasets() const {
        std::lock_guard lock(mutex_);
        std::vector<DatasetRecord> out;
        for (const auto& entry : std::filesystem::directory_iterator(root_ / "datasets")) {
            if (entry.path().extension() != ".json") continue;
            if (auto j = read_json(entry.path())) out.push_back(dataset_record_from_json(*j));
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return std::tie(a.created_at, a.id) < std::tie(b.created_at, b.id); });
        return out;
    }

    /// The stored series on the record's grid.
    [[nodiscard]] TimeSeries series(const DatasetRecord& record) const {
        std::string text;
        {
            std::lock_guard lock(mutex_);
            text = read_file(dataset_csv(record.id));
        }
        const auto rows = csv::parse(text);
        std::vector<double> values;
        values.reserve(rows.size());
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& cell = rows[r].size() > 1 ? rows[r][1] : std::string();
            if (cell.empty()) {
                values.push_back(missing_value());
            } else {
                auto v = parse_number(cell);
                if (!v) throw Error(ErrorCode::ingest, "stored dataset " + record.id + " is corrupt at row " + std::to_string(r));
                values.push_back(*v);
            }
        }
        if (values.size() != record.row_count) throw Error(ErrorCode::ingest, "stored dataset " + record.id + " has the wrong length");
        return TimeSeries(record.start, record.frequency, std::move(values), record.name);
    }

    /// Transform records from the root dataset down to `record`, in the
    /// order they were applied.
    [[nodiscard]] std::vector<preprocess::TransformRecord> lineage_transforms(const DatasetRecord& record) const {
        std::vector<std::vector<preprocess::TransformRecord>> chain{record.transforms};
        std::optional<std::string> parent = record.parent;
        std::size_t guard = 0;
        while (parent && guard++ < 10000) {
            auto p = dataset(*parent);
            if (!p) break;
            chain.push_back(p->transforms);
            parent = p->parent;
        }
        std::vector<preprocess::TransformRecord> out;
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) out.insert(out.end(), it->begin(), it->end());
        return out;
    }

    void put_job(const FitJob& job) {
        std::lock_guard lock(mutex_);
        write_file(job_path(job.id), to_json(job).dump(2));
    }

    [[nodiscard]] std::optional<FitJob> job(const std::string& id) const {
        std::lock_guard lock(mutex_);
        if (!valid_id(id)) return std::nullopt;
        auto j = read_json(job_path(id));
        if (!j) return std::nullopt;
        return fit_job_from_json(*j);
    }

    [[nodiscard]] std::vector<FitJob> jobs() const {
        std::lock_guard lock(mutex_);
        std::vector<FitJob> out;
        for (const auto& entry : std::filesystem::directory_iterator(root_ / "jobs")) {
            if (entry.path().extension() != ".json") continue;
            if (auto j = read_json(entry.path())) out.push_back(fit_job_from_json(*j));
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.sequence < b.sequence; });
        return out;
    }

    void put_model(const std::string& job_id, const FittedModel& model) {
        std::lock_guard lock(mutex_);
        write_file(model_path(job_id), hybridcast::to_json(model).dump());
    }

    [[nodiscard]] FittedModel model(const std::string& job_id) const {
        std::string text;
        {
            std::lock_guard lock(mutex_);
            text = read_file(model_path(job_id));
        }
        return fitted_model_from_json(nlohmann::json::parse(text));
    }

private:
    static bool valid_id(const std::string& id) {
        return !id.empty() && id.size() <= 128 &&
               std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-'; });
    }

    [[nodiscard]] std::filesystem::path dataset_csv(const std::string& id) const { return root_ / "datasets" / (id + ".csv"); }
    [[nodiscard]] std::filesystem::path dataset_meta(const std::string& id) const { return root_ / "datasets" / (id + ".json"); }
    [[nodiscard]] std::filesystem::path job_path(const std::string& id) const { return root_ / "jobs" / (id + ".json"); }
    [[nodiscard]] std::filesystem::path model_path(const std::string& id) const { return root_ / "models" / (id + ".json"); }

    static std::string read_file(const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw Error(ErrorCode::not_found, "cannot read " + p.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    static std::optional<nlohmann::json> read_json(const std::filesystem::path& p) {
        if (!std::filesystem::exists(p)) return std::nullopt;
        return nlohmann::json::parse(read_file(p));
    }

    static void write_file(const std::filesystem::path& p, const std::string& content) {
        auto tmp = p;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorCode::data, "cannot write " + tmp.string());
            out << content;
        }
        std::filesystem::rename(tmp, p);
    }

    std::filesystem::path root_;
    mutable std::mutex mutex_;
};

}  // namespace hybridcast::service
