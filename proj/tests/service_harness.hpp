#pragma once

// In-process service on an ephemeral port with its own data directory.

#include <chrono>
#include <filesystem>
#include <random>
#include <string>
#include <thread>

#include "hybridcast/service/server.hpp"

namespace harness {

inline std::filesystem::path fresh_dir(const std::string& tag) {
    std::random_device rd;
    auto dir = std::filesystem::temp_directory_path() / ("hybridcast-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(dir);
    return dir;
}

class LiveService {
public:
    explicit LiveService(hybridcast::service::ServiceConfig config) : service_(std::move(config)) {
        const auto bound = service_.bind("127.0.0.1", 0);
        if (!bound) throw std::runtime_error("could not bind a test port");
        port_ = *bound;
        thread_ = std::thread([this] { service_.listen(); });
        service_.wait_until_ready();
    }

    ~LiveService() {
        service_.stop();
        if (thread_.joinable()) thread_.join();
    }

    LiveService(const LiveService&) = delete;
    LiveService& operator=(const LiveService&) = delete;

    [[nodiscard]] httplib::Client client() const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(120, 0);
        return c;
    }

    hybridcast::service::Service& service() { return service_; }
    [[nodiscard]] int port() const { return port_; }

private:
    hybridcast::service::Service service_;
    int port_ = 0;
    std::thread thread_;
};

inline nlohmann::json body_of(const httplib::Result& r) { return nlohmann::json::parse(r->body); }

inline httplib::Result upload(httplib::Client& c, const std::string& csv, const std::string& filename = "series.csv") {
    httplib::MultipartFormDataItems items{{"file", csv, filename, "text/csv"}};
    return c.Post("/datasets", items);
}

inline httplib::Result post_json(httplib::Client& c, const std::string& path, const nlohmann::json& body) {
    return c.Post(path, body.dump(), "application/json");
}

/// Polls a fit job until it leaves queued/running; returns the final job JSON.
inline nlohmann::json wait_for_job(httplib::Client& c, const std::string& id, std::chrono::seconds limit = std::chrono::seconds(120)) {
    const auto deadline = std::chrono::steady_clock::now() + limit;
    for (;;) {
        auto r = c.Get("/models/" + id);
        if (r && r->status == 200) {
            auto job = body_of(r).at("job");
            const auto status = job.at("status").get<std::string>();
            if (status != "queued" && status != "running") return job;
        }
        if (std::chrono::steady_clock::now() > deadline) throw std::runtime_error("job " + id + " did not finish");
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
}

}  // namespace harness
