#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "hybridcast/error.hpp"
#include "hybridcast/models/model.hpp"
#include "hybridcast/numeric/digest.hpp"
#include "hybridcast/service/store.hpp"

namespace hybridcast::service {

/// FIFO fit queue drained by a fixed set of worker threads. Job state is
/// persisted on every transition; construction re-queues jobs that were
/// queued or running when the previous process stopped.
class JobRunner {
public:
    JobRunner(Store& store, std::size_t workers, std::uint64_t seed) : store_(store), seed_(seed) {
        for (auto& job : store_.jobs()) {
            next_sequence_ = std::max(next_sequence_, job.sequence + 1);
            if (job.status == JobStatus::queued || job.status == JobStatus::running) {
                job.status = JobStatus::queued;
                job.started_at.reset();
                store_.put_job(job);
                queue_.push_back(job.id);
            }
        }
        for (std::size_t i = 0; i < std::max<std::size_t>(workers, 1); ++i) threads_.emplace_back([this] { work(); });
    }

    JobRunner(const JobRunner&) = delete;
    JobRunner& operator=(const JobRunner&) = delete;

    ~JobRunner() { shutdown(); }

    /// Stops accepting work and joins the workers after their current fit.
    /// Jobs still queued stay queued on disk.
    void shutdown() {
        {
            std::lock_guard lock(mutex_);
            stopping_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) {
            if (t.joinable()) t.join();
        }
        threads_.clear();
    }

    FitJob submit(const std::string& dataset_id, const ModelSpec& spec) {
        FitJob job;
        {
            std::lock_guard lock(mutex_);
            job.sequence = next_sequence_++;
        }
        job.dataset_id = dataset_id;
        job.spec = to_json(spec);
        job.spec_digest = spec_digest(spec);
        job.submitted_at = now_seconds();
        job.id = sha256_hex(dataset_id + "|" + job.spec_digest + "|" + std::to_string(job.sequence) + "|" +
                            std::to_string(std::chrono::system_clock::now().time_since_epoch().count()))
                     .substr(0, 24);
        store_.put_job(job);
        {
            std::lock_guard lock(mutex_);
            queue_.push_back(job.id);
        }
        cv_.notify_one();
        return job;
    }

    /// Blocks until the queue is empty and no worker is busy.
    void wait_idle() {
        std::unique_lock lock(mutex_);
        idle_cv_.wait(lock, [this] { return queue_.empty() && busy_ == 0; });
    }

private:
    void transition(FitJob& job, JobStatus to) {
        if (!transition_allowed(job.status, to)) {
            throw Error(ErrorCode::conflict, "job " + job.id + " cannot move from " + to_string(job.status) + " to " + to_string(to));
        }
        job.status = to;
        store_.put_job(job);
    }

    void run(const std::string& id) {
        auto job = store_.job(id);
        if (!job || job->status != JobStatus::queued) return;
        job->started_at = now_seconds();
        transition(*job, JobStatus::running);
        try {
            const auto spec = model_spec_from_json(job->spec);
            const auto record = store_.dataset(job->dataset_id);
            if (!record) throw Error(ErrorCode::not_found, "dataset " + job->dataset_id + " no longer exists");
            const auto series = store_.series(*record);
            const auto fitted = fit_model(series, spec, seed_);
            store_.put_model(job->id, fitted);
            job->summary = fit_summary(fitted);
            job->finished_at = now_seconds();
            transition(*job, JobStatus::done);
        } catch (const Error& e) {
            job->error = JobError{std::string(hybridcast::to_string(e.code())), e.what()};
            job->finished_at = now_seconds();
            transition(*job, JobStatus::failed);
        } catch (const std::exception& e) {
            job->error = JobError{"fit_failure", e.what()};
            job->finished_at = now_seconds();
            transition(*job, JobStatus::failed);
        }
    }

    void work() {
        for (;;) {
            std::string id;
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
                if (stopping_) return;
                id = queue_.front();
                queue_.pop_front();
                ++busy_;
            }
            run(id);
            {
                std::lock_guard lock(mutex_);
                --busy_;
            }
            idle_cv_.notify_all();
        }
    }

    Store& store_;
    std::uint64_t seed_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    std::deque<std::string> queue_;
    std::vector<std::thread> threads_;
    std::uint64_t next_sequence_ = 1;
    std::size_t busy_ = 0;
    bool stopping_ = false;
};

}  // namespace hybridcast::service
