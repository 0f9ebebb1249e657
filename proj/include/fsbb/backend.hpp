#pragma once

// Batched bound evaluation. A batch of node inputs goes in, the bounds come
// back in input order. The serial backend is the reference; the worker
// backend splits the batch into contiguous chunks claimed by a fixed set of
// threads and writes every bound into its own pre-sized slot, so the output
// is identical for any worker count or chunk size.

#include "fsbb/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fsbb {

enum class BackendKind { serial, workers };

inline const char* to_string(BackendKind kind) { return kind == BackendKind::serial ? "serial" : "workers"; }

struct BackendConfig {
    BackendKind kind = BackendKind::serial;
    int workers = 1;
    std::size_t chunk = 256;

    void validate() const
    {
        if (workers < 1)
            throw std::invalid_argument("backend: worker count must be >= 1");
        if (chunk < 1)
            throw std::invalid_argument("backend: chunk size must be >= 1");
    }
};

struct BoundBatch {
    std::span<const BoundInput> inputs;
    const BoundTables* tables = nullptr;
};

struct BatchResult {
    std::vector<Time> lbs;
    std::chrono::nanoseconds eval_time{0};
};

struct BackendStats {
    std::uint64_t batches = 0;
    std::uint64_t nodes = 0;
    std::chrono::nanoseconds eval_time{0};
};

/// Raised when an input of a batch cannot be bounded; carries the position of
/// the first such input.
class BatchError : public std::runtime_error {
public:
    BatchError(std::size_t index, const std::string& what)
        : std::runtime_error("batch input " + std::to_string(index) + ": " + what), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Fixed set of threads running index-parallel loops with barrier semantics.
/// The calling thread takes part, so `workers` counts it.
class WorkerPool {
public:
    explicit WorkerPool(int workers)
    {
        if (workers < 1)
            throw std::invalid_argument("WorkerPool: worker count must be >= 1");
        threads_.reserve(static_cast<std::size_t>(workers - 1));
        for (int i = 1; i < workers; ++i)
            threads_.emplace_back([this] { worker_loop(); });
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool()
    {
        {
            std::lock_guard lock(mu_);
            stop_ = true;
        }
        work_cv_.notify_all();
        // jthread joins on destruction
    }

    int size() const noexcept { return static_cast<int>(threads_.size()) + 1; }

    /// Calls task(i) for every i in [0, tasks) and returns once all calls
    /// have finished. `task` must not throw.
    void run(std::size_t tasks, std::function<void(std::size_t)> task)
    {
        if (tasks == 0)
            return;
        {
            std::lock_guard lock(mu_);
            task_ = std::move(task);
            tasks_ = tasks;
            next_.store(0, std::memory_order_relaxed);
            active_ = threads_.size();
            ++generation_;
        }
        work_cv_.notify_all();
        drain();
        std::unique_lock lock(mu_);
        done_cv_.wait(lock, [this] { return active_ == 0; });
        task_ = nullptr;
    }

private:
    void drain()
    {
        for (std::size_t i = next_.fetch_add(1, std::memory_order_relaxed); i < tasks_;
             i = next_.fetch_add(1, std::memory_order_relaxed))
            task_(i);
    }

    void worker_loop()
    {
        std::uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock lock(mu_);
                work_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
                if (stop_)
                    return;
                seen = generation_;
            }
            drain();
            std::lock_guard lock(mu_);
            if (--active_ == 0)
                done_cv_.notify_one();
        }
    }

    std::mutex mu_;
    std::condition_variable work_cv_;
    std::condition_variable done_cv_;
    std::function<void(std::size_t)> task_;
    std::size_t tasks_ = 0;
    std::atomic<std::size_t> next_{0};
    std::size_t active_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
    std::vector<std::jthread> threads_;
};

class Backend {
public:
    virtual ~Backend() = default;

    virtual BackendKind kind() const noexcept = 0;
    virtual int workers() const noexcept = 0;

    BatchResult evaluate(const BoundBatch& batch)
    {
        if (batch.tables == nullptr)
            throw std::invalid_argument("evaluate: batch has no bound tables");
        if (batch.inputs.empty())
            throw std::invalid_argument("evaluate: empty batch");

        BatchResult result;
        result.lbs.assign(batch.inputs.size(), 0);
        const auto start = std::chrono::steady_clock::now();
        evaluate_into(batch.inputs, *batch.tables, result.lbs);
        result.eval_time = std::chrono::steady_clock::now() - start;

        ++stats_.batches;
        stats_.nodes += batch.inputs.size();
        stats_.eval_time += result.eval_time;
        return result;
    }

    const BackendStats& stats() const noexcept { return stats_; }
    void reset_stats() noexcept { stats_ = {}; }

protected:
    virtual void evaluate_into(std::span<const BoundInput> inputs, const BoundTables& tables,
                               std::span<Time> out) = 0;

private:
    BackendStats stats_;
};

class SerialBackend final : public Backend {
public:
    BackendKind kind() const noexcept override { return BackendKind::serial; }
    int workers() const noexcept override { return 1; }

protected:
    void evaluate_into(std::span<const BoundInput> inputs, const BoundTables& tables, std::span<Time> out) override
    {
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            try {
                out[i] = compute_lb(inputs[i], tables);
            } catch (const std::exception& e) {
                throw BatchError(i, e.what());
            }
        }
    }
};

class WorkerBackend final : public Backend {
public:
    WorkerBackend(int workers, std::size_t chunk) : pool_(workers), chunk_(chunk)
    {
        if (chunk < 1)
            throw std::invalid_argument("backend: chunk size must be >= 1");
    }

    BackendKind kind() const noexcept override { return BackendKind::workers; }
    int workers() const noexcept override { return pool_.size(); }
    std::size_t chunk() const noexcept { return chunk_; }

protected:
    void evaluate_into(std::span<const BoundInput> inputs, const BoundTables& tables, std::span<Time> out) override
    {
        const std::size_t chunks = (inputs.size() + chunk_ - 1) / chunk_;
        std::mutex error_mu;
        std::size_t error_index = inputs.size();
        std::string error_what;

        pool_.run(chunks, [&](std::size_t c) {
            const std::size_t begin = c * chunk_;
            const std::size_t end = std::min(begin + chunk_, inputs.size());
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    out[i] = compute_lb(inputs[i], tables);
                } catch (const std::exception& e) {
                    std::lock_guard lock(error_mu);
                    if (i < error_index) {
                        error_index = i;
                        error_what = e.what();
                    }
                    return;
                }
            }
        });

        if (error_index < inputs.size())
            throw BatchError(error_index, error_what);
    }

private:
    WorkerPool pool_;
    std::size_t chunk_;
};

inline std::unique_ptr<Backend> make_backend(const BackendConfig& cfg)
{
    cfg.validate();
    if (cfg.kind == BackendKind::serial)
        return std::make_unique<SerialBackend>();
    return std::make_unique<WorkerBackend>(cfg.workers, cfg.chunk);
}

/// One-shot evaluation with a freshly built backend.
inline BatchResult evaluate(const BoundBatch& batch, const BackendConfig& cfg)
{
    return make_backend(cfg)->evaluate(batch);
}

} // namespace fsbb
