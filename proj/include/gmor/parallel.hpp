// Minimal persistent worker pool for deterministic batch fan-out: tasks are
// split statically across workers, so results never depend on scheduling.
#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gmor::detail {

class WorkerPool {
public:
    explicit WorkerPool(int threads) : threads_(threads < 1 ? 1 : threads) {
        workers_.reserve(static_cast<std::size_t>(threads_ - 1));
        for (int i = 1; i < threads_; ++i) workers_.emplace_back([this, i] { worker_loop(i); });
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool() {
        {
            std::lock_guard lk(mu_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

    int thread_count() const { return threads_; }

    /// Invokes fn(task_index, worker_index) for every task in [0, n_tasks).
    /// Worker 0 is the calling thread; blocks until the batch completes.
    void run_batch(int n_tasks, const std::function<void(int, int)>& fn) {
        if (n_tasks <= 0) return;
        if (threads_ == 1 || n_tasks == 1) {
            for (int t = 0; t < n_tasks; ++t) fn(t, 0);
            return;
        }
        {
            std::lock_guard lk(mu_);
            fn_ = &fn;
            n_tasks_ = n_tasks;
            remaining_ = threads_ - 1;
            ++generation_;
        }
        cv_.notify_all();
        run_share(fn, n_tasks, 0);
        std::unique_lock lk(mu_);
        done_cv_.wait(lk, [&] { return remaining_ == 0; });
        fn_ = nullptr;
    }

private:
    void run_share(const std::function<void(int, int)>& fn, int n_tasks, int worker) const {
        const int lo = static_cast<int>(static_cast<long>(n_tasks) * worker / threads_);
        const int hi = static_cast<int>(static_cast<long>(n_tasks) * (worker + 1) / threads_);
        for (int t = lo; t < hi; ++t) fn(t, worker);
    }

    void worker_loop(int worker) {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(int, int)>* fn = nullptr;
            int n_tasks = 0;
            {
                std::unique_lock lk(mu_);
                cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
                fn = fn_;
                n_tasks = n_tasks_;
            }
            run_share(*fn, n_tasks, worker);
            {
                std::lock_guard lk(mu_);
                if (--remaining_ == 0) done_cv_.notify_all();
            }
        }
    }

    const int threads_;
    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(int, int)>* fn_ = nullptr;
    int n_tasks_ = 0;
    int remaining_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

}  // namespace gmor::detail
