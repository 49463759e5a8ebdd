#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace nervc {

// Runtime knobs.
//   NERVC_THREADS        caps worker threads (default: hardware concurrency)
//   NERVC_DETERMINISTIC  =1 forces single-thread sequential execution
inline bool deterministic_mode() {
    static const bool det = [] {
        const char* v = std::getenv("NERVC_DETERMINISTIC");
        return v != nullptr && v[0] == '1';
    }();
    return det;
}

namespace detail {
inline int& thread_override() {
    static int n = 0;  // 0 = not overridden
    return n;
}
inline bool& in_pool_worker() {
    thread_local bool flag = false;
    return flag;
}
}  // namespace detail

inline int max_threads() {
    if (deterministic_mode()) return 1;
    if (detail::thread_override() > 0) return detail::thread_override();
    static const int env_threads = [] {
        const char* v = std::getenv("NERVC_THREADS");
        if (v != nullptr) {
            int n = std::atoi(v);
            if (n > 0) return n;
        }
        unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }();
    return env_threads;
}

// Programmatic cap, used by the benchmark harness. 0 restores the default.
inline void set_threads(int n) { detail::thread_override() = n; }

// Persistent pool; run() carves [0, n) into contiguous chunks pulled from a
// shared counter. The calling thread participates. Calls made from inside a
// worker run inline, so nested parallel sections cannot deadlock.
class ThreadPool {
public:
    static ThreadPool& instance() {
        static ThreadPool pool;
        return pool;
    }

    void run(int64_t n, int threads, int64_t grain, const std::function<void(int64_t, int64_t)>& fn) {
        if (n <= 0) return;
        if (grain <= 0) grain = std::max<int64_t>(1, n / (int64_t(threads) * 4));
        int64_t chunks = (n + grain - 1) / grain;
        if (threads <= 1 || chunks <= 1 || detail::in_pool_worker()) {
            fn(0, n);
            return;
        }
        ensure_workers(threads - 1);
        {
            std::lock_guard<std::mutex> lk(mu_);
            job_n_ = n;
            job_grain_ = grain;
            job_fn_ = &fn;
            next_.store(0, std::memory_order_relaxed);
            pending_ = static_cast<int64_t>(workers_.size());
            ++epoch_;
        }
        cv_.notify_all();
        detail::in_pool_worker() = true;
        work();
        detail::in_pool_worker() = false;
        std::unique_lock<std::mutex> lk(mu_);
        done_cv_.wait(lk, [&] { return pending_ == 0; });
        job_fn_ = nullptr;
    }

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stop_ = true;
            ++epoch_;
        }
        cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

private:
    ThreadPool() = default;

    void ensure_workers(int n) {
        while (static_cast<int>(workers_.size()) < n) {
            workers_.emplace_back([this] { worker_loop(); });
        }
    }

    void worker_loop() {
        detail::in_pool_worker() = true;
        uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [&] { return stop_ || epoch_ != seen; });
                seen = epoch_;
                if (stop_) return;
            }
            work();
            {
                std::lock_guard<std::mutex> lk(mu_);
                if (--pending_ == 0) done_cv_.notify_all();
            }
        }
    }

    void work() {
        const auto* fn = job_fn_;
        int64_t n = job_n_, grain = job_grain_;
        for (;;) {
            int64_t begin = next_.fetch_add(grain, std::memory_order_relaxed);
            if (begin >= n) break;
            (*fn)(begin, std::min(begin + grain, n));
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(int64_t, int64_t)>* job_fn_ = nullptr;
    int64_t job_n_ = 0, job_grain_ = 1;
    std::atomic<int64_t> next_{0};
    int64_t pending_ = 0;
    uint64_t epoch_ = 0;
    bool stop_ = false;
};

// fn(begin, end) over disjoint chunks covering [0, n). grain 0 = auto.
template <typename F>
void parallel_for(int64_t n, int64_t grain, F&& fn) {
    int threads = max_threads();
    if (threads <= 1) {
        if (n > 0) fn(int64_t(0), n);
        return;
    }
    std::function<void(int64_t, int64_t)> f(std::forward<F>(fn));
    ThreadPool::instance().run(n, threads, grain, f);
}

template <typename F>
void parallel_for(int64_t n, F&& fn) {
    parallel_for(n, 0, std::forward<F>(fn));
}

}  // namespace nervc
