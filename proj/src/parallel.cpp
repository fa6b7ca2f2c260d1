#include "kakeya/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kakeya {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n)
{
    g_threads = std::max(0, n);
}

int thread_count()
{
    int n = g_threads;
    if (n > 0)
        return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(size_t n, const std::function<void(size_t)>& body)
{
    size_t workers = std::min<size_t>(static_cast<size_t>(thread_count()), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_lock;
    auto run = [&]() {
        for (size_t i; (i = next++) < n;) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(error_lock);
                if (!error)
                    error = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (size_t w = 1; w < workers; ++w)
        pool.emplace_back(run);
    run();
    for (std::thread& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

}
