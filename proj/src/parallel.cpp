#include "cyberrisk/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cyberrisk {

namespace {
std::atomic<std::size_t> g_threads{1};
}

void set_thread_count(std::size_t threads)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    g_threads.store(threads);
}

std::size_t thread_count() { return g_threads.load(); }

void parallel_for_blocks(std::size_t blocks, const std::function<void(std::size_t)>& body)
{
    const std::size_t workers = std::min(thread_count(), blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b)
            body(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
                try {
                    body(b);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

}  // namespace cyberrisk
