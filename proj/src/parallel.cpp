#include <cfm/parallel.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cfm {

namespace {

int initial_thread_count()
{
    if (const char* env = std::getenv("CFM_THREADS")) {
        const int value = std::atoi(env);
        if (value > 0) return value;
    }
    return 1;
}

std::atomic<int>& thread_setting()
{
    static std::atomic<int> value{initial_thread_count()};
    return value;
}

} // namespace

int thread_count()
{
    return thread_setting().load();
}

void set_thread_count(int count)
{
    thread_setting().store(std::max(1, count));
}

void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end,
                  const std::function<void(std::ptrdiff_t)>& body)
{
    const std::ptrdiff_t total = end - begin;
    if (total <= 0) return;
    const std::ptrdiff_t workers = std::min<std::ptrdiff_t>(thread_count(), total);
    if (workers <= 1) {
        for (std::ptrdiff_t i = begin; i < end; ++i) body(i);
        return;
    }

    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const std::ptrdiff_t chunk = (total + workers - 1) / workers;
    for (std::ptrdiff_t w = 0; w < workers; ++w) {
        const std::ptrdiff_t lo = begin + w * chunk;
        const std::ptrdiff_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::ptrdiff_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace cfm
