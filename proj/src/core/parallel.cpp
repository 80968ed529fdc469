#include "meshboost/core/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace meshboost {

int thread_count() {
    static const int cached = [] {
        int n = static_cast<int>(std::thread::hardware_concurrency());
        if (n <= 0) n = 1;
        if (const char* env = std::getenv("MESHBOOST_THREADS")) {
            const int cap = std::atoi(env);
            if (cap > 0) n = cap;
        }
        return n;
    }();
    return cached;
}

void parallel_for_chunks(std::int64_t begin, std::int64_t end,
                         const std::function<void(std::int64_t, std::int64_t)>& f) {
    const std::int64_t n = end - begin;
    if (n <= 0) return;
    const int workers = static_cast<int>(std::min<std::int64_t>(thread_count(), n));
    if (workers <= 1) {
        f(begin, end);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = begin + w * chunk;
        const std::int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([&f, lo, hi] { f(lo, hi); });
    }
    for (auto& t : threads) t.join();
}

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& f) {
    parallel_for_chunks(begin, end, [&f](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) f(i);
    });
}

} // namespace meshboost
