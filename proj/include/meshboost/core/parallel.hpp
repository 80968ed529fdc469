#pragma once

#include <cstdint>
#include <functional>

namespace meshboost {

// Number of worker threads used by parallel_for. Defaults to the hardware
// concurrency, capped by the MESHBOOST_THREADS environment variable.
int thread_count();

// Runs f(i) for i in [begin, end). Work is split into contiguous ranges, one
// per worker. Each index must write only its own outputs; under that contract
// the result is identical for every thread count, including 1.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& f);

// Range flavour: f(lo, hi) is called once per contiguous chunk.
void parallel_for_chunks(std::int64_t begin, std::int64_t end,
                         const std::function<void(std::int64_t, std::int64_t)>& f);

} // namespace meshboost
