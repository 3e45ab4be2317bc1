#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace slowfast {

// Process-wide worker count for path-level fan-out. Changing it never changes
// numeric results: work is split into fixed-size chunks whose partial results
// are folded in chunk order, and every path owns a hash-derived RNG stream.
inline std::atomic<int>& detail_parallelism_state() {
    static std::atomic<int> n{static_cast<int>(std::thread::hardware_concurrency())};
    return n;
}

inline int parallelism() {
    const int n = detail_parallelism_state().load();
    return n > 0 ? n : 1;
}

inline void set_parallelism(int n) { detail_parallelism_state().store(n > 0 ? n : 1); }

// Evaluate per_chunk(begin, end, slot) for fixed chunks [k*chunk,(k+1)*chunk)
// across worker threads, then fold the slots sequentially in index order.
template <typename Acc, typename ChunkFn, typename MergeFn>
Acc parallel_chunked_reduce(std::size_t n_items, std::size_t chunk_size, Acc init,
                            ChunkFn per_chunk, MergeFn merge) {
    if (n_items == 0) return init;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
    std::vector<Acc> slots(n_chunks, init);

    const int workers = std::min<int>(parallelism(), static_cast<int>(n_chunks));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    auto body = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= n_chunks || failed.load()) return;
            const std::size_t begin = k * chunk_size;
            const std::size_t end = std::min(begin + chunk_size, n_items);
            try {
                per_chunk(begin, end, slots[k]);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };

    if (workers <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    if (failed.load() && error) std::rethrow_exception(error);

    Acc out = init;
    for (std::size_t k = 0; k < n_chunks; ++k) merge(out, slots[k]);
    return out;
}

}  // namespace slowfast
