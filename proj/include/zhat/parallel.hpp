#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace zhat {

/// Runs fn(block_index, begin, end) over `threads` contiguous blocks of
/// [0, n).  Blocks are disjoint and callers merge results in block order, so
/// the outcome does not depend on the thread count.
template <class Fn>
void parallel_blocks(std::uint64_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, threads);
    if (threads == 1 || n < 1u << 16) {
        fn(std::size_t{0}, std::uint64_t{0}, n);
        return;
    }
    const std::uint64_t step = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
        const std::uint64_t b = std::min<std::uint64_t>(n, t * step), e = std::min<std::uint64_t>(n, b + step);
        pool.emplace_back([&, t, b, e] {
            try {
                fn(static_cast<std::size_t>(t), b, e);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

/// Sum of fn(i) for i in [begin, end), reduced over fixed chunks of 2^16
/// indices in index order, so the result is the same for any thread count.
template <class Fn>
long double chunked_sum(std::uint64_t begin, std::uint64_t end, unsigned threads, Fn&& fn) {
    constexpr std::uint64_t kChunk = 1u << 16;
    if (end <= begin) return 0;
    const std::uint64_t chunks = (end - begin + kChunk - 1) / kChunk;
    std::vector<long double> part(chunks, 0.0L);
    parallel_blocks(chunks * kChunk, chunks < 2 ? 1 : threads, [&](std::size_t, std::uint64_t b, std::uint64_t e) {
        for (std::uint64_t c = b / kChunk; c < (e + kChunk - 1) / kChunk && c < chunks; ++c) {
            if (c * kChunk < b) continue;
            const std::uint64_t lo = begin + c * kChunk, hi = std::min(end, lo + kChunk);
            long double acc = 0;
            for (std::uint64_t i = lo; i < hi; ++i) acc += fn(i);
            part[c] = acc;
        }
    });
    long double total = 0;
    for (auto v : part) total += v;
    return total;
}

} // namespace zhat
