#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace diffeo {

// Worker count used by every voxel loop in the library. 0 means "all cores".
void set_thread_count(int threads);
int thread_count();

// Runs body(begin, end) over disjoint chunks of [0, n). Chunk boundaries depend only on
// n and `grain`, never on the thread count, so any per-chunk work is reproducible.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t grain = 4096);

// Sum of term(i) over [0, n). Partial sums are formed over fixed-size blocks and combined
// in block order, so the result is bit-identical for every thread count.
template <class Term>
double parallel_sum(std::size_t n, Term term) {
    constexpr std::size_t block = 4096;
    const std::size_t blocks = (n + block - 1) / block;
    std::vector<double> partial(blocks, 0.0);
    parallel_for(
        blocks,
        [&](std::size_t b0, std::size_t b1) {
            for (std::size_t b = b0; b < b1; ++b) {
                double s = 0.0;
                const std::size_t end = (b + 1) * block < n ? (b + 1) * block : n;
                for (std::size_t i = b * block; i < end; ++i) s += term(i);
                partial[b] = s;
            }
        },
        1);
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

}  // namespace diffeo
