#include "diffeo/parallel.hpp"

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <atomic>
#include <memory>
#include <mutex>

namespace diffeo {

namespace {

std::atomic<int> g_threads{0};
std::mutex g_arena_mutex;
std::unique_ptr<tbb::task_arena> g_arena;
// An explicit count also lifts TBB's worker cap, which otherwise follows the CPU affinity
// mask and would silently serialise --threads 4 on a single-core machine.
std::unique_ptr<tbb::global_control> g_limit;
int g_arena_threads = -1;

tbb::task_arena& arena() {
    std::lock_guard lock(g_arena_mutex);
    const int wanted = g_threads.load();
    if (!g_arena || g_arena_threads != wanted) {
        g_arena.reset();
        g_limit = wanted > 0 ? std::make_unique<tbb::global_control>(
                                   tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(wanted))
                             : nullptr;
        g_arena = wanted > 0 ? std::make_unique<tbb::task_arena>(wanted)
                             : std::make_unique<tbb::task_arena>();
        g_arena_threads = wanted;
    }
    return *g_arena;
}

}  // namespace

void set_thread_count(int threads) { g_threads.store(threads < 0 ? 0 : threads); }

int thread_count() {
    const int t = g_threads.load();
    return t > 0 ? t : tbb::this_task_arena::max_concurrency();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t grain) {
    if (n == 0) return;
    if (grain == 0) grain = 1;
    if (n <= grain || thread_count() == 1) {
        // Same chunking as the parallel path.
        for (std::size_t b = 0; b < n; b += grain) body(b, b + grain < n ? b + grain : n);
        return;
    }
    const std::size_t chunks = (n + grain - 1) / grain;
    arena().execute([&] {
        tbb::parallel_for(
            tbb::blocked_range<std::size_t>(0, chunks, 1),
            [&](const tbb::blocked_range<std::size_t>& r) {
                for (std::size_t c = r.begin(); c < r.end(); ++c) {
                    const std::size_t b = c * grain;
                    body(b, b + grain < n ? b + grain : n);
                }
            },
            tbb::simple_partitioner());
    });
}

}  // namespace diffeo
