#include "awr/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace awr {

namespace {
std::atomic<int> g_threads{1};

// Block size for parallel_for partitions. A function of nothing but this
// constant and n, so the partition never depends on the worker count.
constexpr std::size_t kBlock = 8192;

// Leaf size of the pairwise summation tree.
constexpr std::size_t kSumLeaf = 32;

double pairwise_sum_rec(const double* x, std::size_t n) {
    if (n <= kSumLeaf) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum_rec(x, h) + pairwise_sum_rec(x + h, n - h);
}
} // namespace

void set_threads(int n) { g_threads.store(n < 1 ? 1 : n); }
int threads() { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    const int nw = std::min<std::size_t>(threads(), nblocks);
    if (nw <= 1) {
        fn(0, n);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t b = next.fetch_add(1);
            if (b >= nblocks) return;
            std::size_t lo = b * kBlock;
            std::size_t hi = std::min(lo + kBlock, n);
            fn(lo, hi);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nw - 1);
    for (int i = 0; i + 1 < nw; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

double pairwise_sum(const double* x, std::size_t n) { return pairwise_sum_rec(x, n); }

} // namespace awr
