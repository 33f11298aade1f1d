#pragma once

#include <cstddef>
#include <functional>

namespace awr {

// Worker count used by parallel_for. Results are bit-identical for any value:
// work is split into blocks whose boundaries depend only on the problem size,
// each block writes to a disjoint output range, and reductions combine block
// partials in a fixed order.
void set_threads(int n);
int threads();

// Runs fn(begin, end) over a fixed block partition of [0, n).
// Block size is a function of n only, never of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Fixed-shape pairwise summation. The reduction tree depends only on n, so the
// result is bit-identical no matter how many workers computed the inputs.
double pairwise_sum(const double* x, std::size_t n);

} // namespace awr
