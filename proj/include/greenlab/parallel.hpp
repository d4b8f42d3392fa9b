#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <vector>

namespace greenlab::parallel {

/// Process-wide worker count used by every batch evaluator (default 1).
void set_workers(unsigned workers);
unsigned workers();

/// Calls body(i) for i in [0, count). Indices are split into contiguous
/// blocks, one per worker. Bodies must only write to slots owned by their
/// index; the first exception thrown by any body is rethrown.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);

/// Pairwise sum with a fixed split (halves of the index range), independent
/// of the worker count.
double pairwise_sum(std::span<const double> values);

/// Evaluates fn at every index into a vector, in parallel.
template <typename T, typename Fn>
std::vector<T> map_indices(std::size_t count, Fn&& fn) {
    std::vector<T> out(count);
    for_each_index(count, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

}  // namespace greenlab::parallel
