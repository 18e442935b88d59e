#ifndef OCCSPOT_PARALLEL_HPP
#define OCCSPOT_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <functional>

namespace occspot {

/// Worker count: OCCSPOT_THREADS when set (>= 1), else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; callers write results into pre-sized slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace occspot

#endif  // OCCSPOT_PARALLEL_HPP
