#pragma once

#include <cstddef>
#include <functional>

namespace armid {

/// Runs body(i) for i in [0, n) on up to `workers` threads. Exceptions thrown
/// by body are rethrown on the caller thread (first one wins).
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

/// Worker count from ARMID_WORKERS, else hardware concurrency.
int default_workers();

}  // namespace armid
