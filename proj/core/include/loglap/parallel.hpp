#pragma once

#include <cstddef>
#include <functional>

namespace loglap {

// Worker cap. Defaults to LOGLAP_THREADS, else hardware concurrency.
int thread_count();
void set_thread_count(int n);

// Calls body(i) for i in [0, n), distributing indices across workers.
// body must only write to storage owned by index i; callers reduce in
// index order afterwards, so results do not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace loglap
