#pragma once

#include <cstddef>
#include <functional>

namespace mfg {

// Worker count used by data-parallel loops. Results never depend on it:
// every loop writes to index-addressed slots and reductions happen
// sequentially afterwards.
void set_thread_count(int threads);
int thread_count();

// Calls body(i) for i in [0, n), split into contiguous static chunks.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mfg
