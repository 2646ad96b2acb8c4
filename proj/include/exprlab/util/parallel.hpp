#pragma once

#include <cstddef>
#include <functional>

namespace exprlab {

// Worker count: EXPR_LAB_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

// Runs fn(i) for i in [0, n). Each index is visited exactly once; callers
// write results into per-index slots so the merge order is fixed.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace exprlab
