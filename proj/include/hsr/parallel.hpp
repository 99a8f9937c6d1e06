#pragma once

#include <functional>

namespace hsr {

// Resolves a --threads style request: values < 1 mean "use the hardware".
int effective_threads(int requested);

// Runs fn(begin, end) over a contiguous split of [0, n). Results must not
// depend on the split, so only use this for writes to disjoint ranges or for
// reductions whose combine order is fixed elsewhere.
void parallel_for(int n, int threads, const std::function<void(int, int)>& fn);

} // namespace hsr
