#pragma once

#include <cstddef>
#include <functional>

namespace cfm {

/// Worker count used by parallel_for. Defaults to $CFM_THREADS, else 1.
int thread_count();
void set_thread_count(int count);

/// Runs body(i) for i in [begin, end) split into contiguous chunks.
/// Callers write results per index and reduce in index order afterwards,
/// so output never depends on the worker count.
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end,
                  const std::function<void(std::ptrdiff_t)>& body);

} // namespace cfm
