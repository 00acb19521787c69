#pragma once

#include <cstddef>
#include <functional>

namespace sumrate {

/// Worker count used by parallel_for. 0 means "not set": fall back to the
/// SUMRATE_THREADS environment variable, then to 1.
void set_thread_count(int n);
int thread_count();

/// Runs body(k) for k in [0, n), split into contiguous chunks across workers.
/// Results must not depend on scheduling; callers write disjoint outputs.
void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& body);

}  // namespace sumrate
