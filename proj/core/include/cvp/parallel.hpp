#pragma once

#include <cstddef>
#include <functional>

namespace cvp {

/// Worker count used by parallel_for. Defaults to the CVP_WORKERS
/// environment variable, else 1.
std::size_t worker_count() noexcept;
void set_worker_count(std::size_t n) noexcept;

/// Calls body(i) for i in [0, n). Each index is handled by exactly one worker;
/// callers write results into per-index slots and reduce afterwards, which
/// keeps results independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace cvp
