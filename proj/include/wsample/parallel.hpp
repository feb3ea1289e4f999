#pragma once

#include <cstddef>
#include <functional>

namespace wsample {

/// Thread cap from WITNESS_SAMPLER_THREADS; 0, unset or unparsable means sequential.
std::size_t configured_threads();

/// Calls body(i) for i in [0, count). Each index is visited exactly once; callers write
/// results into per-index slots so output order never depends on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace wsample
