#pragma once

#include <cstddef>

namespace veer {

/// Kernel selection. The serial paths are the reference implementations;
/// the parallel ones split the outer loop across OpenMP threads and must
/// return bit-identical results.
enum class Execution { serial, parallel };

/// Below this many rows the parallel kernels run serially.
inline constexpr std::size_t kParallelThreshold = 2048;

} // namespace veer
