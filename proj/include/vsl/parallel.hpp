#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vsl::par {

// Work is split into a fixed number of chunks that depends only on the
// problem size, never on the thread count. Per-chunk partial results are
// reduced serially in ascending chunk order, so every thread count gives
// bit-identical sums.
inline constexpr int kChunks = 64;

template <class F>
void for_each_index(std::size_t n, F&& body) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    body(static_cast<std::size_t>(i));
}

// body(chunk, begin, end) with [begin, end) disjoint across chunks.
template <class F>
void for_each_chunk(std::size_t n, F&& body) {
#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < kChunks; ++c) {
    const std::size_t b = n * static_cast<std::size_t>(c) / kChunks;
    const std::size_t e = n * static_cast<std::size_t>(c + 1) / kChunks;
    if (b < e) body(c, b, e);
  }
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace vsl::par
