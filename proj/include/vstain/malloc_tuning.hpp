#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace vstain {

/// Keeps large im2col and activation buffers on the heap between calls
/// instead of mapping and unmapping them for every convolution. Call once
/// from main; no effect outside glibc.
inline void keep_large_allocations() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_MAX, 0);
  mallopt(M_TRIM_THRESHOLD, 1024 * 1024 * 1024);
#endif
}

}  // namespace vstain
