#ifndef CSCD_RUNTIME_HPP
#define CSCD_RUNTIME_HPP

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace cscd {

/// Keeps large activation buffers on the heap instead of mapping and
/// unmapping pages on every mini-batch. No-op outside glibc.
inline void tune_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

} // namespace cscd

#endif
