#pragma once

#include <cstdlib>  // defines __GLIBC__ on glibc

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace dismantler {

/// Training allocates and frees the same large buffers every epoch. With
/// glibc's defaults these go through mmap / heap trimming and most of the
/// run is spent in page faults. Executables call this once at startup.
inline void tune_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
    mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024);
#endif
}

} // namespace dismantler
