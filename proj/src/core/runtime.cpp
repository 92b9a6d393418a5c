#include <malloc.h>

namespace stvsr {
namespace {

// Multi-megabyte im2col/activation buffers churn every step; keeping them on
// the brk heap instead of fresh mmaps avoids re-faulting the pages each time.
struct AllocatorTuning {
  AllocatorTuning() {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
  }
};
const AllocatorTuning tuning;

}  // namespace
}  // namespace stvsr
