#include "dampwave/runtime.hpp"

#include <cstdlib>
#include <unistd.h>

namespace dampwave {

const char* preferred_blas_core() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx512f"))
    return "SkylakeX";
  if (__builtin_cpu_supports("avx2"))
    return "Haswell";
#endif
  return "";
}

void select_blas_kernels(char** argv) {
  if (std::getenv("OPENBLAS_CORETYPE") || std::getenv("DAMPWAVE_NO_REEXEC"))
    return;
  const char* core = preferred_blas_core();
  if (!*core)
    return;
  setenv("OPENBLAS_CORETYPE", core, 1);
  setenv("DAMPWAVE_NO_REEXEC", "1", 1);
  execv("/proc/self/exe", argv);
  // exec failed: carry on with whatever kernels were loaded
}

} // namespace dampwave
