#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "dampwave/runtime.hpp"

int main(int argc, char** argv) {
  dampwave::select_blas_kernels(argv);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
