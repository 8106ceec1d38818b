#pragma once

namespace dampwave {

/// OpenBLAS picks its kernels once, at load time, from the reported CPU model;
/// virtual machines often report a generic model and get the slow SSE3 path.
/// When OPENBLAS_CORETYPE is unset this sets it from the CPU feature flags and
/// re-executes the current program so the choice takes effect. No-op otherwise.
void select_blas_kernels(char** argv);

/// Kernel name matching the CPU features (empty when no better choice is known).
const char* preferred_blas_core();

} // namespace dampwave
