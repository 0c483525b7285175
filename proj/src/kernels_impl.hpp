#pragma once

#include "robust_kalman/kernels.hpp"

// Private: per-backend kernel tables, defined only in the translation units
// CMake compiles for this target architecture.

namespace robust_kalman::kernels {

const KernelTable& scalar_kernels();

#if defined(RK_HAVE_AVX2_KERNELS)
const KernelTable& avx2_kernels();
#endif

#if defined(RK_HAVE_NEON_KERNELS)
const KernelTable& neon_kernels();
#endif

}  // namespace robust_kalman::kernels
