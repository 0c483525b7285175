#pragma once

#include <cstddef>
#include <string>

namespace robust_kalman::kernels {

/// Batch kernels behind the mixture E/M steps and the Monte Carlo error
/// accumulation. Every kernel has a scalar reference implementation and,
/// where the hardware supports it, a SIMD variant selected once per process.
/// Variants agree with the reference to floating-point reassociation noise;
/// the equivalence suite in tests/ pins the tolerances.

enum class Backend {
    scalar,
    avx2,
    neon,
};

const char* backend_name(Backend b);

/// Backend chosen at first use: the widest variant the CPU supports, unless
/// the ROBUST_KALMAN_SIMD environment variable ("scalar", "avx2", "neon",
/// "auto") overrides it. Stable for the lifetime of the process.
Backend active_backend();

/// True if `b` can run on this machine.
bool backend_available(Backend b);

/// Force a backend (used by the equivalence tests). Returns false and leaves
/// the selection unchanged if the backend is unavailable.
bool set_backend(Backend b);

/// Table of the four batch kernels. 2-column sample batches are stored as
/// separate x/y arrays (structure of arrays).
struct KernelTable {
    /// out[i] = (x-mx)^2*s00 + 2(x-mx)(y-my)*s01 + (y-my)^2*s11.
    void (*quadform2)(const double* xs, const double* ys, std::size_t n, double mx, double my,
                      double s00, double s01, double s11, double* out);
    /// sums[0..2] = { sum w, sum w*x, sum w*y }.
    void (*weighted_sums2)(const double* xs, const double* ys, const double* w, std::size_t n,
                           double sums[3]);
    /// scatter[0..2] = { sum w(x-mx)^2, sum w(x-mx)(y-my), sum w(y-my)^2 }.
    void (*weighted_scatter2)(const double* xs, const double* ys, const double* w, std::size_t n,
                              double mx, double my, double scatter[3]);
    /// acc[i] += ex[i]^2 + ey[i]^2.
    void (*accumulate_sq_err2)(const double* ex, const double* ey, std::size_t n, double* acc);
};

/// Kernel table for the active backend.
const KernelTable& active();

/// Kernel table for a specific backend (throws ContractViolation if
/// unavailable on this machine).
const KernelTable& table_for(Backend b);

}  // namespace robust_kalman::kernels
