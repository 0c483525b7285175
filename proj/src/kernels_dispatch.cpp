#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"
#include "robust_kalman/errors.hpp"

namespace robust_kalman::kernels {
namespace {

Backend detect_best() {
#if defined(RK_HAVE_AVX2_KERNELS)
    if (__builtin_cpu_supports("avx2")) return Backend::avx2;
#endif
#if defined(RK_HAVE_NEON_KERNELS)
    return Backend::neon;
#endif
    return Backend::scalar;
}

Backend initial_backend() {
    if (const char* env = std::getenv("ROBUST_KALMAN_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && backend_available(Backend::avx2))
            return Backend::avx2;
        if (std::strcmp(env, "neon") == 0 && backend_available(Backend::neon))
            return Backend::neon;
        // anything else, including "auto", falls through to detection
    }
    return detect_best();
}

std::atomic<Backend>& selection() {
    static std::atomic<Backend> chosen{initial_backend()};
    return chosen;
}

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

bool backend_available(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(RK_HAVE_AVX2_KERNELS)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Backend::neon:
#if defined(RK_HAVE_NEON_KERNELS)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend active_backend() { return selection().load(std::memory_order_relaxed); }

bool set_backend(Backend b) {
    if (!backend_available(b)) return false;
    selection().store(b, std::memory_order_relaxed);
    return true;
}

const KernelTable& table_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return scalar_kernels();
        case Backend::avx2:
#if defined(RK_HAVE_AVX2_KERNELS)
            if (backend_available(Backend::avx2)) return avx2_kernels();
#endif
            break;
        case Backend::neon:
#if defined(RK_HAVE_NEON_KERNELS)
            return neon_kernels();
#endif
            break;
    }
    throw ContractViolation(std::string("kernel backend unavailable: ") + backend_name(b));
}

const KernelTable& active() { return table_for(active_backend()); }

}  // namespace robust_kalman::kernels
