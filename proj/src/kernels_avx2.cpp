// AVX2 variants of the batch kernels. Built with -mavx2 but not -mfma so the
// per-element operation order matches the scalar reference exactly; only the
// reductions reassociate (four lanes summed in a fixed order).

#if defined(__AVX2__)

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace robust_kalman::kernels {
namespace {

inline double lane_sum(__m256d v) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    return ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
}

void quadform2_avx2(const double* xs, const double* ys, std::size_t n, double mx, double my,
                    double s00, double s01, double s11, double* out) {
    const __m256d vmx = _mm256_set1_pd(mx);
    const __m256d vmy = _mm256_set1_pd(my);
    const __m256d v00 = _mm256_set1_pd(s00);
    const __m256d v01 = _mm256_set1_pd(s01);
    const __m256d v11 = _mm256_set1_pd(s11);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vmx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vmy);
        const __m256d t1 = _mm256_mul_pd(_mm256_mul_pd(dx, dx), v00);
        const __m256d t2 = _mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(two, dx), dy), v01);
        const __m256d t3 = _mm256_mul_pd(_mm256_mul_pd(dy, dy), v11);
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_add_pd(t1, t2), t3));
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        out[i] = dx * dx * s00 + 2.0 * dx * dy * s01 + dy * dy * s11;
    }
}

void weighted_sums2_avx2(const double* xs, const double* ys, const double* w, std::size_t n,
                         double sums[3]) {
    __m256d sw = _mm256_setzero_pd();
    __m256d sx = _mm256_setzero_pd();
    __m256d sy = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vw = _mm256_loadu_pd(w + i);
        sw = _mm256_add_pd(sw, vw);
        sx = _mm256_add_pd(sx, _mm256_mul_pd(vw, _mm256_loadu_pd(xs + i)));
        sy = _mm256_add_pd(sy, _mm256_mul_pd(vw, _mm256_loadu_pd(ys + i)));
    }
    double tw = lane_sum(sw), tx = lane_sum(sx), ty = lane_sum(sy);
    for (; i < n; ++i) {
        tw += w[i];
        tx += w[i] * xs[i];
        ty += w[i] * ys[i];
    }
    sums[0] = tw;
    sums[1] = tx;
    sums[2] = ty;
}

void weighted_scatter2_avx2(const double* xs, const double* ys, const double* w, std::size_t n,
                            double mx, double my, double scatter[3]) {
    const __m256d vmx = _mm256_set1_pd(mx);
    const __m256d vmy = _mm256_set1_pd(my);
    __m256d sxx = _mm256_setzero_pd();
    __m256d sxy = _mm256_setzero_pd();
    __m256d syy = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vw = _mm256_loadu_pd(w + i);
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vmx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vmy);
        sxx = _mm256_add_pd(sxx, _mm256_mul_pd(vw, _mm256_mul_pd(dx, dx)));
        sxy = _mm256_add_pd(sxy, _mm256_mul_pd(vw, _mm256_mul_pd(dx, dy)));
        syy = _mm256_add_pd(syy, _mm256_mul_pd(vw, _mm256_mul_pd(dy, dy)));
    }
    double txx = lane_sum(sxx), txy = lane_sum(sxy), tyy = lane_sum(syy);
    for (; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        txx += w[i] * dx * dx;
        txy += w[i] * dx * dy;
        tyy += w[i] * dy * dy;
    }
    scatter[0] = txx;
    scatter[1] = txy;
    scatter[2] = tyy;
}

void accumulate_sq_err2_avx2(const double* ex, const double* ey, std::size_t n, double* acc) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(ex + i);
        const __m256d vy = _mm256_loadu_pd(ey + i);
        const __m256d sq = _mm256_add_pd(_mm256_mul_pd(vx, vx), _mm256_mul_pd(vy, vy));
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), sq));
    }
    for (; i < n; ++i) {
        acc[i] += ex[i] * ex[i] + ey[i] * ey[i];
    }
}

}  // namespace

const KernelTable& avx2_kernels() {
    static const KernelTable table{
        quadform2_avx2,
        weighted_sums2_avx2,
        weighted_scatter2_avx2,
        accumulate_sq_err2_avx2,
    };
    return table;
}

}  // namespace robust_kalman::kernels

#endif  // __AVX2__
