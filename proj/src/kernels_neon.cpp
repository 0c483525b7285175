// NEON variants of the batch kernels (aarch64, two double lanes).

#if defined(__aarch64__)

#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace robust_kalman::kernels {
namespace {

inline double lane_sum(float64x2_t v) {
    return vgetq_lane_f64(v, 0) + vgetq_lane_f64(v, 1);
}

void quadform2_neon(const double* xs, const double* ys, std::size_t n, double mx, double my,
                    double s00, double s01, double s11, double* out) {
    const float64x2_t vmx = vdupq_n_f64(mx);
    const float64x2_t vmy = vdupq_n_f64(my);
    const float64x2_t v00 = vdupq_n_f64(s00);
    const float64x2_t v01 = vdupq_n_f64(s01);
    const float64x2_t v11 = vdupq_n_f64(s11);
    const float64x2_t two = vdupq_n_f64(2.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vmx);
        const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vmy);
        const float64x2_t t1 = vmulq_f64(vmulq_f64(dx, dx), v00);
        const float64x2_t t2 = vmulq_f64(vmulq_f64(vmulq_f64(two, dx), dy), v01);
        const float64x2_t t3 = vmulq_f64(vmulq_f64(dy, dy), v11);
        vst1q_f64(out + i, vaddq_f64(vaddq_f64(t1, t2), t3));
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        out[i] = dx * dx * s00 + 2.0 * dx * dy * s01 + dy * dy * s11;
    }
}

void weighted_sums2_neon(const double* xs, const double* ys, const double* w, std::size_t n,
                         double sums[3]) {
    float64x2_t sw = vdupq_n_f64(0.0);
    float64x2_t sx = vdupq_n_f64(0.0);
    float64x2_t sy = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t vw = vld1q_f64(w + i);
        sw = vaddq_f64(sw, vw);
        sx = vaddq_f64(sx, vmulq_f64(vw, vld1q_f64(xs + i)));
        sy = vaddq_f64(sy, vmulq_f64(vw, vld1q_f64(ys + i)));
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

void weighted_scatter2_neon(const double* xs, const double* ys, const double* w, std::size_t n,
                            double mx, double my, double scatter[3]) {
    const float64x2_t vmx = vdupq_n_f64(mx);
    const float64x2_t vmy = vdupq_n_f64(my);
    float64x2_t sxx = vdupq_n_f64(0.0);
    float64x2_t sxy = vdupq_n_f64(0.0);
    float64x2_t syy = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t vw = vld1q_f64(w + i);
        const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vmx);
        const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vmy);
        sxx = vaddq_f64(sxx, vmulq_f64(vw, vmulq_f64(dx, dx)));
        sxy = vaddq_f64(sxy, vmulq_f64(vw, vmulq_f64(dx, dy)));
        syy = vaddq_f64(syy, vmulq_f64(vw, vmulq_f64(dy, dy)));
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

void accumulate_sq_err2_neon(const double* ex, const double* ey, std::size_t n, double* acc) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t vx = vld1q_f64(ex + i);
        const float64x2_t vy = vld1q_f64(ey + i);
        const float64x2_t sq = vaddq_f64(vmulq_f64(vx, vx), vmulq_f64(vy, vy));
        vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), sq));
    }
    for (; i < n; ++i) {
        acc[i] += ex[i] * ex[i] + ey[i] * ey[i];
    }
}

}  // namespace

const KernelTable& neon_kernels() {
    static const KernelTable table{
        quadform2_neon,
        weighted_sums2_neon,
        weighted_scatter2_neon,
        accumulate_sq_err2_neon,
    };
    return table;
}

}  // namespace robust_kalman::kernels

#endif  // __aarch64__
