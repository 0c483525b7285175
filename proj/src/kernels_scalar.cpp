#include "robust_kalman/kernels.hpp"

namespace robust_kalman::kernels {
namespace {

void quadform2_scalar(const double* xs, const double* ys, std::size_t n, double mx, double my,
                      double s00, double s01, double s11, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        out[i] = dx * dx * s00 + 2.0 * dx * dy * s01 + dy * dy * s11;
    }
}

void weighted_sums2_scalar(const double* xs, const double* ys, const double* w, std::size_t n,
                           double sums[3]) {
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sx += w[i] * xs[i];
        sy += w[i] * ys[i];
    }
    sums[0] = sw;
    sums[1] = sx;
    sums[2] = sy;
}

void weighted_scatter2_scalar(const double* xs, const double* ys, const double* w, std::size_t n,
                              double mx, double my, double scatter[3]) {
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    scatter[0] = sxx;
    scatter[1] = sxy;
    scatter[2] = syy;
}

void accumulate_sq_err2_scalar(const double* ex, const double* ey, std::size_t n, double* acc) {
    for (std::size_t i = 0; i < n; ++i) {
        acc[i] += ex[i] * ex[i] + ey[i] * ey[i];
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        quadform2_scalar,
        weighted_sums2_scalar,
        weighted_scatter2_scalar,
        accumulate_sq_err2_scalar,
    };
    return table;
}

}  // namespace robust_kalman::kernels
