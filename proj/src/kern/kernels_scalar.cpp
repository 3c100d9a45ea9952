#include "tactoshape/kern/kernels.hpp"

// Reference implementations. These define the semantics; the vectorized
// variants are checked against them. Keep the accumulation order here in
// sync with the lane-parallel AVX2 loops (see kernels_avx2.cpp).

namespace tact::kern::scalar {

void axpy(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

double dot(std::size_t n, const double* x, const double* y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i] * y[i];
    return acc;
}

void gemv_col_acc(std::size_t nin, std::size_t nout, const double* w,
                  const double* x, double* out) {
    for (std::size_t j = 0; j < nin; ++j) {
        const double xj = x[j];
        const double* row = w + j * nout;
        for (std::size_t o = 0; o < nout; ++o)
            out[o] += xj * row[o];
    }
}

void gemv_row_dot(std::size_t nin, std::size_t nout, const double* w,
                  const double* v, double* out) {
    for (std::size_t j = 0; j < nin; ++j)
        out[j] = dot(nout, w + j * nout, v);
}

void outer_acc(std::size_t nin, std::size_t nout, const double* a,
               const double* b, double* wacc) {
    for (std::size_t j = 0; j < nin; ++j) {
        const double aj = a[j];
        double* row = wacc + j * nout;
        for (std::size_t o = 0; o < nout; ++o)
            row[o] += aj * b[o];
    }
}

void min_sqdist_update(std::size_t n, const double* xs, const double* ys,
                       const double* zs, double qx, double qy, double qz,
                       double* d) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        const double dz = zs[i] - qz;
        const double d2 = dx * dx + dy * dy + dz * dz;
        if (d2 < d[i])
            d[i] = d2;
    }
}

std::size_t argmax(std::size_t n, const double* v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (v[i] > v[best])
            best = i;
    return best;
}

std::size_t nearest_sqdist(std::size_t n, const double* xs, const double* ys,
                           const double* zs, double qx, double qy, double qz,
                           double* best_d2) {
    std::size_t best = 0;
    double bd = 0.0;
    {
        const double dx = xs[0] - qx;
        const double dy = ys[0] - qy;
        const double dz = zs[0] - qz;
        bd = dx * dx + dy * dy + dz * dz;
    }
    for (std::size_t i = 1; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        const double dz = zs[i] - qz;
        const double d2 = dx * dx + dy * dy + dz * dz;
        if (d2 < bd) {
            bd = d2;
            best = i;
        }
    }
    *best_d2 = bd;
    return best;
}

} // namespace tact::kern::scalar
