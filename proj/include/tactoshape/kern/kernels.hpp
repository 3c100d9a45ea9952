#pragma once

#include <cstddef>

// Data-parallel kernels shared by the field evaluator, the samplers and the
// metric code. The front-line functions in tact::kern dispatch at runtime
// (see simd.hpp); the per-ISA namespaces are exposed so the equivalence tests
// can drive both implementations directly.
//
// Weight matrices use an input-major ("column-major") layout throughout:
// w[j * nout + o] is the coefficient from input j to output o. Kernels that
// carry no cross-lane reduction (axpy, gemv_col_acc, outer_acc,
// min_sqdist_update) produce bit-identical results on every ISA because each
// output element sees the same operations in the same order. Reductions
// (dot, gemv_row_dot, argmax/nearest) may differ in the last few ulps between
// ISAs; ties in argmax/nearest resolve to the lowest index on every path.

namespace tact::kern {

// y[i] += a * x[i]
void axpy(std::size_t n, double a, const double* x, double* y);

// sum_i x[i] * y[i]
double dot(std::size_t n, const double* x, const double* y);

// out[o] += sum_j x[j] * w[j*nout + o]
void gemv_col_acc(std::size_t nin, std::size_t nout, const double* w,
                  const double* x, double* out);

// out[j] = sum_o w[j*nout + o] * v[o]
void gemv_row_dot(std::size_t nin, std::size_t nout, const double* w,
                  const double* v, double* out);

// wacc[j*nout + o] += a[j] * b[o]
void outer_acc(std::size_t nin, std::size_t nout, const double* a,
               const double* b, double* wacc);

// d[i] = min(d[i], (xs[i]-qx)^2 + (ys[i]-qy)^2 + (zs[i]-qz)^2)
void min_sqdist_update(std::size_t n, const double* xs, const double* ys,
                       const double* zs, double qx, double qy, double qz,
                       double* d);

// Index of the maximum element; ties resolve to the lowest index. n >= 1.
std::size_t argmax(std::size_t n, const double* v);

// Index of the point nearest to q; writes the squared distance to *best_d2.
// Ties resolve to the lowest index. n >= 1.
std::size_t nearest_sqdist(std::size_t n, const double* xs, const double* ys,
                           const double* zs, double qx, double qy, double qz,
                           double* best_d2);

namespace scalar {
void axpy(std::size_t n, double a, const double* x, double* y);
double dot(std::size_t n, const double* x, const double* y);
void gemv_col_acc(std::size_t nin, std::size_t nout, const double* w,
                  const double* x, double* out);
void gemv_row_dot(std::size_t nin, std::size_t nout, const double* w,
                  const double* v, double* out);
void outer_acc(std::size_t nin, std::size_t nout, const double* a,
               const double* b, double* wacc);
void min_sqdist_update(std::size_t n, const double* xs, const double* ys,
                       const double* zs, double qx, double qy, double qz,
                       double* d);
std::size_t argmax(std::size_t n, const double* v);
std::size_t nearest_sqdist(std::size_t n, const double* xs, const double* ys,
                           const double* zs, double qx, double qy, double qz,
                           double* best_d2);
} // namespace scalar

namespace avx2 {
// Present only when the build target is x86-64; calling these on a CPU
// without AVX2 is undefined. Go through the dispatched entry points unless
// you checked cpu_has_avx2() yourself.
void axpy(std::size_t n, double a, const double* x, double* y);
double dot(std::size_t n, const double* x, const double* y);
void gemv_col_acc(std::size_t nin, std::size_t nout, const double* w,
                  const double* x, double* out);
void gemv_row_dot(std::size_t nin, std::size_t nout, const double* w,
                  const double* v, double* out);
void outer_acc(std::size_t nin, std::size_t nout, const double* a,
               const double* b, double* wacc);
void min_sqdist_update(std::size_t n, const double* xs, const double* ys,
                       const double* zs, double qx, double qy, double qz,
                       double* d);
std::size_t argmax(std::size_t n, const double* v);
std::size_t nearest_sqdist(std::size_t n, const double* xs, const double* ys,
                           const double* zs, double qx, double qy, double qz,
                           double* best_d2);
} // namespace avx2

} // namespace tact::kern
