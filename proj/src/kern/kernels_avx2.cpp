#include "tactoshape/kern/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

// AVX2 variants. Compiled with per-function target attributes so the rest of
// the translation unit (and the whole binary) stays runnable on plain SSE2
// hardware; the dispatcher only routes here after a cpuid check.
//
// Lane-parallel kernels perform exactly the multiply/add sequence of the
// scalar reference per element, so they are bit-identical to it (the build
// disables FP contraction). Reduction kernels split the accumulation across
// lanes and therefore agree with the reference only up to rounding.

#define TACT_AVX2 __attribute__((target("avx2")))

namespace tact::kern::avx2 {

TACT_AVX2
void axpy(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i)
        y[i] += a * x[i];
}

TACT_AVX2
static inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    const __m128d t = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
    return _mm_cvtsd_f64(t);
}

TACT_AVX2
double dot(std::size_t n, const double* x, const double* y) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(vx, vy));
    }
    double r = hsum(acc);
    for (; i < n; ++i)
        r += x[i] * y[i];
    return r;
}

TACT_AVX2
void gemv_col_acc(std::size_t nin, std::size_t nout, const double* w,
                  const double* x, double* out) {
    // Blocks of four inputs per pass over the output row keep the running
    // sums in registers. The adds are chained in input order, one at a time,
    // which reproduces the scalar reference bit for bit.
    std::size_t j = 0;
    for (; j + 4 <= nin; j += 4) {
        const double* w0 = w + (j + 0) * nout;
        const double* w1 = w + (j + 1) * nout;
        const double* w2 = w + (j + 2) * nout;
        const double* w3 = w + (j + 3) * nout;
        const __m256d x0 = _mm256_set1_pd(x[j + 0]);
        const __m256d x1 = _mm256_set1_pd(x[j + 1]);
        const __m256d x2 = _mm256_set1_pd(x[j + 2]);
        const __m256d x3 = _mm256_set1_pd(x[j + 3]);
        std::size_t o = 0;
        for (; o + 4 <= nout; o += 4) {
            __m256d t = _mm256_loadu_pd(out + o);
            t = _mm256_add_pd(t, _mm256_mul_pd(x0, _mm256_loadu_pd(w0 + o)));
            t = _mm256_add_pd(t, _mm256_mul_pd(x1, _mm256_loadu_pd(w1 + o)));
            t = _mm256_add_pd(t, _mm256_mul_pd(x2, _mm256_loadu_pd(w2 + o)));
            t = _mm256_add_pd(t, _mm256_mul_pd(x3, _mm256_loadu_pd(w3 + o)));
            _mm256_storeu_pd(out + o, t);
        }
        for (; o < nout; ++o) {
            double t = out[o];
            t += x[j + 0] * w0[o];
            t += x[j + 1] * w1[o];
            t += x[j + 2] * w2[o];
            t += x[j + 3] * w3[o];
            out[o] = t;
        }
    }
    for (; j < nin; ++j) {
        const double xj = x[j];
        const double* row = w + j * nout;
        std::size_t o = 0;
        const __m256d vx = _mm256_set1_pd(xj);
        for (; o + 4 <= nout; o += 4) {
            __m256d t = _mm256_loadu_pd(out + o);
            t = _mm256_add_pd(t, _mm256_mul_pd(vx, _mm256_loadu_pd(row + o)));
            _mm256_storeu_pd(out + o, t);
        }
        for (; o < nout; ++o)
            out[o] += xj * row[o];
    }
}

TACT_AVX2
void gemv_row_dot(std::size_t nin, std::size_t nout, const double* w,
                  const double* v, double* out) {
    for (std::size_t j = 0; j < nin; ++j)
        out[j] = dot(nout, w + j * nout, v);
}

TACT_AVX2
void outer_acc(std::size_t nin, std::size_t nout, const double* a,
               const double* b, double* wacc) {
    for (std::size_t j = 0; j < nin; ++j) {
        const __m256d va = _mm256_set1_pd(a[j]);
        double* row = wacc + j * nout;
        std::size_t o = 0;
        for (; o + 4 <= nout; o += 4) {
            __m256d t = _mm256_loadu_pd(row + o);
            t = _mm256_add_pd(t, _mm256_mul_pd(va, _mm256_loadu_pd(b + o)));
            _mm256_storeu_pd(row + o, t);
        }
        for (; o < nout; ++o)
            row[o] += a[j] * b[o];
    }
}

TACT_AVX2
void min_sqdist_update(std::size_t n, const double* xs, const double* ys,
                       const double* zs, double qx, double qy, double qz,
                       double* d) {
    const __m256d vqx = _mm256_set1_pd(qx);
    const __m256d vqy = _mm256_set1_pd(qy);
    const __m256d vqz = _mm256_set1_pd(qz);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vqx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vqy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), vqz);
        // Same association as the reference: (dx*dx + dy*dy) + dz*dz.
        const __m256d d2 = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
            _mm256_mul_pd(dz, dz));
        const __m256d cur = _mm256_loadu_pd(d + i);
        _mm256_storeu_pd(d + i, _mm256_min_pd(d2, cur));
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        const double dz = zs[i] - qz;
        const double d2 = dx * dx + dy * dy + dz * dz;
        if (d2 < d[i])
            d[i] = d2;
    }
}

TACT_AVX2
std::size_t argmax(std::size_t n, const double* v) {
    std::size_t i = 0;
    double best_val = v[0];
    std::size_t best_idx = 0;
    if (n >= 8) {
        __m256d vmax = _mm256_loadu_pd(v);
        __m256d vidx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
        __m256d cur = _mm256_set_pd(7.0, 6.0, 5.0, 4.0);
        const __m256d four = _mm256_set1_pd(4.0);
        for (i = 4; i + 4 <= n; i += 4) {
            const __m256d vv = _mm256_loadu_pd(v + i);
            const __m256d gt = _mm256_cmp_pd(vv, vmax, _CMP_GT_OQ);
            vmax = _mm256_blendv_pd(vmax, vv, gt);
            vidx = _mm256_blendv_pd(vidx, cur, gt);
            cur = _mm256_add_pd(cur, four);
        }
        alignas(32) double vals[4], idxs[4];
        _mm256_store_pd(vals, vmax);
        _mm256_store_pd(idxs, vidx);
        best_val = vals[0];
        best_idx = static_cast<std::size_t>(idxs[0]);
        for (int l = 1; l < 4; ++l) {
            const auto li = static_cast<std::size_t>(idxs[l]);
            if (vals[l] > best_val || (vals[l] == best_val && li < best_idx)) {
                best_val = vals[l];
                best_idx = li;
            }
        }
    }
    for (; i < n; ++i)
        if (v[i] > best_val) {
            best_val = v[i];
            best_idx = i;
        }
    return best_idx;
}

TACT_AVX2
std::size_t nearest_sqdist(std::size_t n, const double* xs, const double* ys,
                           const double* zs, double qx, double qy, double qz,
                           double* best_d2) {
    const __m256d vqx = _mm256_set1_pd(qx);
    const __m256d vqy = _mm256_set1_pd(qy);
    const __m256d vqz = _mm256_set1_pd(qz);
    std::size_t i = 0;
    double bd = 0.0;
    std::size_t best = 0;
    bool seeded = false;
    if (n >= 8) {
        const __m256d dx0 = _mm256_sub_pd(_mm256_loadu_pd(xs), vqx);
        const __m256d dy0 = _mm256_sub_pd(_mm256_loadu_pd(ys), vqy);
        const __m256d dz0 = _mm256_sub_pd(_mm256_loadu_pd(zs), vqz);
        __m256d vmin = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(dx0, dx0), _mm256_mul_pd(dy0, dy0)),
            _mm256_mul_pd(dz0, dz0));
        __m256d vidx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
        __m256d cur = _mm256_set_pd(7.0, 6.0, 5.0, 4.0);
        const __m256d four = _mm256_set1_pd(4.0);
        for (i = 4; i + 4 <= n; i += 4) {
            const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vqx);
            const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vqy);
            const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), vqz);
            const __m256d d2 = _mm256_add_pd(
                _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                _mm256_mul_pd(dz, dz));
            const __m256d lt = _mm256_cmp_pd(d2, vmin, _CMP_LT_OQ);
            vmin = _mm256_blendv_pd(vmin, d2, lt);
            vidx = _mm256_blendv_pd(vidx, cur, lt);
            cur = _mm256_add_pd(cur, four);
        }
        alignas(32) double vals[4], idxs[4];
        _mm256_store_pd(vals, vmin);
        _mm256_store_pd(idxs, vidx);
        bd = vals[0];
        best = static_cast<std::size_t>(idxs[0]);
        for (int l = 1; l < 4; ++l) {
            const auto li = static_cast<std::size_t>(idxs[l]);
            if (vals[l] < bd || (vals[l] == bd && li < best)) {
                bd = vals[l];
                best = li;
            }
        }
        seeded = true;
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        const double dz = zs[i] - qz;
        const double d2 = dx * dx + dy * dy + dz * dz;
        if (!seeded || d2 < bd) {
            bd = d2;
            best = i;
            seeded = true;
        }
    }
    *best_d2 = bd;
    return best;
}

} // namespace tact::kern::avx2

#else // non-x86 fallback: keep the symbols, route to the reference kernels

namespace tact::kern::avx2 {

void axpy(std::size_t n, double a, const double* x, double* y) {
    scalar::axpy(n, a, x, y);
}
double dot(std::size_t n, const double* x, const double* y) {
    return scalar::dot(n, x, y);
}
void gemv_col_acc(std::size_t nin, std::size_t nout, const double* w,
                  const double* x, double* out) {
    scalar::gemv_col_acc(nin, nout, w, x, out);
}
void gemv_row_dot(std::size_t nin, std::size_t nout, const double* w,
                  const double* v, double* out) {
    scalar::gemv_row_dot(nin, nout, w, v, out);
}
void outer_acc(std::size_t nin, std::size_t nout, const double* a,
               const double* b, double* wacc) {
    scalar::outer_acc(nin, nout, a, b, wacc);
}
void min_sqdist_update(std::size_t n, const double* xs, const double* ys,
                       const double* zs, double qx, double qy, double qz,
                       double* d) {
    scalar::min_sqdist_update(n, xs, ys, zs, qx, qy, qz, d);
}
std::size_t argmax(std::size_t n, const double* v) {
    return scalar::argmax(n, v);
}
std::size_t nearest_sqdist(std::size_t n, const double* xs, const double* ys,
                           const double* zs, double qx, double qy, double qz,
                           double* best_d2) {
    return scalar::nearest_sqdist(n, xs, ys, zs, qx, qy, qz, best_d2);
}

} // namespace tact::kern::avx2

#endif
