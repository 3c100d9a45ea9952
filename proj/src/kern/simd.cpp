#include "tactoshape/kern/simd.hpp"
#include "tactoshape/kern/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace tact::kern {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

namespace {

struct Table {
    void (*axpy)(std::size_t, double, const double*, double*);
    double (*dot)(std::size_t, const double*, const double*);
    void (*gemv_col_acc)(std::size_t, std::size_t, const double*,
                         const double*, double*);
    void (*gemv_row_dot)(std::size_t, std::size_t, const double*,
                         const double*, double*);
    void (*outer_acc)(std::size_t, std::size_t, const double*, const double*,
                      double*);
    void (*min_sqdist_update)(std::size_t, const double*, const double*,
                              const double*, double, double, double, double*);
    std::size_t (*argmax)(std::size_t, const double*);
    std::size_t (*nearest_sqdist)(std::size_t, const double*, const double*,
                                  const double*, double, double, double,
                                  double*);
};

constexpr Table kScalarTable = {
    scalar::axpy,          scalar::dot,
    scalar::gemv_col_acc,  scalar::gemv_row_dot,
    scalar::outer_acc,     scalar::min_sqdist_update,
    scalar::argmax,        scalar::nearest_sqdist,
};

constexpr Table kAvx2Table = {
    avx2::axpy,          avx2::dot,
    avx2::gemv_col_acc,  avx2::gemv_row_dot,
    avx2::outer_acc,     avx2::min_sqdist_update,
    avx2::argmax,        avx2::nearest_sqdist,
};

Isa g_isa = Isa::scalar;
const Table* g_table = &kScalarTable;
bool g_resolved = false;

void apply(Isa level) {
    g_isa = level;
    g_table = (level == Isa::avx2) ? &kAvx2Table : &kScalarTable;
}

void resolve() {
    Isa level = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
    if (const char* env = std::getenv("TACTOSHAPE_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) {
            level = Isa::scalar;
        } else if (std::strcmp(env, "avx2") == 0) {
            if (!cpu_has_avx2())
                throw std::runtime_error(
                    "TACTOSHAPE_SIMD=avx2 requested but the CPU lacks AVX2");
            level = Isa::avx2;
        } else if (*env != '\0') {
            throw std::runtime_error(
                std::string("unknown TACTOSHAPE_SIMD value: ") + env);
        }
    }
    apply(level);
    g_resolved = true;
}

const Table& table() {
    if (!g_resolved)
        resolve();
    return *g_table;
}

} // namespace

Isa active_isa() {
    if (!g_resolved)
        resolve();
    return g_isa;
}

void set_isa(Isa level) {
    if (level == Isa::avx2 && !cpu_has_avx2())
        throw std::runtime_error("AVX2 kernels requested on a CPU without AVX2");
    apply(level);
    g_resolved = true;
}

void reset_isa() {
    g_resolved = false;
}

const char* isa_name(Isa level) {
    switch (level) {
    case Isa::avx2:
        return "avx2";
    case Isa::scalar:
    default:
        return "scalar";
    }
}

void axpy(std::size_t n, double a, const double* x, double* y) {
    table().axpy(n, a, x, y);
}

double dot(std::size_t n, const double* x, const double* y) {
    return table().dot(n, x, y);
}

void gemv_col_acc(std::size_t nin, std::size_t nout, const double* w,
                  const double* x, double* out) {
    table().gemv_col_acc(nin, nout, w, x, out);
}

void gemv_row_dot(std::size_t nin, std::size_t nout, const double* w,
                  const double* v, double* out) {
    table().gemv_row_dot(nin, nout, w, v, out);
}

void outer_acc(std::size_t nin, std::size_t nout, const double* a,
               const double* b, double* wacc) {
    table().outer_acc(nin, nout, a, b, wacc);
}

void min_sqdist_update(std::size_t n, const double* xs, const double* ys,
                       const double* zs, double qx, double qy, double qz,
                       double* d) {
    table().min_sqdist_update(n, xs, ys, zs, qx, qy, qz, d);
}

std::size_t argmax(std::size_t n, const double* v) {
    return table().argmax(n, v);
}

std::size_t nearest_sqdist(std::size_t n, const double* xs, const double* ys,
                           const double* zs, double qx, double qy, double qz,
                           double* best_d2) {
    return table().nearest_sqdist(n, xs, ys, zs, qx, qy, qz, best_d2);
}

} // namespace tact::kern
