// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "pcdecomp/kernels.hpp"

#include <immintrin.h>

namespace pcdecomp::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void dot2_avx2(const double* x, const double* c, const double* s, std::size_t n,
               double* out_c, double* out_s) {
    __m256d ac0 = _mm256_setzero_pd();
    __m256d ac1 = _mm256_setzero_pd();
    __m256d as0 = _mm256_setzero_pd();
    __m256d as1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d x0 = _mm256_loadu_pd(x + i);
        __m256d x1 = _mm256_loadu_pd(x + i + 4);
        ac0 = _mm256_fmadd_pd(x0, _mm256_loadu_pd(c + i), ac0);
        ac1 = _mm256_fmadd_pd(x1, _mm256_loadu_pd(c + i + 4), ac1);
        as0 = _mm256_fmadd_pd(x0, _mm256_loadu_pd(s + i), as0);
        as1 = _mm256_fmadd_pd(x1, _mm256_loadu_pd(s + i + 4), as1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d x0 = _mm256_loadu_pd(x + i);
        ac0 = _mm256_fmadd_pd(x0, _mm256_loadu_pd(c + i), ac0);
        as0 = _mm256_fmadd_pd(x0, _mm256_loadu_pd(s + i), as0);
    }
    double acc_c = hsum(_mm256_add_pd(ac0, ac1));
    double acc_s = hsum(_mm256_add_pd(as0, as1));
    for (; i < n; ++i) {
        acc_c += x[i] * c[i];
        acc_s += x[i] * s[i];
    }
    *out_c = acc_c;
    *out_s = acc_s;
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

constexpr KernelTable kAvx2{Isa::avx2, dot_avx2, dot2_avx2, sum_avx2, axpy_avx2};

} // namespace

const KernelTable* avx2_table_unchecked() noexcept { return &kAvx2; }

} // namespace pcdecomp::kernels
