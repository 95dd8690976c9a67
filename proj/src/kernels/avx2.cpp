// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.

#include "opium/kernels.hpp"

#include <immintrin.h>

namespace opium::kernels {
namespace {

inline double hsum(__m256d v)
{
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* x, const double* y, std::size_t n)
{
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double sum = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i)
        sum += x[i] * y[i];
    return sum;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n)
{
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i + 4, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i)
        y[i] += alpha * x[i];
}

void scale_avx2(double alpha, double* x, std::size_t n)
{
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i)
        x[i] *= alpha;
}

// Four rows at a time so each load of x feeds four FMAs.
void gemv_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y)
{
    std::size_t r = 0;
    for (; r + 4 <= rows; r += 4) {
        const double* a0 = a + (r + 0) * cols;
        const double* a1 = a + (r + 1) * cols;
        const double* a2 = a + (r + 2) * cols;
        const double* a3 = a + (r + 3) * cols;
        __m256d s0 = _mm256_setzero_pd();
        __m256d s1 = _mm256_setzero_pd();
        __m256d s2 = _mm256_setzero_pd();
        __m256d s3 = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            const __m256d vx = _mm256_loadu_pd(x + c);
            s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a0 + c), vx, s0);
            s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a1 + c), vx, s1);
            s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a2 + c), vx, s2);
            s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a3 + c), vx, s3);
        }
        double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
        for (; c < cols; ++c) {
            t0 += a0[c] * x[c];
            t1 += a1[c] * x[c];
            t2 += a2[c] * x[c];
            t3 += a3[c] * x[c];
        }
        y[r + 0] = t0;
        y[r + 1] = t1;
        y[r + 2] = t2;
        y[r + 3] = t3;
    }
    for (; r < rows; ++r)
        y[r] = dot_avx2(a + r * cols, x, cols);
}

void ger_avx2(double* a, std::size_t rows, std::size_t cols, double alpha, const double* x, const double* y)
{
    for (std::size_t r = 0; r < rows; ++r)
        axpy_avx2(alpha * x[r], y, a + r * cols, cols);
}

void gemm_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n)
{
    for (std::size_t i = 0; i < m * n; ++i)
        c[i] = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p)
            axpy_avx2(a[i * k + p], b + p * n, c + i * n, n);
}

constexpr KernelTable kAvx2{
    Isa::avx2, "avx2",
    dot_avx2, axpy_avx2, scale_avx2, gemv_avx2, ger_avx2, gemm_avx2,
};

} // namespace

const KernelTable* avx2_table() noexcept
{
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return &kAvx2;
    return nullptr;
}

} // namespace opium::kernels
