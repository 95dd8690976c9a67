// AArch64 always has Advanced SIMD, so no runtime probe is needed.

#include "opium/kernels.hpp"

#include <arm_neon.h>

namespace opium::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n)
{
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i)
        sum += x[i] * y[i];
    return sum;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n)
{
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i)
        y[i] += alpha * x[i];
}

void scale_neon(double alpha, double* x, std::size_t n)
{
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
    for (; i < n; ++i)
        x[i] *= alpha;
}

void gemv_neon(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y)
{
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = dot_neon(a + r * cols, x, cols);
}

void ger_neon(double* a, std::size_t rows, std::size_t cols, double alpha, const double* x, const double* y)
{
    for (std::size_t r = 0; r < rows; ++r)
        axpy_neon(alpha * x[r], y, a + r * cols, cols);
}

void gemm_neon(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n)
{
    for (std::size_t i = 0; i < m * n; ++i)
        c[i] = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p)
            axpy_neon(a[i * k + p], b + p * n, c + i * n, n);
}

constexpr KernelTable kNeon{
    Isa::neon, "neon",
    dot_neon, axpy_neon, scale_neon, gemv_neon, ger_neon, gemm_neon,
};

} // namespace

const KernelTable* neon_table() noexcept
{
    return &kNeon;
}

} // namespace opium::kernels
