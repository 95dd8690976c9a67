#include "opium/kernels.hpp"

namespace opium::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sum += x[i] * y[i];
    return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        x[i] *= alpha;
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y)
{
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = dot_scalar(a + r * cols, x, cols);
}

void ger_scalar(double* a, std::size_t rows, std::size_t cols, double alpha, const double* x, const double* y)
{
    for (std::size_t r = 0; r < rows; ++r)
        axpy_scalar(alpha * x[r], y, a + r * cols, cols);
}

void gemm_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n)
{
    for (std::size_t i = 0; i < m * n; ++i)
        c[i] = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p)
            axpy_scalar(a[i * k + p], b + p * n, c + i * n, n);
}

constexpr KernelTable kScalar{
    Isa::scalar, "scalar",
    dot_scalar, axpy_scalar, scale_scalar, gemv_scalar, ger_scalar, gemm_scalar,
};

} // namespace

const KernelTable& scalar_table() noexcept
{
    return kScalar;
}

} // namespace opium::kernels
