#include "opium/matrix.hpp"

#include "opium/error.hpp"
#include "opium/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace opium {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        fail(Errc::dimension_mismatch, std::string(op) + ": " + a.shape() + " vs " + b.shape());
}

} // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill)
{
}

Matrix Matrix::from_data(std::size_t rows, std::size_t cols, std::vector<double> data)
{
    if (data.size() != rows * cols)
        fail(Errc::dimension_mismatch, "matrix data has " + std::to_string(data.size()) + " entries, expected " +
                                           std::to_string(rows) + "x" + std::to_string(cols));
    if (!opium::all_finite(data))
        fail(Errc::non_finite, "matrix data contains NaN or Inf");
    Matrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.data_ = std::move(data);
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows)
{
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c)
            fail(Errc::dimension_mismatch, "ragged row list");
        data.insert(data.end(), row.begin(), row.end());
    }
    return from_data(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag)
{
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i)
        m(i, i) = diag[i];
    return m;
}

Matrix Matrix::column(std::span<const double> values)
{
    return from_data(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Vector Matrix::col(std::size_t c) const
{
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        out[r] = (*this)(r, c);
    return out;
}

void Matrix::set_col(std::size_t c, std::span<const double> values)
{
    if (values.size() != rows_)
        fail(Errc::dimension_mismatch, "set_col: " + std::to_string(values.size()) + " values for " + shape());
    for (std::size_t r = 0; r < rows_; ++r)
        (*this)(r, c) = values[r];
}

std::string Matrix::shape() const
{
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Matrix::all_finite() const noexcept
{
    return opium::all_finite(data_);
}

Matrix matmul(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.rows())
        fail(Errc::dimension_mismatch, "matmul: " + a.shape() + " * " + b.shape());
    Matrix c(a.rows(), b.cols());
    if (c.empty())
        return c;
    kernels::active().gemm(a.data().data(), b.data().data(), c.data().data(), a.rows(), a.cols(), b.cols());
    return c;
}

Matrix transpose(const Matrix& a)
{
    Matrix t(a.cols(), a.rows());
    constexpr std::size_t block = 32;
    for (std::size_t r0 = 0; r0 < a.rows(); r0 += block)
        for (std::size_t c0 = 0; c0 < a.cols(); c0 += block)
            for (std::size_t r = r0; r < std::min(r0 + block, a.rows()); ++r)
                for (std::size_t c = c0; c < std::min(c0 + block, a.cols()); ++c)
                    t(c, r) = a(r, c);
    return t;
}

Matrix add(const Matrix& a, const Matrix& b)
{
    require_same_shape(a, b, "add");
    Matrix out = a;
    kernels::active().axpy(1.0, b.data().data(), out.data().data(), out.size());
    return out;
}

Matrix subtract(const Matrix& a, const Matrix& b)
{
    require_same_shape(a, b, "subtract");
    Matrix out = a;
    kernels::active().axpy(-1.0, b.data().data(), out.data().data(), out.size());
    return out;
}

Matrix scaled(const Matrix& a, double s)
{
    Matrix out = a;
    kernels::active().scale(s, out.data().data(), out.size());
    return out;
}

Matrix hstack(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows())
        fail(Errc::dimension_mismatch, "hstack: " + a.shape() + " | " + b.shape());
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        std::copy(a.row(r).begin(), a.row(r).end(), out.row(r).begin());
        std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(a.cols()));
    }
    return out;
}

Vector matvec(const Matrix& a, std::span<const double> x)
{
    if (a.cols() != x.size())
        fail(Errc::dimension_mismatch, "matvec: " + a.shape() + " * vector of " + std::to_string(x.size()));
    Vector y(a.rows());
    if (a.rows() && a.cols())
        kernels::active().gemv(a.data().data(), a.rows(), a.cols(), x.data(), y.data());
    return y;
}

double frobenius_norm(const Matrix& a)
{
    return norm2(a.data());
}

double relative_frobenius(const Matrix& a, const Matrix& b)
{
    require_same_shape(a, b, "relative_frobenius");
    const double diff = frobenius_norm(subtract(a, b));
    const double ref = frobenius_norm(b);
    return ref > 0.0 ? diff / ref : diff;
}

double max_abs_diff(const Matrix& a, const Matrix& b)
{
    require_same_shape(a, b, "max_abs_diff");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

double max_asymmetry(const Matrix& a)
{
    if (a.rows() != a.cols())
        fail(Errc::dimension_mismatch, "max_asymmetry of non-square " + a.shape());
    double worst = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = r + 1; c < a.cols(); ++c)
            worst = std::max(worst, std::abs(a(r, c) - a(c, r)));
    return worst;
}

void symmetrize(Matrix& a)
{
    if (a.rows() != a.cols())
        fail(Errc::dimension_mismatch, "symmetrize of non-square " + a.shape());
    const std::size_t n = a.rows();
    constexpr std::size_t block = 64;
    for (std::size_t r0 = 0; r0 < n; r0 += block) {
        for (std::size_t c0 = r0; c0 < n; c0 += block) {
            const std::size_t r1 = std::min(r0 + block, n);
            const std::size_t c1 = std::min(c0 + block, n);
            for (std::size_t r = r0; r < r1; ++r) {
                for (std::size_t c = std::max(c0, r + 1); c < c1; ++c) {
                    const double m = 0.5 * (a(r, c) + a(c, r));
                    a(r, c) = m;
                    a(c, r) = m;
                }
            }
        }
    }
}

Matrix batch_solve(const Matrix& a_all, const Matrix& y_all)
{
    if (a_all.cols() != y_all.cols())
        fail(Errc::dimension_mismatch,
             "batch_solve: activations " + a_all.shape() + " and targets " + y_all.shape() + " differ in column count");
    return matmul(y_all, pinv(a_all));
}

Matrix batch_solve_regularized(const Matrix& a_all, const Matrix& y_all, double epsilon)
{
    if (!(epsilon > 0.0))
        fail(Errc::invalid_argument, "epsilon must be > 0");
    const std::size_t m = a_all.rows();
    return batch_solve(hstack(scaled(Matrix::identity(m), epsilon), a_all), hstack(Matrix(y_all.rows(), m), y_all));
}

double dot(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        fail(Errc::dimension_mismatch, "dot: lengths " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
    return kernels::active().dot(x.data(), y.data(), x.size());
}

double norm2(std::span<const double> x)
{
    // Scaled accumulation so huge or tiny entries do not overflow/underflow.
    double scale = 0.0;
    for (double v : x)
        scale = std::max(scale, std::abs(v));
    if (scale == 0.0 || !std::isfinite(scale))
        return scale;
    double sum = 0.0;
    for (double v : x) {
        const double t = v / scale;
        sum += t * t;
    }
    return scale * std::sqrt(sum);
}

bool all_finite(std::span<const double> x) noexcept
{
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

} // namespace opium
