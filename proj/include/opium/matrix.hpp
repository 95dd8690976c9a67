#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace opium {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    /// Takes ownership of row-major `data`; rejects non-finite entries.
    static Matrix from_data(std::size_t rows, std::size_t cols, std::vector<double> data);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);
    static Matrix column(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    Vector col(std::size_t c) const;
    void set_col(std::size_t c, std::span<const double> values);

    std::string shape() const;
    bool all_finite() const noexcept;

    /// Bytes held by the element buffer.
    std::size_t footprint_bytes() const noexcept { return data_.capacity() * sizeof(double); }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double s);

/// [a | b], column concatenation.
Matrix hstack(const Matrix& a, const Matrix& b);

/// y = A x
Vector matvec(const Matrix& a, std::span<const double> x);

double frobenius_norm(const Matrix& a);
/// ||a - b||_F / ||b||_F, or ||a - b||_F when b is zero.
double relative_frobenius(const Matrix& a, const Matrix& b);
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_asymmetry(const Matrix& a);

/// a <- (a + a^T) / 2 in place; a must be square.
void symmetrize(Matrix& a);

/// Default singular-value cutoff relative to the largest singular value:
/// 1e-12 * max(rows, cols).
double default_pinv_tolerance(const Matrix& a) noexcept;

/// Moore-Penrose pseudoinverse. Singular values below rel_tol * sigma_max are
/// treated as zero, so rank-deficient input yields the minimum-norm inverse.
Matrix pinv(const Matrix& a, double rel_tol);
Matrix pinv(const Matrix& a);

/// Minimum-norm least-squares weights W = Y A^+ for column-aligned A (M x k)
/// and Y (N x k).
Matrix batch_solve(const Matrix& a_all, const Matrix& y_all);

/// batch_solve([eps I | A], [0 | Y]), the system an eps-initialised OPIUM
/// solver is equivalent to.
Matrix batch_solve_regularized(const Matrix& a_all, const Matrix& y_all, double epsilon);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
bool all_finite(std::span<const double> x) noexcept;

} // namespace opium
