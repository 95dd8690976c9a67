#pragma once

// Reference computations for tests. Built on Eigen's LU/LDLT so they share no
// code with the library's SVD path or its SIMD kernels.

#include "opium/matrix.hpp"
#include "opium/prng.hpp"
#include "opium/solvers.hpp"

#include <Eigen/Dense>

#include <vector>

namespace oracle {

using Dense = Eigen::MatrixXd;

inline Dense to_eigen(const opium::Matrix& m)
{
    Dense out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            out(r, c) = m(r, c);
    return out;
}

inline opium::Matrix from_eigen(const Dense& d)
{
    opium::Matrix out(d.rows(), d.cols());
    for (Eigen::Index r = 0; r < d.rows(); ++r)
        for (Eigen::Index c = 0; c < d.cols(); ++c)
            out(r, c) = d(r, c);
    return out;
}

inline double rel(const Dense& got, const Dense& want)
{
    return (got - want).norm() / want.norm();
}

inline double rel(const opium::Matrix& got, const Dense& want)
{
    return rel(to_eigen(got), want);
}

/// Triple loop.
inline opium::Matrix naive_matmul(const opium::Matrix& a, const opium::Matrix& b)
{
    opium::Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            long double s = 0;
            for (std::size_t k = 0; k < a.cols(); ++k)
                s += static_cast<long double>(a(i, k)) * b(k, j);
            c(i, j) = static_cast<double>(s);
        }
    return c;
}

/// Y A^T (eps^2 I + A A^T)^-1, the minimiser of ||W [eps I | A] - [0 | Y]||.
inline Dense ridge_weights(const Dense& a, const Dense& y, double eps)
{
    Dense corr = a * a.transpose();
    corr.diagonal().array() += eps * eps;
    return corr.ldlt().solve(a * y.transpose()).transpose();
}

/// Y (A^T A)^-1 A^T for A with independent columns.
inline Dense full_column_rank_weights(const Dense& a, const Dense& y)
{
    Dense gram = a.transpose() * a;
    return y * gram.partialPivLu().solve(a.transpose());
}

inline Dense correlation_inverse(const Dense& a, double eps)
{
    Dense corr = a * a.transpose();
    corr.diagonal().array() += eps * eps;
    return corr.inverse();
}

inline opium::Matrix random_matrix(opium::Rng& rng, std::size_t rows, std::size_t cols)
{
    opium::Matrix m(rows, cols);
    for (auto& v : m.data())
        v = rng.normal(0.0, 1.0);
    return m;
}

inline opium::Vector random_vector(opium::Rng& rng, std::size_t n)
{
    opium::Vector v(n);
    for (auto& x : v)
        x = rng.normal(0.0, 1.0);
    return v;
}

inline std::vector<opium::SamplePair> random_stream(opium::Rng& rng, std::size_t m, std::size_t n, std::size_t k)
{
    std::vector<opium::SamplePair> out(k);
    for (auto& s : out) {
        s.a = random_vector(rng, m);
        s.y = random_vector(rng, n);
    }
    return out;
}

/// Columns a_1..a_k (or y_1..y_k) of a stream as an Eigen matrix.
inline Dense stack(const std::vector<opium::SamplePair>& stream, std::size_t k, bool targets)
{
    const std::size_t rows = targets ? stream.front().y.size() : stream.front().a.size();
    Dense out(rows, k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < rows; ++i)
            out(i, j) = targets ? stream[j].y[i] : stream[j].a[i];
    return out;
}

} // namespace oracle
