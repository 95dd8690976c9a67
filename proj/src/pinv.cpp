#include "opium/error.hpp"
#include "opium/kernels.hpp"
#include "opium/matrix.hpp"

#include <lapacke.h>

#include <algorithm>

namespace opium {

// Eigen 3.4.0's BDCSVD returned factors that did not reconstruct some
// rank-deficient wide matrices, so the SVD comes from LAPACK: the divide and
// conquer driver first, the QR-iteration one if it does not converge.

double default_pinv_tolerance(const Matrix& a) noexcept
{
    return 1e-12 * static_cast<double>(std::max(a.rows(), a.cols()));
}

Matrix pinv(const Matrix& a)
{
    return pinv(a, default_pinv_tolerance(a));
}

Matrix pinv(const Matrix& a, double rel_tol)
{
    if (!(rel_tol > 0.0))
        fail(Errc::invalid_argument, "pinv tolerance must be > 0");
    if (!a.all_finite())
        fail(Errc::non_finite, "pinv input " + a.shape() + " contains NaN or Inf");

    const std::size_t r = a.rows();
    const std::size_t c = a.cols();
    if (a.empty())
        return Matrix(c, r);

    const std::size_t k = std::min(r, c);
    const auto lr = static_cast<lapack_int>(r);
    const auto lc = static_cast<lapack_int>(c);
    const auto lk = static_cast<lapack_int>(k);

    std::vector<double> sigma(k);
    Matrix u(r, k);
    Matrix vt(k, c);
    std::vector<double> work(a.data().begin(), a.data().end());
    lapack_int info = LAPACKE_dgesdd(LAPACK_ROW_MAJOR, 'S', lr, lc, work.data(), lc, sigma.data(), u.data().data(),
                                     lk, vt.data().data(), lc);
    if (info > 0) {
        work.assign(a.data().begin(), a.data().end());
        std::vector<double> superb(k > 1 ? k - 1 : 1);
        info = LAPACKE_dgesvd(LAPACK_ROW_MAJOR, 'S', 'S', lr, lc, work.data(), lc, sigma.data(), u.data().data(), lk,
                              vt.data().data(), lc, superb.data());
    }
    if (info != 0)
        fail(Errc::numeric_degeneracy, "pinv: SVD of " + a.shape() + " failed (LAPACK info " + std::to_string(info) + ")");

    // A+ = V diag(1/sigma) U^T, with singular values at or below the cutoff dropped.
    const double cutoff = rel_tol * sigma[0];
    std::size_t rank = 0;
    while (rank < k && sigma[rank] > cutoff)
        ++rank;
    Matrix vs(rank, c);
    for (std::size_t i = 0; i < rank; ++i) {
        const double inv = 1.0 / sigma[i];
        auto src = vt.row(i);
        auto dst = vs.row(i);
        for (std::size_t j = 0; j < c; ++j)
            dst[j] = src[j] * inv;
    }
    Matrix ur(rank, r); // leading columns of U, transposed
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < rank; ++j)
            ur(j, i) = u(i, j);
    if (rank == 0)
        return Matrix(c, r);
    return matmul(transpose(vs), ur);
}

} // namespace opium
