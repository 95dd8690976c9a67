#pragma once

// Online solvers for the output weights W (N x M) of an ELM. Each consumes one
// (activation a, target y) pair per update and keeps W equal to, or close to,
// the least-squares solution over everything seen so far.
//
// Every update has the form
//
//     W <- W + (y - W a) beta^T
//
// and the solvers differ only in how beta (a column vector, length M) is
// formed:
//
//   OpiumSolver     beta = theta a / (1 + a^T theta a), theta ~ (A A^T + eps^2 I)^-1
//   GrevilleSolver  exact pseudoinverse recursion with a column-space projector
//   LightSolver     beta = a / (1/g + a^T a), i.e. theta frozen at g I
//   DynamicSolver   OPIUM with forgetting factor alpha in [1, 2)
//
// Solvers have a single-writer contract: update() must be externally
// serialised, predict() on an unchanging solver is safe from many threads.

#include "opium/matrix.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace opium {

enum class SolverKind {
    batch,
    opium,
    greville,
    light,
    dynamic,
};

const char* to_string(SolverKind kind) noexcept;
std::optional<SolverKind> parse_solver_kind(std::string_view name) noexcept;

struct SamplePair {
    Vector a; // hidden activation, length M
    Vector y; // target, length N
};

namespace defaults {
inline constexpr double epsilon = 1e-3;
inline constexpr double g = 1.0;
inline constexpr double c_tol = 1e-9;
inline constexpr double alpha = 1.003;
} // namespace defaults

class OpiumSolver {
public:
    /// W = 0, theta = eps^-2 I.
    static OpiumSolver init(std::size_t m, std::size_t n, double epsilon);
    /// Rebuilds a solver from snapshot parts, validating shapes and values.
    static OpiumSolver restore(Matrix w, Matrix theta, double epsilon, std::uint64_t k);

    void update(std::span<const double> a, std::span<const double> y);
    void update(const SamplePair& s) { update(s.a, s.y); }
    Vector predict(std::span<const double> a) const;

    const Matrix& weights() const noexcept { return w_; }
    const Matrix& theta() const noexcept { return theta_; }
    double epsilon() const noexcept { return epsilon_; }
    std::uint64_t k() const noexcept { return k_; }
    std::size_t hidden_dim() const noexcept { return w_.cols(); }
    std::size_t output_dim() const noexcept { return w_.rows(); }

    std::size_t state_bytes() const noexcept;
    static std::size_t analytic_bytes(std::size_t m, std::size_t n) noexcept;

private:
    OpiumSolver() = default;

    Matrix w_;
    Matrix theta_;
    double epsilon_ = defaults::epsilon;
    std::uint64_t k_ = 0;
    Vector scratch_;
};

class GrevilleSolver {
public:
    enum class Branch {
        none,
        in_span,  // c = 0: a lies in the column space seen so far
        new_direction, // c != 0
    };

    /// W = 0, theta = 0, phi = I.
    static GrevilleSolver init(std::size_t m, std::size_t n, double c_tol);
    static GrevilleSolver restore(Matrix w, Matrix theta, Matrix phi, double c_tol, std::uint64_t k);

    void update(std::span<const double> a, std::span<const double> y);
    void update(const SamplePair& s) { update(s.a, s.y); }
    Vector predict(std::span<const double> a) const;

    const Matrix& weights() const noexcept { return w_; }
    const Matrix& theta() const noexcept { return theta_; }
    const Matrix& phi() const noexcept { return phi_; }
    double c_tol() const noexcept { return c_tol_; }
    std::uint64_t k() const noexcept { return k_; }
    Branch last_branch() const noexcept { return last_branch_; }
    std::size_t hidden_dim() const noexcept { return w_.cols(); }
    std::size_t output_dim() const noexcept { return w_.rows(); }

    std::size_t state_bytes() const noexcept;
    static std::size_t analytic_bytes(std::size_t m, std::size_t n) noexcept;

private:
    GrevilleSolver() = default;

    Matrix w_;
    Matrix theta_;
    Matrix phi_;
    double c_tol_ = defaults::c_tol;
    std::uint64_t k_ = 0;
    Branch last_branch_ = Branch::none;
    Vector scratch_;
};

class LightSolver {
public:
    static LightSolver init(std::size_t m, std::size_t n, double g);
    static LightSolver restore(Matrix w, double g, std::uint64_t k);

    void update(std::span<const double> a, std::span<const double> y);
    void update(const SamplePair& s) { update(s.a, s.y); }
    Vector predict(std::span<const double> a) const;

    const Matrix& weights() const noexcept { return w_; }
    double g() const noexcept { return g_; }
    std::uint64_t k() const noexcept { return k_; }
    std::size_t hidden_dim() const noexcept { return w_.cols(); }
    std::size_t output_dim() const noexcept { return w_.rows(); }

    std::size_t state_bytes() const noexcept;
    static std::size_t analytic_bytes(std::size_t m, std::size_t n) noexcept;

private:
    LightSolver() = default;

    Matrix w_;
    double g_ = defaults::g;
    std::uint64_t k_ = 0;
    Vector scratch_;
};

class DynamicSolver {
public:
    /// W = 0, theta = eps^-2 I. alpha outside [1, 2) is rejected: the
    /// recursion divides by 2 - alpha and, like an IIR filter, diverges for
    /// alpha >= 2.
    static DynamicSolver init(std::size_t m, std::size_t n, double epsilon, double alpha);
    static DynamicSolver restore(Matrix w, Matrix theta, double epsilon, double alpha, std::uint64_t k);

    void update(std::span<const double> a, std::span<const double> y);
    void update(const SamplePair& s) { update(s.a, s.y); }
    Vector predict(std::span<const double> a) const;

    const Matrix& weights() const noexcept { return w_; }
    const Matrix& theta() const noexcept { return theta_; }
    double epsilon() const noexcept { return epsilon_; }
    double alpha() const noexcept { return alpha_; }
    std::uint64_t k() const noexcept { return k_; }
    std::size_t hidden_dim() const noexcept { return w_.cols(); }
    std::size_t output_dim() const noexcept { return w_.rows(); }

    std::size_t state_bytes() const noexcept;
    static std::size_t analytic_bytes(std::size_t m, std::size_t n) noexcept;

private:
    DynamicSolver() = default;

    Matrix w_;
    Matrix theta_;
    double epsilon_ = defaults::epsilon;
    double alpha_ = 1.0;
    std::uint64_t k_ = 0;
    Vector scratch_;
};

using AnySolver = std::variant<OpiumSolver, GrevilleSolver, LightSolver, DynamicSolver>;

SolverKind kind_of(const AnySolver& solver) noexcept;
void update(AnySolver& solver, std::span<const double> a, std::span<const double> y);
Vector predict(const AnySolver& solver, std::span<const double> a);
const Matrix& weights(const AnySolver& solver) noexcept;
std::uint64_t update_count(const AnySolver& solver) noexcept;
std::size_t state_bytes(const AnySolver& solver) noexcept;
/// Bytes an ideal implementation needs for the solver's matrices.
std::size_t analytic_bytes(const AnySolver& solver) noexcept;
/// theta of OPIUM, Greville, and dynamic solvers; nullptr for the light solver.
const Matrix* theta_of(const AnySolver& solver) noexcept;

struct PsiReport {
    std::size_t steps = 0;
    double max_discrepancy = 0.0;
};

/// Runs OPIUM over `stream` alongside the cross-correlation psi = sum y a^T
/// and reports max_k ||W_k - psi_k theta_k||_F / (||W_k||_F + floor).
PsiReport psi_crosscheck(std::span<const SamplePair> stream, double epsilon);

} // namespace opium
