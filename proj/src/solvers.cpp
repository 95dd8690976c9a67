#include "opium/solvers.hpp"

#include "opium/error.hpp"
#include "opium/kernels.hpp"

#include <cmath>
#include <limits>

namespace opium {

namespace {

constexpr double kDenominatorFloor = 1e-300;

void check_sample(std::span<const double> a, std::span<const double> y, std::size_t m, std::size_t n, const char* who)
{
    if (a.size() != m || y.size() != n)
        fail(Errc::dimension_mismatch, std::string(who) + ": sample (a: " + std::to_string(a.size()) + ", y: " +
                                           std::to_string(y.size()) + ") for solver with M=" + std::to_string(m) +
                                           ", N=" + std::to_string(n));
    if (!all_finite(a) || !all_finite(y))
        fail(Errc::non_finite, std::string(who) + ": sample contains NaN or Inf");
}

void check_epsilon(double epsilon)
{
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        fail(Errc::invalid_argument, "epsilon must be finite and > 0, got " + std::to_string(epsilon));
}

void check_dims(std::size_t m, std::size_t n)
{
    if (m == 0 || n == 0)
        fail(Errc::invalid_argument, "solver dimensions must be >= 1");
}

Matrix scaled_identity(std::size_t m, double v)
{
    Matrix t(m, m);
    for (std::size_t i = 0; i < m; ++i)
        t(i, i) = v;
    return t;
}

/// W <- W + (y - W a) beta^T. `err` must hold N entries.
void weight_step(Matrix& w, std::span<const double> a, std::span<const double> y, const double* beta, double* err)
{
    const auto& k = kernels::active();
    const std::size_t n = w.rows();
    const std::size_t m = w.cols();
    k.gemv(w.data().data(), n, m, a.data(), err);
    for (std::size_t i = 0; i < n; ++i)
        err[i] = y[i] - err[i];
    k.ger(w.data().data(), n, m, 1.0, err, beta);
}

/// The correlation-matrix recursion shared by OPIUM and its forgetting
/// variant:
///
///     beta  = theta a / (prior + a^T theta a)
///     theta <- scale * (theta - (theta a) beta^T)
///
/// OPIUM uses prior = scale = 1; the dynamic solver uses prior = (2-a)/a and
/// scale = 1/(2-a), which reduce to exactly 1 at alpha = 1. `scratch` holds
/// 2M + N doubles; on return it starts with beta.
void correlation_step(Matrix& theta, Matrix& w, std::span<const double> a, std::span<const double> y, double prior,
                      double scale, Vector& scratch, Errc denominator_error)
{
    const auto& k = kernels::active();
    const std::size_t m = theta.rows();
    double* ta = scratch.data();
    double* beta = ta + m;
    double* err = beta + m;

    k.gemv(theta.data().data(), m, m, a.data(), ta);
    const double denom = prior + k.dot(a.data(), ta, m);
    if (!(denom > kDenominatorFloor) || !std::isfinite(denom))
        fail(denominator_error, "update denominator " + std::to_string(denom) + " is not safely positive");
    const double inv = 1.0 / denom;
    for (std::size_t i = 0; i < m; ++i)
        beta[i] = ta[i] * inv;

    k.ger(theta.data().data(), m, m, -1.0, ta, beta);
    if (scale != 1.0)
        k.scale(scale, theta.data().data(), m * m);
    symmetrize(theta);

    weight_step(w, a, y, beta, err);
}

} // namespace

const char* to_string(SolverKind kind) noexcept
{
    switch (kind) {
    case SolverKind::batch: return "batch";
    case SolverKind::opium: return "opium";
    case SolverKind::greville: return "greville";
    case SolverKind::light: return "light";
    case SolverKind::dynamic: return "dynamic";
    }
    return "unknown";
}

std::optional<SolverKind> parse_solver_kind(std::string_view name) noexcept
{
    for (auto kind : {SolverKind::batch, SolverKind::opium, SolverKind::greville, SolverKind::light, SolverKind::dynamic})
        if (name == to_string(kind))
            return kind;
    return std::nullopt;
}

// --- OPIUM -----------------------------------------------------------------

OpiumSolver OpiumSolver::init(std::size_t m, std::size_t n, double epsilon)
{
    check_dims(m, n);
    check_epsilon(epsilon);
    OpiumSolver s;
    s.w_ = Matrix(n, m);
    s.theta_ = scaled_identity(m, 1.0 / (epsilon * epsilon));
    s.epsilon_ = epsilon;
    s.scratch_.assign(2 * m + n, 0.0);
    return s;
}

OpiumSolver OpiumSolver::restore(Matrix w, Matrix theta, double epsilon, std::uint64_t k)
{
    check_epsilon(epsilon);
    check_dims(w.cols(), w.rows());
    if (theta.rows() != w.cols() || theta.cols() != w.cols())
        fail(Errc::dimension_mismatch, "opium restore: theta " + theta.shape() + " for W " + w.shape());
    if (!w.all_finite() || !theta.all_finite())
        fail(Errc::non_finite, "opium restore: state contains NaN or Inf");
    OpiumSolver s;
    s.scratch_.assign(2 * w.cols() + w.rows(), 0.0);
    s.w_ = std::move(w);
    s.theta_ = std::move(theta);
    s.epsilon_ = epsilon;
    s.k_ = k;
    return s;
}

void OpiumSolver::update(std::span<const double> a, std::span<const double> y)
{
    check_sample(a, y, hidden_dim(), output_dim(), "opium update");
    // 1 + a^T theta a >= 1 while theta is PSD; anything else is corruption.
    correlation_step(theta_, w_, a, y, 1.0, 1.0, scratch_, Errc::internal);
    ++k_;
}

Vector OpiumSolver::predict(std::span<const double> a) const
{
    return matvec(w_, a);
}

std::size_t OpiumSolver::state_bytes() const noexcept
{
    return w_.footprint_bytes() + theta_.footprint_bytes() + scratch_.capacity() * sizeof(double) + sizeof(*this);
}

std::size_t OpiumSolver::analytic_bytes(std::size_t m, std::size_t n) noexcept
{
    return (m * m + n * m) * sizeof(double);
}

// --- Greville ----------------------------------------------------------------

GrevilleSolver GrevilleSolver::init(std::size_t m, std::size_t n, double c_tol)
{
    check_dims(m, n);
    if (!(c_tol > 0.0))
        fail(Errc::invalid_argument, "c_tol must be > 0");
    GrevilleSolver s;
    s.w_ = Matrix(n, m);
    s.theta_ = Matrix(m, m);
    s.phi_ = Matrix::identity(m);
    s.c_tol_ = c_tol;
    s.scratch_.assign(3 * m + n, 0.0);
    return s;
}

GrevilleSolver GrevilleSolver::restore(Matrix w, Matrix theta, Matrix phi, double c_tol, std::uint64_t k)
{
    if (!(c_tol > 0.0))
        fail(Errc::invalid_argument, "c_tol must be > 0");
    check_dims(w.cols(), w.rows());
    const std::size_t m = w.cols();
    if (theta.rows() != m || theta.cols() != m || phi.rows() != m || phi.cols() != m)
        fail(Errc::dimension_mismatch, "greville restore: theta " + theta.shape() + ", phi " + phi.shape() +
                                           " for W " + w.shape());
    if (!w.all_finite() || !theta.all_finite() || !phi.all_finite())
        fail(Errc::non_finite, "greville restore: state contains NaN or Inf");
    GrevilleSolver s;
    s.scratch_.assign(3 * m + w.rows(), 0.0);
    s.w_ = std::move(w);
    s.theta_ = std::move(theta);
    s.phi_ = std::move(phi);
    s.c_tol_ = c_tol;
    s.k_ = k;
    return s;
}

void GrevilleSolver::update(std::span<const double> a, std::span<const double> y)
{
    const std::size_t m = hidden_dim();
    check_sample(a, y, m, output_dim(), "greville update");

    const auto& kern = kernels::active();
    double* c = scratch_.data();
    double* ta = c + m;
    double* beta = ta + m;
    double* err = beta + m;

    // c = phi a = (I - A A^+) a, the part of a outside the seen column space.
    kern.gemv(phi_.data().data(), m, m, a.data(), c);
    const double c_norm = norm2({c, m});
    const double a_norm = norm2(a);

    if (c_norm <= c_tol_ * a_norm) {
        kern.gemv(theta_.data().data(), m, m, a.data(), ta);
        const double denom = 1.0 + kern.dot(a.data(), ta, m);
        if (!(denom > kDenominatorFloor))
            fail(Errc::internal, "greville update: 1 + a^T theta a = " + std::to_string(denom));
        for (std::size_t i = 0; i < m; ++i)
            beta[i] = ta[i] / denom;
        kern.ger(theta_.data().data(), m, m, -1.0, ta, beta);
        symmetrize(theta_);
        last_branch_ = Branch::in_span;
    } else {
        const double cc = kern.dot(c, c, m);
        if (!(cc > kDenominatorFloor))
            fail(Errc::numeric_degeneracy,
                 "greville update: |c|^2 = " + std::to_string(cc) + " underflows while |c| exceeds the threshold");
        for (std::size_t i = 0; i < m; ++i)
            beta[i] = c[i] / cc;

        kern.ger(phi_.data().data(), m, m, -1.0, c, beta);
        symmetrize(phi_);

        // theta <- theta - (theta a) beta^T + (1 + a^T theta a) beta beta^T - beta (theta a)^T
        kern.gemv(theta_.data().data(), m, m, a.data(), ta);
        const double ata = kern.dot(a.data(), ta, m);
        kern.ger(theta_.data().data(), m, m, -1.0, ta, beta);
        kern.ger(theta_.data().data(), m, m, 1.0 + ata, beta, beta);
        kern.ger(theta_.data().data(), m, m, -1.0, beta, ta);
        symmetrize(theta_);
        last_branch_ = Branch::new_direction;
    }

    weight_step(w_, a, y, beta, err);
    ++k_;
}

Vector GrevilleSolver::predict(std::span<const double> a) const
{
    return matvec(w_, a);
}

std::size_t GrevilleSolver::state_bytes() const noexcept
{
    return w_.footprint_bytes() + theta_.footprint_bytes() + phi_.footprint_bytes() +
           scratch_.capacity() * sizeof(double) + sizeof(*this);
}

std::size_t GrevilleSolver::analytic_bytes(std::size_t m, std::size_t n) noexcept
{
    return (2 * m * m + n * m) * sizeof(double);
}

// --- OPIUM light ---------------------------------------------------------------

LightSolver LightSolver::init(std::size_t m, std::size_t n, double g)
{
    check_dims(m, n);
    if (!(g > 0.0) || !std::isfinite(g))
        fail(Errc::invalid_argument, "g must be finite and > 0, got " + std::to_string(g));
    LightSolver s;
    s.w_ = Matrix(n, m);
    s.g_ = g;
    s.scratch_.assign(m + n, 0.0);
    return s;
}

LightSolver LightSolver::restore(Matrix w, double g, std::uint64_t k)
{
    if (!(g > 0.0) || !std::isfinite(g))
        fail(Errc::invalid_argument, "g must be finite and > 0");
    check_dims(w.cols(), w.rows());
    if (!w.all_finite())
        fail(Errc::non_finite, "light restore: W contains NaN or Inf");
    LightSolver s;
    s.scratch_.assign(w.cols() + w.rows(), 0.0);
    s.w_ = std::move(w);
    s.g_ = g;
    s.k_ = k;
    return s;
}

void LightSolver::update(std::span<const double> a, std::span<const double> y)
{
    const std::size_t m = hidden_dim();
    check_sample(a, y, m, output_dim(), "light update");
    double* beta = scratch_.data();
    double* err = beta + m;
    const double denom = 1.0 / g_ + kernels::active().dot(a.data(), a.data(), m);
    for (std::size_t i = 0; i < m; ++i)
        beta[i] = a[i] / denom;
    weight_step(w_, a, y, beta, err);
    ++k_;
}

Vector LightSolver::predict(std::span<const double> a) const
{
    return matvec(w_, a);
}

std::size_t LightSolver::state_bytes() const noexcept
{
    return w_.footprint_bytes() + scratch_.capacity() * sizeof(double) + sizeof(*this);
}

std::size_t LightSolver::analytic_bytes(std::size_t m, std::size_t n) noexcept
{
    return n * m * sizeof(double);
}

// --- Dynamic OPIUM -------------------------------------------------------------

namespace {

void check_alpha(double alpha)
{
    if (!(alpha >= 1.0 && alpha < 2.0))
        fail(Errc::invalid_argument, "alpha must lie in [1, 2), got " + std::to_string(alpha) +
                                         " (the forgetting recursion divides by 2 - alpha and is unstable beyond)");
}

} // namespace

DynamicSolver DynamicSolver::init(std::size_t m, std::size_t n, double epsilon, double alpha)
{
    check_dims(m, n);
    check_epsilon(epsilon);
    check_alpha(alpha);
    DynamicSolver s;
    s.w_ = Matrix(n, m);
    s.theta_ = scaled_identity(m, 1.0 / (epsilon * epsilon));
    s.epsilon_ = epsilon;
    s.alpha_ = alpha;
    s.scratch_.assign(2 * m + n, 0.0);
    return s;
}

DynamicSolver DynamicSolver::restore(Matrix w, Matrix theta, double epsilon, double alpha, std::uint64_t k)
{
    check_epsilon(epsilon);
    check_alpha(alpha);
    check_dims(w.cols(), w.rows());
    if (theta.rows() != w.cols() || theta.cols() != w.cols())
        fail(Errc::dimension_mismatch, "dynamic restore: theta " + theta.shape() + " for W " + w.shape());
    if (!w.all_finite() || !theta.all_finite())
        fail(Errc::non_finite, "dynamic restore: state contains NaN or Inf");
    DynamicSolver s;
    s.scratch_.assign(2 * w.cols() + w.rows(), 0.0);
    s.w_ = std::move(w);
    s.theta_ = std::move(theta);
    s.epsilon_ = epsilon;
    s.alpha_ = alpha;
    s.k_ = k;
    return s;
}

void DynamicSolver::update(std::span<const double> a, std::span<const double> y)
{
    check_sample(a, y, hidden_dim(), output_dim(), "dynamic update");
    const double prior = (2.0 - alpha_) / alpha_;
    const double scale = 1.0 / (2.0 - alpha_);
    correlation_step(theta_, w_, a, y, prior, scale, scratch_, Errc::numeric_degeneracy);
    if (!theta_.all_finite() || !w_.all_finite())
        fail(Errc::numeric_degeneracy, "dynamic update diverged after " + std::to_string(k_ + 1) + " updates");
    ++k_;
}

Vector DynamicSolver::predict(std::span<const double> a) const
{
    return matvec(w_, a);
}

std::size_t DynamicSolver::state_bytes() const noexcept
{
    return w_.footprint_bytes() + theta_.footprint_bytes() + scratch_.capacity() * sizeof(double) + sizeof(*this);
}

std::size_t DynamicSolver::analytic_bytes(std::size_t m, std::size_t n) noexcept
{
    return (m * m + n * m) * sizeof(double);
}

// --- AnySolver -----------------------------------------------------------------

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

} // namespace

SolverKind kind_of(const AnySolver& solver) noexcept
{
    return std::visit(overloaded{
                          [](const OpiumSolver&) { return SolverKind::opium; },
                          [](const GrevilleSolver&) { return SolverKind::greville; },
                          [](const LightSolver&) { return SolverKind::light; },
                          [](const DynamicSolver&) { return SolverKind::dynamic; },
                      },
                      solver);
}

void update(AnySolver& solver, std::span<const double> a, std::span<const double> y)
{
    std::visit([&](auto& s) { s.update(a, y); }, solver);
}

Vector predict(const AnySolver& solver, std::span<const double> a)
{
    return std::visit([&](const auto& s) { return s.predict(a); }, solver);
}

const Matrix& weights(const AnySolver& solver) noexcept
{
    return std::visit([](const auto& s) -> const Matrix& { return s.weights(); }, solver);
}

std::uint64_t update_count(const AnySolver& solver) noexcept
{
    return std::visit([](const auto& s) { return s.k(); }, solver);
}

std::size_t state_bytes(const AnySolver& solver) noexcept
{
    return std::visit([](const auto& s) { return s.state_bytes(); }, solver);
}

std::size_t analytic_bytes(const AnySolver& solver) noexcept
{
    return std::visit(
        [](const auto& s) { return std::decay_t<decltype(s)>::analytic_bytes(s.hidden_dim(), s.output_dim()); },
        solver);
}

const Matrix* theta_of(const AnySolver& solver) noexcept
{
    return std::visit(overloaded{
                          [](const LightSolver&) -> const Matrix* { return nullptr; },
                          [](const auto& s) -> const Matrix* { return &s.theta(); },
                      },
                      solver);
}

// --- psi/theta cross-check -------------------------------------------------------

PsiReport psi_crosscheck(std::span<const SamplePair> stream, double epsilon)
{
    PsiReport report;
    if (stream.empty())
        return report;

    const std::size_t m = stream.front().a.size();
    const std::size_t n = stream.front().y.size();
    auto solver = OpiumSolver::init(m, n, epsilon);
    Matrix psi(n, m);
    const double floor = std::numeric_limits<double>::min();

    for (const auto& s : stream) {
        solver.update(s);
        kernels::active().ger(psi.data().data(), n, m, 1.0, s.y.data(), s.a.data());
        const Matrix via_psi = matmul(psi, solver.theta());
        const double disc = frobenius_norm(subtract(solver.weights(), via_psi)) /
                            (frobenius_norm(solver.weights()) + floor);
        report.max_discrepancy = std::max(report.max_discrepancy, disc);
        ++report.steps;
    }
    return report;
}

} // namespace opium
