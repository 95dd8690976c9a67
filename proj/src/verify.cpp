#include "opium/verify.hpp"

#include "opium/error.hpp"
#include "opium/kernels.hpp"
#include "opium/matrix.hpp"
#include "opium/prng.hpp"
#include "opium/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

namespace opium {

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols)
{
    Matrix m(rows, cols);
    for (auto& v : m.data())
        v = rng.normal(0.0, 1.0);
    return m;
}

Vector random_vector(Rng& rng, std::size_t n, double sd = 1.0)
{
    Vector v(n);
    for (auto& x : v)
        x = rng.normal(0.0, sd);
    return v;
}

std::vector<SamplePair> random_stream(Rng& rng, std::size_t m, std::size_t n, std::size_t k)
{
    std::vector<SamplePair> out(k);
    for (auto& s : out) {
        s.a = random_vector(rng, m);
        s.y = random_vector(rng, n);
    }
    return out;
}

Matrix columns_of(const std::vector<SamplePair>& stream, std::size_t count, bool targets)
{
    const std::size_t rows = targets ? stream.front().y.size() : stream.front().a.size();
    Matrix out(rows, count);
    for (std::size_t i = 0; i < count; ++i)
        out.set_col(i, targets ? stream[i].y : stream[i].a);
    return out;
}

double rel(const Matrix& got, const Matrix& want)
{
    const double denom = frobenius_norm(want);
    const double diff = frobenius_norm(subtract(got, want));
    return denom > 0.0 ? diff / denom : diff;
}

struct Outcome {
    double worst = 0.0;
    std::string detail;
};

// Track the worst value together with a description of where it occurred.
class Worst {
public:
    void see(double v, const std::string& where)
    {
        if (!(v <= worst_) || first_) { // NaN always wins
            worst_ = v;
            where_ = where;
            first_ = false;
        }
    }
    Outcome outcome(const std::string& summary) const
    {
        return {worst_, summary + (where_.empty() ? "" : "; worst at " + where_)};
    }

private:
    double worst_ = 0.0;
    std::string where_;
    bool first_ = true;
};

Outcome check_penrose(Rng& rng)
{
    Worst w;
    for (int i = 0; i < 200; ++i) {
        const std::size_t r = 1 + rng.below(50);
        const std::size_t c = 1 + rng.below(50);
        Matrix a;
        std::size_t rank = std::min(r, c);
        if (i % 3 == 0 && rank > 1) {
            rank = 1 + rng.below(rank - 1);
            a = matmul(random_matrix(rng, r, rank), random_matrix(rng, rank, c));
        } else {
            a = random_matrix(rng, r, c);
        }
        const Matrix x = pinv(a);
        const Matrix ax = matmul(a, x);
        const Matrix xa = matmul(x, a);
        const std::string where = std::to_string(r) + "x" + std::to_string(c) + " rank " + std::to_string(rank);
        w.see(rel(matmul(ax, a), a), where + " (A X A = A)");
        w.see(rel(matmul(xa, x), x), where + " (X A X = X)");
        w.see(rel(transpose(ax), ax), where + " ((A X)^T = A X)");
        w.see(rel(transpose(xa), xa), where + " ((X A)^T = X A)");
    }
    return w.outcome("200 matrices up to 50x50, one third rank-deficient");
}

Outcome check_pinv_transpose(Rng& rng)
{
    Worst w;
    for (int i = 0; i < 50; ++i) {
        const std::size_t r = 1 + rng.below(40);
        const std::size_t c = 1 + rng.below(40);
        const Matrix a = random_matrix(rng, r, c);
        w.see(rel(pinv(transpose(a)), transpose(pinv(a))), std::to_string(r) + "x" + std::to_string(c));
    }
    return w.outcome("pinv(A^T) against pinv(A)^T, 50 matrices");
}

Outcome check_pinv_involution(Rng& rng)
{
    Worst w;
    for (int i = 0; i < 50; ++i) {
        const std::size_t r = 1 + rng.below(30);
        const std::size_t c = 1 + rng.below(30);
        const Matrix a = random_matrix(rng, r, c);
        w.see(rel(pinv(pinv(a)), a), std::to_string(r) + "x" + std::to_string(c));
    }
    return w.outcome("pinv(pinv(A)) against full-rank A, 50 matrices");
}

Outcome check_opium_batch(Rng& rng)
{
    Worst w;
    constexpr double eps = 1e-3;
    for (std::size_t m : {5, 20, 50}) {
        for (std::size_t k : {std::size_t{1}, m, 10 * m, std::size_t{500}}) {
            const auto stream = random_stream(rng, m, 3, k);
            auto solver = OpiumSolver::init(m, 3, eps);
            for (const auto& s : stream)
                solver.update(s);
            const Matrix oracle = batch_solve_regularized(columns_of(stream, k, false), columns_of(stream, k, true), eps);
            w.see(rel(solver.weights(), oracle), "M=" + std::to_string(m) + " k=" + std::to_string(k));
        }
    }
    return w.outcome("W against batch_solve([eps I | A], [0 | Y]), M in {5,20,50}, N=3, eps=1e-3");
}

Outcome check_theta_inverse(Rng& rng)
{
    Worst w;
    constexpr double eps = 1e-3;
    for (std::size_t m : {3, 8, 15}) {
        const std::size_t k = 10 * m;
        const auto stream = random_stream(rng, m, 2, k);
        auto solver = OpiumSolver::init(m, 2, eps);
        Matrix corr = Matrix::identity(m);
        for (auto& v : corr.data())
            v *= eps * eps;
        for (const auto& s : stream) {
            solver.update(s);
            kernels::scalar_table().ger(corr.data().data(), m, m, 1.0, s.a.data(), s.a.data());
        }
        w.see(rel(solver.theta(), pinv(corr)), "M=" + std::to_string(m));
    }
    return w.outcome("theta against (eps^2 I + sum a a^T)^-1");
}

Outcome check_symmetry(Rng& rng)
{
    Worst w;
    const std::size_t m = 12;
    const auto stream = random_stream(rng, m, 2, 200);
    auto op = OpiumSolver::init(m, 2, 1e-3);
    auto dyn = DynamicSolver::init(m, 2, 1e-3, 1.003);
    auto grev = GrevilleSolver::init(m, 2, defaults::c_tol);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        op.update(stream[i]);
        dyn.update(stream[i]);
        grev.update(stream[i]);
        const std::string at = "step " + std::to_string(i + 1);
        w.see(max_asymmetry(op.theta()), "opium theta, " + at);
        w.see(max_asymmetry(dyn.theta()), "dynamic theta, " + at);
        w.see(max_asymmetry(grev.theta()), "greville theta, " + at);
        w.see(max_asymmetry(grev.phi()), "greville phi, " + at);
    }
    const Matrix& phi = grev.phi();
    const double proj = frobenius_norm(subtract(matmul(phi, phi), phi));
    w.see(proj > 1e-8 * std::max(frobenius_norm(phi), 1.0) ? proj : 0.0, "greville phi not a projector");
    return w.outcome("max |X - X^T| after every update, 200 steps");
}

Outcome check_residual_contraction(Rng& rng)
{
    Worst w;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t m = 1 + rng.below(20);
        const std::size_t n = 1 + rng.below(3);
        const std::size_t warm = rng.below(30);
        const int which = i % 3;
        AnySolver solver = which == 0   ? AnySolver(OpiumSolver::init(m, n, rng.uniform(1e-3, 1.0)))
                           : which == 1 ? AnySolver(LightSolver::init(m, n, std::pow(10.0, rng.uniform(-2, 2))))
                                        : AnySolver(DynamicSolver::init(m, n, rng.uniform(1e-3, 1.0), rng.uniform(1.0, 1.01)));
        for (std::size_t j = 0; j < warm; ++j)
            update(solver, random_vector(rng, m), random_vector(rng, n));
        const Vector a = random_vector(rng, m);
        const Vector y = random_vector(rng, n);
        auto residual = [&] {
            Vector p = predict(solver, a);
            for (std::size_t r = 0; r < n; ++r)
                p[r] = y[r] - p[r];
            return norm2(p);
        };
        const double before = residual();
        update(solver, a, y);
        const double after = residual();
        w.see(after - before, std::string(to_string(kind_of(solver))) + " case " + std::to_string(i));
    }
    return w.outcome("post-update minus pre-update residual, 1000 single updates over opium, light, dynamic");
}

Outcome check_alpha_one(Rng& rng)
{
    Worst w;
    const std::size_t m = 10;
    auto op = OpiumSolver::init(m, 2, 1e-3);
    auto dyn = DynamicSolver::init(m, 2, 1e-3, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const Vector a = random_vector(rng, m);
        const Vector y = random_vector(rng, 2);
        op.update(a, y);
        dyn.update(a, y);
        w.see(std::max(max_abs_diff(op.weights(), dyn.weights()), max_abs_diff(op.theta(), dyn.theta())),
              "step " + std::to_string(i + 1));
    }
    return w.outcome("dynamic(alpha=1) against opium, W and theta, 10^4 steps");
}

Outcome check_greville_interpolation(Rng& rng)
{
    Worst w;
    const std::size_t m = 50;
    const std::size_t k = 30;
    const auto stream = random_stream(rng, m, 3, k);
    auto solver = GrevilleSolver::init(m, 3, defaults::c_tol);
    for (std::size_t i = 0; i < k; ++i) {
        solver.update(stream[i]);
        const Matrix a = columns_of(stream, i + 1, false);
        const Matrix y = columns_of(stream, i + 1, true);
        w.see(rel(matmul(solver.weights(), a), y), "step " + std::to_string(i + 1));
    }
    w.see(rel(solver.weights(), batch_solve(columns_of(stream, k, false), columns_of(stream, k, true))),
          "W_30 against batch_solve");
    return w.outcome("M=50, 30 independent columns: ||W A - Y|| / ||Y|| per step and W_30 against batch");
}

Outcome check_psi_theta(Rng& rng)
{
    Worst w;
    for (int s = 0; s < 20; ++s) {
        const auto stream = random_stream(rng, 10, 2, 100);
        w.see(psi_crosscheck(stream, 1e-3).max_discrepancy, "stream " + std::to_string(s));
    }
    return w.outcome("max_k ||W_k - psi_k theta_k|| / ||W_k||, M=10, k=100, 20 streams");
}

Outcome check_kernels(Rng& rng)
{
    using namespace kernels;
    Worst w;
    const auto& ref = scalar_table();
    for (Isa isa : {Isa::avx2, Isa::neon}) {
        const KernelTable* t = table_for(isa);
        if (!t)
            continue;
        for (int i = 0; i < 100; ++i) {
            const std::size_t r = 1 + rng.below(37);
            const std::size_t c = 1 + rng.below(37);
            const std::size_t n = 1 + rng.below(23);
            const Matrix a = random_matrix(rng, r, c);
            const Matrix b = random_matrix(rng, c, n);
            const Vector x = random_vector(rng, c);
            const Vector yv = random_vector(rng, r);
            const std::string where = std::string(t->name) + " " + std::to_string(r) + "x" + std::to_string(c);

            double abs_sum = 0.0;
            for (std::size_t j = 0; j < c; ++j)
                abs_sum += std::abs(a(0, j) * x[j]);
            w.see(std::abs(t->dot(a.row(0).data(), x.data(), c) - ref.dot(a.row(0).data(), x.data(), c)) /
                      std::max(abs_sum, 1e-300),
                  where + " dot");

            Vector g1(r), g2(r);
            t->gemv(a.data().data(), r, c, x.data(), g1.data());
            ref.gemv(a.data().data(), r, c, x.data(), g2.data());
            w.see(rel(Matrix::column(g1), Matrix::column(g2)), where + " gemv");

            Matrix o1 = a, o2 = a;
            t->ger(o1.data().data(), r, c, 0.7, yv.data(), x.data());
            ref.ger(o2.data().data(), r, c, 0.7, yv.data(), x.data());
            w.see(rel(o1, o2), where + " ger");

            Vector s1 = x, s2 = x, p1 = yv, p2 = yv;
            t->scale(-1.3, s1.data(), c);
            ref.scale(-1.3, s2.data(), c);
            w.see(rel(Matrix::column(s1), Matrix::column(s2)), where + " scale");
            t->axpy(0.3, yv.data(), p1.data(), r);
            ref.axpy(0.3, yv.data(), p2.data(), r);
            w.see(rel(Matrix::column(p1), Matrix::column(p2)), where + " axpy");

            Matrix c1(r, n), c2(r, n);
            t->gemm(a.data().data(), b.data().data(), c1.data().data(), r, c, n);
            ref.gemm(a.data().data(), b.data().data(), c2.data().data(), r, c, n);
            w.see(rel(c1, c2), where + " gemm");
        }
    }
    return w.outcome("SIMD kernels against the scalar reference");
}

struct CheckDef {
    const char* name;
    double tolerance;
    std::function<Outcome(Rng&)> fn;
};

const std::vector<CheckDef>& registry()
{
    static const std::vector<CheckDef> checks = {
        {"penrose", 1e-9, check_penrose},
        {"pinv_transpose", 1e-10, check_pinv_transpose},
        {"pinv_involution", 1e-8, check_pinv_involution},
        {"opium_batch", 1e-8, check_opium_batch},
        {"theta_inverse", 1e-8, check_theta_inverse},
        {"symmetry", 1e-10, check_symmetry},
        {"residual_contraction", 1e-12, check_residual_contraction},
        {"alpha_one", 1e-12, check_alpha_one},
        {"greville_interpolation", 1e-8, check_greville_interpolation},
        {"psi_theta", 1e-8, check_psi_theta},
        {"kernels", 1e-12, check_kernels},
    };
    return checks;
}

std::uint64_t check_seed(std::string_view name, std::uint64_t seed)
{
    // FNV-1a of the name, so checks draw independent instances.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name)
        h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    return h ^ seed;
}

} // namespace

std::vector<std::string> check_names()
{
    std::vector<std::string> out;
    for (const auto& c : registry())
        out.emplace_back(c.name);
    return out;
}

CheckResult run_check(std::string_view name, std::uint64_t seed)
{
    const auto& checks = registry();
    auto it = std::find_if(checks.begin(), checks.end(), [&](const CheckDef& c) { return name == c.name; });
    if (it == checks.end())
        fail(Errc::invalid_argument, "unknown check '" + std::string(name) + "'");

    CheckResult r;
    r.name = it->name;
    r.tolerance = it->tolerance;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Rng rng(check_seed(name, seed));
        const Outcome o = it->fn(rng);
        r.worst = o.worst;
        r.detail = o.detail;
        r.passed = o.worst <= it->tolerance;
    } catch (const Error& e) {
        r.passed = false;
        r.worst = NAN;
        r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::vector<CheckResult> run_all_checks(std::uint64_t seed)
{
    std::vector<CheckResult> out;
    for (const auto& c : registry())
        out.push_back(run_check(c.name, seed));
    return out;
}

std::string serialize(const Replay& replay)
{
    std::ostringstream out;
    out << "opium-replay " << kReplayVersion << '\n'
        << "check " << replay.check << '\n'
        << "seed " << replay.seed << '\n'
        << "end\n";
    return out.str();
}

Replay parse_replay(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    auto error = [&](const std::string& what) {
        fail(Errc::parse_error, "replay line " + std::to_string(line_no) + ": " + what);
    };
    auto next = [&](const char* expected) {
        if (!std::getline(in, line)) {
            ++line_no;
            error(std::string("unexpected end of file, expected ") + expected);
        }
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        std::istringstream words(line);
        std::vector<std::string> w;
        for (std::string s; words >> s;)
            w.push_back(s);
        return w;
    };

    auto header = next("header");
    if (header.size() != 2 || header[0] != "opium-replay")
        error("expected 'opium-replay <version>'");
    if (header[1] != std::to_string(kReplayVersion))
        error("unsupported replay version '" + header[1] + "'");

    Replay r;
    auto check = next("check");
    if (check.size() != 2 || check[0] != "check")
        error("expected 'check <name>'");
    const auto names = check_names();
    if (std::find(names.begin(), names.end(), check[1]) == names.end())
        error("unknown check '" + check[1] + "'");
    r.check = check[1];

    auto seed = next("seed");
    if (seed.size() != 2 || seed[0] != "seed" || seed[1].empty() ||
        seed[1].find_first_not_of("0123456789") != std::string::npos || seed[1].size() > 20)
        error("expected 'seed <unsigned integer>'");
    try {
        r.seed = std::stoull(seed[1]);
    } catch (const std::exception&) {
        error("seed out of range");
    }

    auto end = next("end");
    if (end.size() != 1 || end[0] != "end")
        error("expected 'end'");
    return r;
}

} // namespace opium
