#include "opium/error.hpp"
#include "opium/solvers.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <thread>

using namespace opium;
using oracle::Dense;

namespace {

double residual(const AnySolver& s, const Vector& a, const Vector& y)
{
    Vector p = predict(s, a);
    for (std::size_t i = 0; i < y.size(); ++i)
        p[i] = y[i] - p[i];
    return norm2(p);
}

} // namespace

TEST(OpiumInit, EpsilonOneGivesIdentity)
{
    auto s = OpiumSolver::init(3, 2, 1.0);
    EXPECT_EQ(s.weights(), Matrix(2, 3));
    EXPECT_EQ(s.theta(), Matrix::identity(3));
    EXPECT_EQ(s.k(), 0u);
}

TEST(OpiumInit, SmallEpsilon)
{
    auto s = OpiumSolver::init(2, 1, 0.001);
    EXPECT_NEAR(s.theta()(0, 0), 1e6, 1e-6);
    EXPECT_NEAR(s.theta()(1, 1), 1e6, 1e-6);
    EXPECT_EQ(s.theta()(0, 1), 0.0);
}

TEST(OpiumInit, ThetaIsPinvOfEpsilonCorrelation)
{
    for (double eps : {0.5, 2.0, 1e-2}) {
        auto s = OpiumSolver::init(4, 1, eps);
        const Matrix e = scaled(Matrix::identity(4), eps);
        EXPECT_LE(max_abs_diff(s.theta(), pinv(matmul(e, transpose(e)))) / s.theta()(0, 0), 1e-14);
    }
}

TEST(OpiumInit, RejectsNonPositiveEpsilon)
{
    EXPECT_THROW(OpiumSolver::init(2, 1, 0.0), Error);
    EXPECT_THROW(OpiumSolver::init(2, 1, -1.0), Error);
}

TEST(OpiumUpdate, ZeroActivationLeavesStateUnchanged)
{
    Rng rng(1);
    auto s = OpiumSolver::init(4, 2, 0.3);
    for (int i = 0; i < 5; ++i)
        s.update(oracle::random_vector(rng, 4), oracle::random_vector(rng, 2));
    const Matrix w = s.weights(), t = s.theta();
    s.update(Vector(4, 0.0), Vector{1.0, -1.0});
    EXPECT_EQ(s.weights(), w);
    EXPECT_EQ(s.theta(), t);
}

TEST(OpiumUpdate, OneByOneByHand)
{
    auto s = OpiumSolver::init(1, 1, 1.0);
    s.update(Vector{1.0}, Vector{1.0});
    EXPECT_DOUBLE_EQ(s.weights()(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(s.theta()(0, 0), 0.5);
    // same as the batch solution of A = [1 1], Y = [0 1]
    EXPECT_NEAR(batch_solve(Matrix::from_rows({{1, 1}}), Matrix::from_rows({{0, 1}}))(0, 0), 0.5, 1e-15);
}

TEST(OpiumUpdate, PredictionContractsTowardTarget)
{
    Rng rng(2);
    const double eps = 0.7;
    auto s = OpiumSolver::init(5, 2, eps);
    const Vector a = oracle::random_vector(rng, 5), y = oracle::random_vector(rng, 2);
    s.update(a, y);
    const double q = dot(a, a) / (eps * eps);
    const Vector p = s.predict(a);
    for (std::size_t i = 0; i < 2; ++i)
        EXPECT_NEAR(p[i], y[i] * q / (1 + q), 1e-14);
}

TEST(OpiumUpdate, RejectsBadSamples)
{
    auto s = OpiumSolver::init(3, 1, 1.0);
    EXPECT_THROW(s.update(Vector{1, 2}, Vector{1}), Error);
    EXPECT_THROW(s.update(Vector{1, NAN, 2}, Vector{1}), Error);
    EXPECT_THROW(s.update(Vector{1, 2, 3}, Vector{INFINITY}), Error);
    EXPECT_THROW(s.predict(Vector{1, 2}), Error);
}

class OpiumOracle : public ::testing::TestWithParam<std::pair<std::size_t, std::size_t>> {};

TEST_P(OpiumOracle, MatchesRidgeBatchSolution)
{
    const auto [m, k] = GetParam();
    Rng rng(100 + m * 7 + k);
    const double eps = 1e-3;
    const auto stream = oracle::random_stream(rng, m, 3, k);
    auto s = OpiumSolver::init(m, 3, eps);
    for (const auto& p : stream)
        s.update(p);
    const Dense a = oracle::stack(stream, k, false), y = oracle::stack(stream, k, true);
    EXPECT_LE(oracle::rel(s.weights(), oracle::ridge_weights(a, y, eps)), 1e-8);
    EXPECT_LE(oracle::rel(s.weights(), oracle::to_eigen(batch_solve_regularized(oracle::from_eigen(a),
                                                                                 oracle::from_eigen(y), eps))),
              1e-8);
}

INSTANTIATE_TEST_SUITE_P(Sizes, OpiumOracle,
                         ::testing::Values(std::pair<std::size_t, std::size_t>{5, 1}, std::pair<std::size_t, std::size_t>{5, 5},
                                           std::pair<std::size_t, std::size_t>{5, 50}, std::pair<std::size_t, std::size_t>{20, 1},
                                           std::pair<std::size_t, std::size_t>{20, 20}, std::pair<std::size_t, std::size_t>{20, 200},
                                           std::pair<std::size_t, std::size_t>{20, 500}, std::pair<std::size_t, std::size_t>{50, 1},
                                           std::pair<std::size_t, std::size_t>{50, 50}, std::pair<std::size_t, std::size_t>{50, 500}));

TEST(OpiumInvariants, ThetaTracksCorrelationInverse)
{
    Rng rng(3);
    for (std::size_t m : {3, 8}) {
        const auto stream = oracle::random_stream(rng, m, 1, 6 * m);
        auto s = OpiumSolver::init(m, 1, 1e-3);
        for (std::size_t k = 0; k < stream.size(); ++k) {
            s.update(stream[k]);
            if (k + 1 >= m) { // before that theta carries eps^-2 = 1e6 in unseen directions
                EXPECT_LE(oracle::rel(s.theta(), oracle::correlation_inverse(oracle::stack(stream, k + 1, false), 1e-3)),
                          1e-8);
            }
        }
    }
}

TEST(OpiumInvariants, ThetaSymmetricAndPositiveDefinite)
{
    Rng rng(4);
    auto s = OpiumSolver::init(6, 2, 1e-2);
    for (int k = 0; k < 300; ++k) {
        s.update(oracle::random_vector(rng, 6), oracle::random_vector(rng, 2));
        ASSERT_LE(max_asymmetry(s.theta()), 1e-10);
        ASSERT_TRUE(s.weights().all_finite());
    }
    Eigen::SelfAdjointEigenSolver<Dense> eig(oracle::to_eigen(s.theta()));
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(Greville, InitState)
{
    auto s = GrevilleSolver::init(2, 1, 1e-9);
    EXPECT_EQ(s.phi(), Matrix::identity(2));
    EXPECT_EQ(s.theta(), Matrix(2, 2));
    EXPECT_EQ(s.weights(), Matrix(1, 2));
    EXPECT_THROW(GrevilleSolver::init(2, 1, 0.0), Error);
}

TEST(Greville, FirstUpdateIsSingleColumnPinv)
{
    auto s = GrevilleSolver::init(2, 1, 1e-9);
    s.update(Vector{3, 4}, Vector{1});
    EXPECT_EQ(s.last_branch(), GrevilleSolver::Branch::new_direction);
    EXPECT_NEAR(s.weights()(0, 0), 0.12, 1e-15);
    EXPECT_NEAR(s.weights()(0, 1), 0.16, 1e-15);

    Rng rng(5);
    const Vector a = oracle::random_vector(rng, 7), y = oracle::random_vector(rng, 2);
    auto g = GrevilleSolver::init(7, 2, 1e-9);
    g.update(a, y);
    EXPECT_LE(max_abs_diff(g.weights(), batch_solve(Matrix::column(a), Matrix::column(y))), 1e-14);
}

TEST(Greville, ExactInterpolationWhileColumnsIndependent)
{
    Rng rng(6);
    const std::size_t m = 50, k = 30;
    const auto stream = oracle::random_stream(rng, m, 3, k);
    auto s = GrevilleSolver::init(m, 3, 1e-9);
    for (std::size_t i = 0; i < k; ++i) {
        s.update(stream[i]);
        const Dense a = oracle::stack(stream, i + 1, false), y = oracle::stack(stream, i + 1, true);
        EXPECT_LE((oracle::to_eigen(s.weights()) * a - y).norm(), 1e-8 * y.norm()) << "step " << i + 1;
    }
    const Dense a = oracle::stack(stream, k, false), y = oracle::stack(stream, k, true);
    EXPECT_LE(oracle::rel(s.weights(), oracle::full_column_rank_weights(a, y)), 1e-8);
}

TEST(Greville, RepeatedColumnTakesInSpanBranch)
{
    Rng rng(7);
    auto stream = oracle::random_stream(rng, 6, 2, 4);
    stream.push_back({stream[1].a, oracle::random_vector(rng, 2)});
    auto s = GrevilleSolver::init(6, 2, 1e-9);
    for (const auto& p : stream)
        s.update(p);
    EXPECT_EQ(s.last_branch(), GrevilleSolver::Branch::in_span);
    EXPECT_LE(max_abs_diff(s.weights(), batch_solve(oracle::from_eigen(oracle::stack(stream, 5, false)),
                                                     oracle::from_eigen(oracle::stack(stream, 5, true)))),
              1e-10);
}

TEST(Greville, PhiIsSymmetricProjectorAndFreezesWhenSpanned)
{
    Rng rng(8);
    const std::size_t m = 5;
    auto s = GrevilleSolver::init(m, 1, 1e-9);
    for (int k = 0; k < 12; ++k) {
        s.update(oracle::random_vector(rng, m), oracle::random_vector(rng, 1));
        const Matrix& phi = s.phi();
        EXPECT_LE(max_asymmetry(phi), 1e-10);
        EXPECT_LE(frobenius_norm(subtract(matmul(phi, phi), phi)), 1e-8 * std::max(frobenius_norm(phi), 1e-300) + 1e-14);
        if (k >= static_cast<int>(m)) {
            EXPECT_EQ(s.last_branch(), GrevilleSolver::Branch::in_span);
            EXPECT_LE(frobenius_norm(phi), 1e-12);
        }
    }
    // past M columns Greville is least squares over everything seen
    const Matrix before = s.phi();
    s.update(oracle::random_vector(rng, m), oracle::random_vector(rng, 1));
    EXPECT_EQ(s.phi(), before);
}

TEST(Greville, OverdeterminedMatchesLeastSquares)
{
    Rng rng(9);
    const auto stream = oracle::random_stream(rng, 8, 2, 60);
    auto s = GrevilleSolver::init(8, 2, 1e-9);
    for (const auto& p : stream)
        s.update(p);
    const Dense a = oracle::stack(stream, 60, false), y = oracle::stack(stream, 60, true);
    const Dense want = y * a.transpose() * (a * a.transpose()).inverse();
    EXPECT_LE(oracle::rel(s.weights(), want), 1e-8);
}

TEST(Light, DefaultsAndAcceptedGains)
{
    EXPECT_EQ(defaults::g, 1.0);
    for (double g : {100.0, 4.0, 0.4, 0.01})
        EXPECT_NO_THROW(LightSolver::init(3, 1, g));
    EXPECT_THROW(LightSolver::init(3, 1, 0.0), Error);
    EXPECT_THROW(LightSolver::init(3, 1, -1.0), Error);
    EXPECT_EQ(LightSolver::init(3, 2, 1.0).weights(), Matrix(2, 3));
}

TEST(Light, OneByOneByHand)
{
    auto s = LightSolver::init(1, 1, 1.0);
    s.update(Vector{1.0}, Vector{1.0});
    EXPECT_DOUBLE_EQ(s.weights()(0, 0), 0.5);
}

TEST(Light, ZeroActivationIsNoOp)
{
    auto s = LightSolver::init(3, 1, 1.0);
    s.update(Vector{1, 2, 3}, Vector{4});
    const Matrix w = s.weights();
    s.update(Vector{0, 0, 0}, Vector{9});
    EXPECT_EQ(s.weights(), w);
}

TEST(Light, ResidualShrinksByKnownFactor)
{
    Rng rng(10);
    for (double g : {0.01, 1.0, 100.0}) {
        AnySolver s = LightSolver::init(6, 2, g);
        for (int i = 0; i < 10; ++i)
            update(s, oracle::random_vector(rng, 6), oracle::random_vector(rng, 2));
        const Vector a = oracle::random_vector(rng, 6), y = oracle::random_vector(rng, 2);
        const double before = residual(s, a, y);
        update(s, a, y);
        const double aa = dot(a, a);
        EXPECT_NEAR(residual(s, a, y), before * (1 - aa / (1 / g + aa)), 1e-12 * before);
    }
}

TEST(Dynamic, AlphaRange)
{
    EXPECT_NO_THROW(DynamicSolver::init(2, 1, 1.0, 1.0));
    EXPECT_NO_THROW(DynamicSolver::init(2, 1, 1.0, 1.003));
    EXPECT_THROW(DynamicSolver::init(2, 1, 1.0, 2.0), Error);
    EXPECT_THROW(DynamicSolver::init(2, 1, 1.0, 2.5), Error);
    EXPECT_THROW(DynamicSolver::init(2, 1, 1.0, 0.99), Error);
    try {
        DynamicSolver::init(2, 1, 1.0, 2.0);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invalid_argument);
        EXPECT_NE(std::string(e.what()).find("[1, 2)"), std::string::npos) << e.what();
    }
}

TEST(Dynamic, HandEvaluationAlphaOnePointFive)
{
    auto s = DynamicSolver::init(1, 1, 1.0, 1.5);
    s.update(Vector{1.0}, Vector{1.0});
    EXPECT_DOUBLE_EQ(s.weights()(0, 0), 0.75);
    EXPECT_DOUBLE_EQ(s.theta()(0, 0), 0.5);
}

TEST(Dynamic, AlphaOneIsBitwiseOpium)
{
    Rng rng(11);
    auto op = OpiumSolver::init(7, 2, 1e-2);
    auto dy = DynamicSolver::init(7, 2, 1e-2, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const Vector a = oracle::random_vector(rng, 7), y = oracle::random_vector(rng, 2);
        op.update(a, y);
        dy.update(a, y);
        ASSERT_EQ(op.weights(), dy.weights()) << "step " << k;
        ASSERT_EQ(op.theta(), dy.theta()) << "step " << k;
    }
}

TEST(Dynamic, StationaryMapStaysNearOpium)
{
    Rng rng(12);
    const std::size_t m = 10;
    const Matrix map = oracle::random_matrix(rng, 2, m);
    auto op = OpiumSolver::init(m, 2, 1e-3);
    auto dy = DynamicSolver::init(m, 2, 1e-3, 1.003);
    for (int k = 0; k < 10000; ++k) {
        const Vector a = oracle::random_vector(rng, m);
        Vector y = matvec(map, a);
        for (auto& v : y)
            v += 0.01 * rng.normal(0, 1);
        op.update(a, y);
        dy.update(a, y);
    }
    EXPECT_LE(frobenius_norm(subtract(dy.weights(), op.weights())) / frobenius_norm(op.weights()), 0.05);
    EXPECT_LE(max_asymmetry(dy.theta()), 1e-10);
}

TEST(Predict, FreshSolversPredictZero)
{
    const Vector a{0.3, -1.0, 2.0};
    for (AnySolver s : {AnySolver(OpiumSolver::init(3, 2, 1.0)), AnySolver(GrevilleSolver::init(3, 2, 1e-9)),
                        AnySolver(LightSolver::init(3, 2, 1.0)), AnySolver(DynamicSolver::init(3, 2, 1.0, 1.1))})
        EXPECT_EQ(predict(s, a), (Vector{0.0, 0.0}));
}

TEST(Predict, MatchesForwardProduct)
{
    Rng rng(13);
    auto s = OpiumSolver::init(4, 3, 0.1);
    for (int i = 0; i < 10; ++i)
        s.update(oracle::random_vector(rng, 4), oracle::random_vector(rng, 3));
    const Vector a = oracle::random_vector(rng, 4);
    EXPECT_EQ(s.predict(a), matvec(s.weights(), a));
}

TEST(Predict, ConcurrentReadersAgree)
{
    Rng rng(14);
    auto s = OpiumSolver::init(16, 2, 0.1);
    for (int i = 0; i < 50; ++i)
        s.update(oracle::random_vector(rng, 16), oracle::random_vector(rng, 2));
    const Vector a = oracle::random_vector(rng, 16);
    const Vector want = s.predict(a);
    std::vector<Vector> got(4);
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < got.size(); ++t)
            pool.emplace_back([&, t] {
                for (int r = 0; r < 200; ++r)
                    got[t] = s.predict(a);
            });
    }
    for (const auto& g : got)
        EXPECT_EQ(g, want);
}

TEST(ResidualContraction, RandomSingleUpdates)
{
    Rng rng(15);
    for (int i = 0; i < 300; ++i) {
        const std::size_t m = 1 + rng.below(12), n = 1 + rng.below(3);
        AnySolver s = i % 3 == 0   ? AnySolver(OpiumSolver::init(m, n, rng.uniform(1e-3, 1)))
                      : i % 3 == 1 ? AnySolver(LightSolver::init(m, n, rng.uniform(0.01, 10)))
                                   : AnySolver(DynamicSolver::init(m, n, rng.uniform(1e-3, 1), rng.uniform(1, 1.5)));
        for (std::size_t w = rng.below(20); w > 0; --w)
            update(s, oracle::random_vector(rng, m), oracle::random_vector(rng, n));
        const Vector a = oracle::random_vector(rng, m), y = oracle::random_vector(rng, n);
        const double before = residual(s, a, y);
        update(s, a, y);
        EXPECT_LE(residual(s, a, y), before + 1e-12);
    }
}

TEST(PsiCrosscheck, EmptyAndSingle)
{
    EXPECT_EQ(psi_crosscheck({}, 1e-3).steps, 0u);
    EXPECT_EQ(psi_crosscheck({}, 1e-3).max_discrepancy, 0.0);
    const std::vector<SamplePair> one{{Vector{1.0, 2.0}, Vector{3.0}}};
    const auto r = psi_crosscheck(one, 0.5);
    EXPECT_EQ(r.steps, 1u);
    EXPECT_LE(r.max_discrepancy, 1e-14);
}

TEST(PsiCrosscheck, RandomStreamsStayBelowTolerance)
{
    Rng rng(16);
    for (int s = 0; s < 5; ++s) {
        const auto stream = oracle::random_stream(rng, 10, 2, 100);
        EXPECT_LE(psi_crosscheck(stream, 1e-3).max_discrepancy, 1e-8);
    }
}

TEST(Footprint, AnalyticBytes)
{
    EXPECT_EQ(OpiumSolver::analytic_bytes(10, 2), (100u + 20u) * 8u);
    EXPECT_EQ(GrevilleSolver::analytic_bytes(10, 2), (200u + 20u) * 8u);
    EXPECT_EQ(LightSolver::analytic_bytes(10, 2), 20u * 8u);
    EXPECT_EQ(DynamicSolver::analytic_bytes(10, 2), (100u + 20u) * 8u);
    auto s = OpiumSolver::init(100, 10, 1.0);
    EXPECT_LE(s.state_bytes(), 2 * OpiumSolver::analytic_bytes(100, 10));
    const std::size_t before = s.state_bytes();
    Rng rng(17);
    for (int i = 0; i < 500; ++i)
        s.update(oracle::random_vector(rng, 100), oracle::random_vector(rng, 10));
    EXPECT_EQ(s.state_bytes(), before);
}

TEST(SolverKind, Names)
{
    for (auto k : {SolverKind::batch, SolverKind::opium, SolverKind::greville, SolverKind::light, SolverKind::dynamic})
        EXPECT_EQ(parse_solver_kind(to_string(k)), k);
    EXPECT_FALSE(parse_solver_kind("svd").has_value());
}
