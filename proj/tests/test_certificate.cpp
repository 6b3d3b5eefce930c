#include <gtest/gtest.h>

#include <random>

#include "rankwalk/certificate.hpp"
#include "rankwalk/woa.hpp"
#include "support/random_instances.hpp"

using namespace rankwalk;

namespace {

RegressionData worked() { return RegressionData({{0.0}, {1.0}, {2.0}}, {0.0, 1.0, 0.0}); }
ScoreVector worked_alpha() { return ScoreVector::from_sorted({-1.0, 0.0, 1.0}); }

ActivePairs pairs_at(const RegressionData& d, Vector beta) {
    const auto r = residuals(d, beta);
    return active_pairs(r, scaled_tie_tol(r, 1e-9));
}

Permutation perm(std::vector<std::size_t> one_based) {
    Permutation p;
    for (auto v : one_based) p.order.push_back(v - 1);
    return p;
}

const Matrix kWorkedG{{0.5, 0.0, 0.5}, {0.5, 0.0, 0.5}, {0.0, 1.0, 0.0}};

}  // namespace

TEST(SolveCertificate, WorkedInstanceHasUniqueSolution) {
    const auto g = solve_certificate(worked(), worked_alpha(), pairs_at(worked(), {0.0}));
    ASSERT_TRUE(g.has_value());
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR((*g)[i][j], kWorkedG[i][j], 1e-12) << i << "," << j;
}

TEST(SolveCertificate, InterceptOnlyWithZeroSumScores) {
    RegressionData d({{1.0}, {1.0}, {1.0}, {1.0}}, {3.0, -1.0, 2.0, 0.5});
    const auto alpha = make_scores(score::Sign{}, 4);
    for (double b : {-5.0, 0.0, 0.75, 9.0}) EXPECT_TRUE(solve_certificate(d, alpha, pairs_at(d, {b})).has_value());
}

TEST(SolveCertificate, InteriorPointWithNonzeroGradientHasNone) {
    // At beta = -2 the residuals (0, 3, 4) are distinct; sum alpha_i x_pi(i) = 2.
    const auto ap = pairs_at(worked(), {-2.0});
    EXPECT_FALSE(solve_certificate(worked(), worked_alpha(), ap).has_value());
    EXPECT_TRUE(improving_direction(worked(), worked_alpha(), ap).has_value());
}

TEST(Birkhoff, Identity) {
    const Matrix id{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const auto terms = birkhoff_decompose(id);
    ASSERT_EQ(terms.size(), 1u);
    EXPECT_EQ(terms[0].lambda, 1.0);
    EXPECT_EQ(terms[0].pi, Permutation::identity(3));
}

TEST(Birkhoff, HalfHalf) {
    const auto terms = birkhoff_decompose({{0.5, 0.5}, {0.5, 0.5}});
    ASSERT_EQ(terms.size(), 2u);
    EXPECT_EQ(terms[0].lambda, 0.5);
    EXPECT_EQ(terms[1].lambda, 0.5);
    EXPECT_EQ(terms[0].pi, perm({1, 2}));
    EXPECT_EQ(terms[1].pi, perm({2, 1}));
}

TEST(Birkhoff, WorkedMatrix) {
    const auto terms = birkhoff_decompose(kWorkedG);
    ASSERT_EQ(terms.size(), 2u);
    EXPECT_EQ(terms[0].lambda, 0.5);
    EXPECT_EQ(terms[0].pi, perm({1, 3, 2}));
    EXPECT_EQ(terms[1].lambda, 0.5);
    EXPECT_EQ(terms[1].pi, perm({3, 1, 2}));
}

TEST(Birkhoff, RejectsNonBistochastic) {
    EXPECT_THROW(birkhoff_decompose({{0.9, 0.0}, {0.0, 1.0}}), DomainError);
    EXPECT_THROW(birkhoff_decompose({{1.0, 0.0}}), DomainError);
}

TEST(Birkhoff, RandomRoundTrip) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + trial % 8;
        const std::size_t k = 1 + std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        std::vector<BirkhoffTerm> source;
        double total = 0.0;
        for (std::size_t m = 0; m < k; ++m) {
            Permutation pi = Permutation::identity(n);
            std::shuffle(pi.order.begin(), pi.order.end(), rng);
            source.push_back({u(rng), pi});
            total += source.back().lambda;
        }
        for (auto& t : source) t.lambda /= total;
        const Matrix g = recompose(source, n);
        const auto terms = birkhoff_decompose(g);
        EXPECT_LE(terms.size(), n * n - 2 * n + 2);
        const Matrix back = recompose(terms, n);
        double err = 0.0, lambda_sum = 0.0;
        for (const auto& t : terms) lambda_sum += t.lambda;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(back[i][j] - g[i][j]));
        EXPECT_LT(err, 1e-9) << "trial " << trial;
        EXPECT_NEAR(lambda_sum, 1.0, 1e-9);
    }
}

TEST(VerifyCertificate, WorkedCertificatePasses) {
    OptimalityCertificate cert{kWorkedG, birkhoff_decompose(kWorkedG)};
    const auto v = verify_certificate(worked(), worked_alpha(), Vector{0.0}, cert);
    EXPECT_TRUE(v.passed());
    EXPECT_NEAR(v.certified_value, 1.0, 1e-12);
    EXPECT_NEAR(v.loss, 1.0, 1e-12);
}

TEST(VerifyCertificate, WrongPointFailsSupport) {
    OptimalityCertificate cert{kWorkedG, birkhoff_decompose(kWorkedG)};
    const auto v = verify_certificate(worked(), worked_alpha(), Vector{-2.0}, cert);
    EXPECT_FALSE(v.passed());
    EXPECT_TRUE(v.failed("support"));
}

TEST(VerifyCertificate, BadRowSumFailsBistochastic) {
    Matrix g = kWorkedG;
    g[2][1] = 0.9;
    OptimalityCertificate cert{g, birkhoff_decompose(kWorkedG)};
    const auto v = verify_certificate(worked(), worked_alpha(), Vector{0.0}, cert);
    EXPECT_TRUE(v.failed("bistochastic"));
}

TEST(VerifyCertificate, ShapeMismatch) {
    OptimalityCertificate cert{{{1.0}}, {}};
    EXPECT_TRUE(verify_certificate(worked(), worked_alpha(), Vector{0.0}, cert).failed("shape"));
}

// Exactly one of the two alternative systems is feasible at any point.
TEST(Alternatives, ExactlyOneSystemFeasible) {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> coord(-6, 6);
    int with_direction = 0, with_certificate = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const auto inst = test_support::random_instance(rng, 2 + trial % 5, 1 + trial % 3);
        Vector beta(inst.data.p());
        for (auto& b : beta) b = coord(rng) / 2.0;  // half-integers hit hyperplanes often
        const auto r = residuals(inst.data, beta);
        const auto ap = active_pairs(r, scaled_tie_tol(r, 1e-9));
        const bool dir = improving_direction(inst.data, inst.alpha, ap).has_value();
        const auto g = solve_certificate(inst.data, inst.alpha, ap);
        EXPECT_NE(dir, g.has_value()) << "trial " << trial;
        with_direction += dir;
        if (g) {
            ++with_certificate;
            OptimalityCertificate cert{*g, birkhoff_decompose(*g)};
            const auto v = verify_certificate(inst.data, inst.alpha, beta, cert);
            EXPECT_TRUE(v.passed()) << "trial " << trial;
            EXPECT_NEAR(v.certified_value, eval_loss(inst.data, inst.alpha, beta), 1e-7);
        }
    }
    EXPECT_GT(with_direction, 100);
    EXPECT_GT(with_certificate, 10);
}
