#include <gtest/gtest.h>

#include <random>

#include "rankwalk/lp.hpp"
#include "support/oracles.hpp"

using namespace rankwalk;
using namespace rankwalk::lp;

namespace {

LinearProgram one_var(double c) { return LinearProgram(Vector{c}); }

}  // namespace

TEST(SolveLp, LowerBoundIsOptimal) {
    auto prob = one_var(1.0);
    prob.add({1.0}, Relation::greater_equal, 3.0);
    const auto out = solve_lp(prob);
    const auto* opt = std::get_if<Optimal>(&out);
    ASSERT_NE(opt, nullptr);
    EXPECT_NEAR(opt->point[0], 3.0, 1e-12);
    EXPECT_NEAR(opt->value, 3.0, 1e-12);
    EXPECT_TRUE(audit_duality(prob, *opt).within(1e-7));
    EXPECT_NEAR(opt->duals[0], 1.0, 1e-12);
}

TEST(SolveLp, UpperBoundOnlyIsUnbounded) {
    auto prob = one_var(1.0);
    prob.add({1.0}, Relation::less_equal, 3.0);
    const auto out = solve_lp(prob);
    const auto* unb = std::get_if<Unbounded>(&out);
    ASSERT_NE(unb, nullptr);
    EXPECT_DOUBLE_EQ(unb->ray[0], -1.0);
    EXPECT_LE(unb->point[0], 3.0 + 1e-9);
}

TEST(SolveLp, ContradictoryBoundsInfeasible) {
    auto prob = one_var(0.0);
    prob.add({1.0}, Relation::greater_equal, 1.0);
    prob.add({1.0}, Relation::less_equal, 0.0);
    EXPECT_TRUE(std::holds_alternative<Infeasible>(solve_lp(prob)));
}

TEST(SolveLp, RejectsMalformedProblems) {
    auto prob = one_var(1.0);
    prob.add({1.0, 2.0}, Relation::greater_equal, 0.0);
    EXPECT_THROW(solve_lp(prob), DomainError);
    EXPECT_THROW(solve_lp(one_var(1.0), 0.0), DomainError);
    auto nan = one_var(std::nan(""));
    EXPECT_THROW(solve_lp(nan), DomainError);
}

TEST(FindFeasible, Interval) {
    std::vector<Constraint> cons{{{1.0}, Relation::greater_equal, 0.0}, {{1.0}, Relation::less_equal, 1.0}};
    auto x = find_feasible(1, cons);
    ASSERT_TRUE(x.has_value());
    EXPECT_GE((*x)[0], -1e-12);
    EXPECT_LE((*x)[0], 1.0 + 1e-12);
}

TEST(FindFeasible, EmptyHalfLines) {
    std::vector<Constraint> cons{{{1.0}, Relation::greater_equal, 1.0}, {{-1.0}, Relation::greater_equal, 0.0}};
    EXPECT_FALSE(find_feasible(1, cons).has_value());
}

TEST(FindFeasible, SimplexEquality) {
    std::vector<Constraint> cons{{{1.0, 1.0}, Relation::equal, 1.0},
                                 {{1.0, 0.0}, Relation::greater_equal, 0.0},
                                 {{0.0, 1.0}, Relation::greater_equal, 0.0}};
    auto x = find_feasible(2, cons);
    ASSERT_TRUE(x.has_value());
    EXPECT_NEAR((*x)[0] + (*x)[1], 1.0, 1e-9);
    EXPECT_GE((*x)[0], -1e-9);
    EXPECT_GE((*x)[1], -1e-9);
}

TEST(SolveLp, DegenerateVertexTerminates) {
    // Many constraints through the origin: the classic cycling trap for
    // largest-coefficient pricing.
    LinearProgram prob(Vector{-0.75, 20.0, -0.5, 6.0});
    prob.add({0.25, -8.0, -1.0, 9.0}, Relation::less_equal, 0.0);
    prob.add({0.5, -12.0, -0.5, 3.0}, Relation::less_equal, 0.0);
    prob.add({0.0, 0.0, 1.0, 0.0}, Relation::less_equal, 1.0);
    for (int v = 0; v < 4; ++v) {
        Vector e(4, 0.0);
        e[v] = 1.0;
        prob.add(e, Relation::greater_equal, 0.0);
    }
    const auto out = solve_lp(prob);
    const auto* opt = std::get_if<Optimal>(&out);
    ASSERT_NE(opt, nullptr);
    EXPECT_NEAR(opt->value, -1.25, 1e-9);
    EXPECT_TRUE(audit_duality(prob, *opt).within(1e-7));
}

TEST(SolveLp, DeterministicOutcome) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> coef(-3, 3);
    LinearProgram prob(Vector{1.0, -2.0, 0.5});
    for (int k = 0; k < 8; ++k) prob.add({double(coef(rng)), double(coef(rng)), double(coef(rng))},
                                         Relation::greater_equal, double(coef(rng)));
    for (int v = 0; v < 3; ++v) {
        Vector e(3, 0.0);
        e[v] = 1.0;
        prob.add(e, Relation::less_equal, 5.0);
        prob.add(e, Relation::greater_equal, -5.0);
    }
    const auto a = solve_lp(prob);
    const auto b = solve_lp(prob);
    ASSERT_EQ(a.index(), b.index());
    if (const auto* oa = std::get_if<Optimal>(&a)) {
        const auto& ob = std::get<Optimal>(b);
        EXPECT_EQ(oa->point, ob.point);
        EXPECT_EQ(oa->value, ob.value);
    }
}

// Random boxed LPs (<= 6 vars, <= 10 constraints) against vertex enumeration,
// with a duality audit on every optimal answer.
TEST(SolveLp, RandomBoxedAgainstVertexEnumeration) {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> coef(-3, 3);
    std::uniform_int_distribution<int> nvars(1, 4);
    int optimal = 0, infeasible = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const int nv = nvars(rng);
        const int extra = std::uniform_int_distribution<int>(0, 10 - 2 * nv)(rng);
        LinearProgram prob(nv);
        for (auto& c : prob.objective) c = coef(rng);
        for (int k = 0; k < extra; ++k) {
            Vector a(nv);
            for (auto& v : a) v = coef(rng);
            const int r = std::uniform_int_distribution<int>(0, 5)(rng);
            const Relation rel = r < 3 ? Relation::greater_equal : (r < 5 ? Relation::less_equal : Relation::equal);
            prob.add(a, rel, coef(rng));
        }
        for (int v = 0; v < nv; ++v) {
            Vector e(nv, 0.0);
            e[v] = 1.0;
            prob.add(e, Relation::less_equal, 4.0);
            prob.add(e, Relation::greater_equal, -4.0);
        }
        const auto ref = ref::vertex_enumeration(prob);
        const auto out = solve_lp(prob);
        if (!ref.feasible) {
            EXPECT_TRUE(std::holds_alternative<Infeasible>(out)) << "trial " << trial;
            ++infeasible;
            continue;
        }
        const auto* opt = std::get_if<Optimal>(&out);
        ASSERT_NE(opt, nullptr) << "trial " << trial;
        EXPECT_NEAR(opt->value, ref.value, 1e-7) << "trial " << trial;
        const auto audit = audit_duality(prob, *opt);
        EXPECT_TRUE(audit.within(1e-7)) << "trial " << trial << " stationarity " << audit.stationarity
                                        << " slackness " << audit.slackness << " gap " << audit.gap;
        ++optimal;
    }
    EXPECT_GT(optimal, 100);
    EXPECT_GT(infeasible, 5);
}

TEST(SolveLp, RandomUnboundedRaysAreCertified) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> coef(-3, 3);
    int unbounded = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int nv = std::uniform_int_distribution<int>(1, 4)(rng);
        LinearProgram prob(nv);
        for (auto& c : prob.objective) c = coef(rng);
        const int m = std::uniform_int_distribution<int>(1, 6)(rng);
        for (int k = 0; k < m; ++k) {
            Vector a(nv);
            for (auto& v : a) v = coef(rng);
            prob.add(a, Relation::greater_equal, coef(rng));
        }
        const auto out = solve_lp(prob);
        const auto* unb = std::get_if<Unbounded>(&out);
        if (!unb) continue;
        ++unbounded;
        double slope = 0.0;
        for (int v = 0; v < nv; ++v) slope += prob.objective[v] * unb->ray[v];
        EXPECT_LT(slope, 0.0);
        for (const auto& con : prob.constraints) {
            double at_point = 0.0, along = 0.0;
            for (int v = 0; v < nv; ++v) {
                at_point += con.coeffs[v] * unb->point[v];
                along += con.coeffs[v] * unb->ray[v];
            }
            EXPECT_GE(at_point, con.rhs - 1e-8);
            EXPECT_GE(along, -1e-9);
        }
    }
    EXPECT_GT(unbounded, 20);
}
