#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "rankwalk/errors.hpp"
#include "rankwalk/loss.hpp"
#include "rankwalk/lp.hpp"
#include "rankwalk/model.hpp"

namespace rankwalk {

inline constexpr std::size_t kOracleLimit = 7;
inline constexpr std::size_t kCellEnumerationLimit = 6;

struct OracleOptimum {
    Vector point;
    double value = 0.0;
};

struct OracleUnbounded {
    Vector point;
    Vector ray;
};

using OracleResult = std::variant<OracleOptimum, OracleUnbounded>;

/// Minimizes F as one LP in (beta, t): min t subject to
/// t >= sum_i alpha_i (y_{pi(i)} - x_{pi(i)}^T beta) for every pi in S_n.
/// Exponential in n and therefore capped at n = 7.
inline OracleResult oracle_minimize(const RegressionData& data, const ScoreVector& alpha,
                                    double lp_tol = lp::kDefaultTol) {
    check_dims(data, alpha);
    const std::size_t n = data.n(), p = data.p();
    if (n > kOracleLimit)
        throw DomainError("oracle_minimize: n = " + std::to_string(n) + " exceeds " + std::to_string(kOracleLimit));

    lp::LinearProgram prob(p + 1);
    prob.objective[p] = 1.0;
    // Distinct (coefficients, rhs) rows only; repeated scores create duplicates.
    std::vector<std::pair<Vector, double>> rows;
    Permutation pi = Permutation::identity(n);
    do {
        Vector a(p + 1, 0.0);
        double rhs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rhs += alpha[i] * data.y(pi(i));
            for (std::size_t k = 0; k < p; ++k) a[k] += alpha[i] * data.row(pi(i))[k];
        }
        a[p] = 1.0;
        rows.emplace_back(std::move(a), rhs);
    } while (std::next_permutation(pi.order.begin(), pi.order.end()));
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    for (auto& [a, rhs] : rows) prob.add(std::move(a), lp::Relation::greater_equal, rhs);

    const auto out = lp::solve_lp(prob, lp_tol);
    if (const auto* o = std::get_if<lp::Optimal>(&out))
        return OracleOptimum{Vector(o->point.begin(), o->point.begin() + static_cast<std::ptrdiff_t>(p)), o->value};
    if (const auto* u = std::get_if<lp::Unbounded>(&out))
        return OracleUnbounded{Vector(u->point.begin(), u->point.begin() + static_cast<std::ptrdiff_t>(p)),
                               Vector(u->ray.begin(), u->ray.begin() + static_cast<std::ptrdiff_t>(p))};
    throw NumericFailure("oracle_minimize: epigraph LP reported infeasible");
}

/// Chain constraints e_{pi(1)} <= ... <= e_{pi(n)} describing the cell of pi.
inline std::vector<lp::Constraint> cell_constraints(const RegressionData& data, const Permutation& pi) {
    std::vector<lp::Constraint> cons;
    for (std::size_t i = 0; i + 1 < data.n(); ++i) {
        const auto& lo = data.row(pi(i));
        const auto& hi = data.row(pi(i + 1));
        Vector a(data.p());
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = hi[k] - lo[k];
        cons.push_back({std::move(a), lp::Relation::less_equal, data.y(pi(i + 1)) - data.y(pi(i))});
    }
    return cons;
}

/// Every permutation whose cell is nonempty, including cells that only
/// exist on hyperplanes. Lexicographic order. Capped at n = 6.
inline std::vector<Permutation> enumerate_nonempty_cells(const RegressionData& data,
                                                         double lp_tol = lp::kDefaultTol) {
    const std::size_t n = data.n();
    if (n > kCellEnumerationLimit)
        throw DomainError("enumerate_nonempty_cells: n = " + std::to_string(n) + " exceeds " +
                          std::to_string(kCellEnumerationLimit));
    std::vector<Permutation> cells;
    Permutation pi = Permutation::identity(n);
    do {
        const auto cons = cell_constraints(data, pi);
        if (lp::find_feasible(data.p(), cons, lp_tol)) cells.push_back(pi);
    } while (std::next_permutation(pi.order.begin(), pi.order.end()));
    return cells;
}

}  // namespace rankwalk
