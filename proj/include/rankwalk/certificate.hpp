#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rankwalk/errors.hpp"
#include "rankwalk/loss.hpp"
#include "rankwalk/lp.hpp"
#include "rankwalk/model.hpp"

namespace rankwalk {

/// Dense square matrix stored row by row. Row index = rank, column index =
/// observation, so a permutation matrix has a one at (i, pi(i)).
using Matrix = std::vector<Vector>;

struct BirkhoffTerm {
    double lambda = 0.0;
    Permutation pi;
};

/// Proof that beta minimizes F: a bistochastic G supported on the active pairs
/// with sum_j x_j sum_i alpha_i G_ij = 0, together with a convex combination of
/// permutation matrices reproducing G.
struct OptimalityCertificate {
    Matrix G;
    std::vector<BirkhoffTerm> decomposition;
};

inline constexpr double kSupportTol = 1e-9;

namespace detail {

inline Matrix zero_matrix(std::size_t n) { return Matrix(n, Vector(n, 0.0)); }

inline double max_line_sum_error(const Matrix& g) {
    const std::size_t n = g.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row += g[i][j];
            col += g[j][i];
        }
        worst = std::max({worst, std::abs(row - 1.0), std::abs(col - 1.0)});
    }
    return worst;
}

inline double min_entry(const Matrix& g) {
    double m = 0.0;
    for (const auto& row : g)
        for (double v : row) m = std::min(m, v);
    return m;
}

// Kuhn's augmenting-path step for one rank.
inline bool augment(const Matrix& g, std::size_t i, double tol, std::vector<std::size_t>& owner,
                    std::vector<bool>& seen) {
    const std::size_t n = g.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (g[i][j] <= tol || seen[j]) continue;
        seen[j] = true;
        if (owner[j] == n || augment(g, owner[j], tol, owner, seen)) {
            owner[j] = i;
            return true;
        }
    }
    return false;
}

// Perfect matching on {(i, j) : g_ij > tol}. Each rank first takes the lowest
// free column it can reach directly, then falls back to augmenting paths.
inline std::optional<Permutation> perfect_matching(const Matrix& g, double tol) {
    const std::size_t n = g.size();
    std::vector<std::size_t> owner(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        bool done = false;
        for (std::size_t j = 0; j < n && !done; ++j)
            if (g[i][j] > tol && owner[j] == n) {
                owner[j] = i;
                done = true;
            }
        if (done) continue;
        std::vector<bool> seen(n, false);
        if (!augment(g, i, tol, owner, seen)) return std::nullopt;
    }
    Permutation pi;
    pi.order.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) pi.order[owner[j]] = j;
    return pi;
}

}  // namespace detail

/// Greedy Birkhoff decomposition. Throws DomainError when G is not
/// bistochastic within 1e-7 or when the support stops admitting a perfect
/// matching before the residual mass is exhausted.
inline std::vector<BirkhoffTerm> birkhoff_decompose(const Matrix& G, double support_tol = kSupportTol) {
    const std::size_t n = G.size();
    for (const auto& row : G)
        if (row.size() != n) throw DomainError("birkhoff_decompose: matrix is not square");
    if (n == 0) return {};
    if (detail::max_line_sum_error(G) > 1e-7 || detail::min_entry(G) < -1e-7)
        throw DomainError("birkhoff_decompose: matrix is not bistochastic");

    Matrix rest = G;
    std::vector<BirkhoffTerm> terms;
    const std::size_t cap = n * n;
    while (true) {
        double remaining = 0.0;
        for (const auto& row : rest)
            for (double v : row) remaining = std::max(remaining, v);
        if (remaining <= support_tol) break;
        if (terms.size() >= cap)
            throw DomainError("birkhoff_decompose: no termination within n^2 terms");
        auto pi = detail::perfect_matching(rest, support_tol);
        if (!pi)
            throw DomainError("birkhoff_decompose: support has no perfect matching with mass " +
                              std::to_string(remaining) + " left; input was not bistochastic");
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (rest[i][(*pi)(i)] < rest[arg][(*pi)(arg)]) arg = i;
        const double lambda = rest[arg][(*pi)(arg)];
        for (std::size_t i = 0; i < n; ++i) rest[i][(*pi)(i)] -= lambda;
        rest[arg][(*pi)(arg)] = 0.0;
        terms.push_back(BirkhoffTerm{lambda, std::move(*pi)});
    }
    return terms;
}

/// sum_m lambda_m P_{pi_m}.
inline Matrix recompose(const std::vector<BirkhoffTerm>& terms, std::size_t n) {
    Matrix g = detail::zero_matrix(n);
    for (const auto& t : terms)
        for (std::size_t i = 0; i < n; ++i) g[i][t.pi(i)] += t.lambda;
    return g;
}

/// Solves for G over the active pairs: nonnegative, unit row and column sums,
/// and the balance condition. nullopt means no such G exists, so an improving
/// direction does.
inline std::optional<Matrix> solve_certificate(const RegressionData& data, const ScoreVector& alpha,
                                               const ActivePairs& ap, double lp_tol = lp::kDefaultTol) {
    check_dims(data, alpha);
    const std::size_t n = data.n(), p = data.p();
    const auto pairs = ap.pairs();
    const std::size_t m = pairs.size();

    lp::LinearProgram prob(m);
    for (std::size_t k = 0; k < p; ++k) {
        Vector a(m);
        for (std::size_t v = 0; v < m; ++v) a[v] = alpha[pairs[v].first] * data.row(pairs[v].second)[k];
        prob.add(std::move(a), lp::Relation::equal, 0.0);
    }
    for (std::size_t j = 0; j < n; ++j) {
        Vector a(m, 0.0);
        for (std::size_t v = 0; v < m; ++v)
            if (pairs[v].second == j) a[v] = 1.0;
        prob.add(std::move(a), lp::Relation::equal, 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        Vector a(m, 0.0);
        for (std::size_t v = 0; v < m; ++v)
            if (pairs[v].first == i) a[v] = 1.0;
        prob.add(std::move(a), lp::Relation::equal, 1.0);
    }
    for (std::size_t v = 0; v < m; ++v) {
        Vector a(m, 0.0);
        a[v] = 1.0;
        prob.add(std::move(a), lp::Relation::greater_equal, 0.0);
    }

    const auto out = lp::solve_lp(prob, lp_tol);
    const Vector* x = nullptr;
    if (const auto* o = std::get_if<lp::Optimal>(&out)) x = &o->point;
    if (const auto* u = std::get_if<lp::Unbounded>(&out)) x = &u->point;
    if (!x) return std::nullopt;

    Matrix g = detail::zero_matrix(n);
    for (std::size_t v = 0; v < m; ++v) {
        const double val = (*x)[v];
        g[pairs[v].first][pairs[v].second] = val > 1e-14 ? val : 0.0;
    }
    return g;
}

/// solve_certificate followed by birkhoff_decompose.
inline std::optional<OptimalityCertificate> build_certificate(const RegressionData& data, const ScoreVector& alpha,
                                                              const ActivePairs& ap,
                                                              double lp_tol = lp::kDefaultTol) {
    auto g = solve_certificate(data, alpha, ap, lp_tol);
    if (!g) return std::nullopt;
    OptimalityCertificate cert;
    cert.decomposition = birkhoff_decompose(*g);
    cert.G = std::move(*g);
    return cert;
}

struct CertificateVerdict {
    struct Failure {
        std::string condition;
        std::string detail;
    };

    std::vector<Failure> failures;
    double certified_value = 0.0;  // sum_m lambda_m sum_i alpha_i y_{pi_m(i)}
    double loss = 0.0;             // F(beta)

    bool passed() const { return failures.empty(); }
    bool failed(const std::string& condition) const {
        return std::any_of(failures.begin(), failures.end(),
                           [&](const Failure& f) { return f.condition == condition; });
    }
};

/// Rechecks every certificate condition from scratch at beta. Condition names
/// reported: shape, bistochastic, support, balance, decomposition,
/// consistency, value.
inline CertificateVerdict verify_certificate(const RegressionData& data, const ScoreVector& alpha,
                                             std::span<const double> beta, const OptimalityCertificate& cert,
                                             double tie_tol_rel = 1e-9) {
    CertificateVerdict v;
    auto fail = [&](std::string c, std::string d) { v.failures.push_back({std::move(c), std::move(d)}); };
    const std::size_t n = data.n(), p = data.p();
    if (alpha.size() != n || beta.size() != p || cert.G.size() != n ||
        std::any_of(cert.G.begin(), cert.G.end(), [&](const Vector& r) { return r.size() != n; })) {
        fail("shape", "dimensions of alpha, beta or G do not match the data");
        return v;
    }
    const Residuals res = residuals(data, beta);
    const ActivePairs ap = active_pairs(res, scaled_tie_tol(res, tie_tol_rel));
    v.loss = loss_from_residuals(alpha, res);

    const double line_err = detail::max_line_sum_error(cert.G);
    const double neg = -detail::min_entry(cert.G);
    if (line_err > 1e-9 || neg > 1e-9)
        fail("bistochastic", "line-sum error " + std::to_string(line_err) + ", most negative entry " +
                                 std::to_string(-neg));

    double outside = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!ap.contains(i, j)) outside = std::max(outside, cert.G[i][j]);
    if (outside > 1e-9) fail("support", "mass " + std::to_string(outside) + " on an inactive pair");

    double balance = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) s += alpha[i] * cert.G[i][j] * data.row(j)[k];
        balance = std::max(balance, std::abs(s));
    }
    if (balance > 1e-7) fail("balance", "weighted regressor sum has magnitude " + std::to_string(balance));

    double lambda_sum = 0.0;
    bool lambdas_ok = true, perms_ok = true, consistent = true;
    for (const auto& t : cert.decomposition) {
        lambda_sum += t.lambda;
        if (!(t.lambda > 0.0)) lambdas_ok = false;
        if (t.pi.size() != n || !t.pi.is_bijection()) {
            perms_ok = false;
            continue;
        }
        for (std::size_t i = 0; i < n; ++i)
            if (!ap.contains(i, t.pi(i))) consistent = false;
        v.certified_value += t.lambda * [&] {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += alpha[i] * data.y(t.pi(i));
            return s;
        }();
    }
    if (!perms_ok) {
        fail("decomposition", "a term is not a permutation of size n");
    } else {
        const Matrix back = recompose(cert.decomposition, n);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(back[i][j] - cert.G[i][j]));
        if (!lambdas_ok || std::abs(lambda_sum - 1.0) > 1e-9 || err > 1e-9)
            fail("decomposition", "weights sum to " + std::to_string(lambda_sum) + ", recomposition error " +
                                      std::to_string(err));
        if (!consistent) fail("consistency", "a permutation in the decomposition is not consistent with beta");
    }
    if (std::abs(v.certified_value - v.loss) > 1e-7)
        fail("value", "certified value " + std::to_string(v.certified_value) + " differs from F(beta) = " +
                          std::to_string(v.loss));
    return v;
}

}  // namespace rankwalk
