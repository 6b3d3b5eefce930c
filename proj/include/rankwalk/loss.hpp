#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rankwalk/errors.hpp"
#include "rankwalk/model.hpp"

namespace rankwalk {

/// Residuals e_i = y_i - x_i^T beta together with the beta they belong to.
struct Residuals {
    Vector e;
    Vector beta;

    std::size_t size() const { return e.size(); }
    double max_abs() const {
        double m = 0.0;
        for (double v : e) m = std::max(m, std::abs(v));
        return m;
    }
};

/// pi(rank) = observation holding that rank, both zero-based.
struct Permutation {
    std::vector<std::size_t> order;

    std::size_t size() const { return order.size(); }
    std::size_t operator()(std::size_t rank) const { return order[rank]; }
    static Permutation identity(std::size_t n) {
        Permutation p;
        p.order.resize(n);
        std::iota(p.order.begin(), p.order.end(), std::size_t{0});
        return p;
    }
    bool is_bijection() const {
        std::vector<bool> seen(order.size(), false);
        for (std::size_t j : order) {
            if (j >= order.size() || seen[j]) return false;
            seen[j] = true;
        }
        return true;
    }
    friend bool operator==(const Permutation&, const Permutation&) = default;
    friend auto operator<=>(const Permutation& a, const Permutation& b) { return a.order <=> b.order; }
};

/// Order used inside a tie block.
enum class TieBreak { ascending_index, descending_index };

/// Relative tie tolerance used throughout: tol * (1 + max_i |e_i|).
inline double scaled_tie_tol(const Residuals& res, double rel_tol) { return rel_tol * (1.0 + res.max_abs()); }

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline Residuals residuals(const RegressionData& data, std::span<const double> beta) {
    if (beta.size() != data.p())
        throw DomainError("residuals: beta has " + std::to_string(beta.size()) + " entries, expected " +
                          std::to_string(data.p()));
    for (double b : beta)
        if (!std::isfinite(b)) throw DomainError("residuals: non-finite beta");
    Residuals r;
    r.beta.assign(beta.begin(), beta.end());
    r.e.resize(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) r.e[i] = data.y(i) - dot(data.row(i), beta);
    return r;
}

/// Observations grouped into tie blocks. A block occupying ranks [lo, hi]
/// makes (i, j) active for all i in [lo, hi] and all j in the block.
struct ActivePairs {
    struct Block {
        std::size_t lo = 0;  // first rank, zero-based
        std::size_t hi = 0;  // last rank, inclusive
        std::vector<std::size_t> observations;
    };

    std::vector<Block> blocks;
    std::vector<std::size_t> block_of;  // observation -> index into blocks

    std::size_t n() const { return block_of.size(); }
    bool contains(std::size_t rank, std::size_t obs) const {
        const Block& b = blocks[block_of[obs]];
        return rank >= b.lo && rank <= b.hi;
    }
    std::size_t count() const {
        std::size_t c = 0;
        for (const auto& b : blocks) c += b.observations.size() * b.observations.size();
        return c;
    }
    /// All active (rank, observation) pairs, rank-major.
    std::vector<std::pair<std::size_t, std::size_t>> pairs() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        out.reserve(count());
        for (const auto& b : blocks)
            for (std::size_t i = b.lo; i <= b.hi; ++i)
                for (std::size_t j : b.observations) out.emplace_back(i, j);
        std::sort(out.begin(), out.end());
        return out;
    }
};

namespace detail {

// Sorted observation indices and the tie blocks along that order
// (transitive closure of consecutive gaps <= tol).
inline std::vector<std::vector<std::size_t>> tie_blocks(const Vector& e, double tol) {
    std::vector<std::size_t> idx(e.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return e[a] < e[b]; });
    std::vector<std::vector<std::size_t>> blocks;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k == 0 || e[idx[k]] - e[idx[k - 1]] > tol) blocks.emplace_back();
        blocks.back().push_back(idx[k]);
    }
    return blocks;
}

}  // namespace detail

/// A permutation sorting the residuals ascending; ties broken by observation index.
inline Permutation consistent_permutation(const Residuals& res, double tie_tol,
                                          TieBreak tie_break = TieBreak::ascending_index) {
    if (tie_tol < 0.0) throw DomainError("consistent_permutation: negative tie tolerance");
    Permutation pi;
    pi.order.reserve(res.size());
    for (auto& block : detail::tie_blocks(res.e, tie_tol)) {
        if (tie_break == TieBreak::ascending_index)
            std::sort(block.begin(), block.end());
        else
            std::sort(block.begin(), block.end(), std::greater<>());
        pi.order.insert(pi.order.end(), block.begin(), block.end());
    }
    return pi;
}

inline ActivePairs active_pairs(const Residuals& res, double tie_tol) {
    if (tie_tol < 0.0) throw DomainError("active_pairs: negative tie tolerance");
    ActivePairs ap;
    ap.block_of.assign(res.size(), 0);
    std::size_t rank = 0;
    for (auto& members : detail::tie_blocks(res.e, tie_tol)) {
        std::sort(members.begin(), members.end());
        ActivePairs::Block b;
        b.lo = rank;
        b.hi = rank + members.size() - 1;
        rank += members.size();
        for (std::size_t j : members) ap.block_of[j] = ap.blocks.size();
        b.observations = std::move(members);
        ap.blocks.push_back(std::move(b));
    }
    return ap;
}

inline void check_dims(const RegressionData& data, const ScoreVector& alpha) {
    if (alpha.size() != data.n())
        throw DomainError("score vector has " + std::to_string(alpha.size()) + " entries for " +
                          std::to_string(data.n()) + " observations");
}

/// F(beta) = sum_i alpha_i e_(i), with e_(1) <= ... <= e_(n). O(n log n).
inline double loss_from_residuals(const ScoreVector& alpha, const Residuals& res) {
    Vector sorted = res.e;
    std::sort(sorted.begin(), sorted.end());
    double f = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) f += alpha[i] * sorted[i];
    return f;
}

inline double eval_loss(const RegressionData& data, const ScoreVector& alpha, std::span<const double> beta) {
    check_dims(data, alpha);
    return loss_from_residuals(alpha, residuals(data, beta));
}

/// Value of sum_i alpha_i e_{pi(i)} for a fixed permutation.
inline double permuted_sum(const ScoreVector& alpha, const Residuals& res, const Permutation& pi) {
    double f = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) f += alpha[i] * res.e[pi(i)];
    return f;
}

inline constexpr std::size_t kBruteForceLimit = 8;

/// max over all n! permutations; refuses n > 8.
inline double eval_loss_bruteforce(const RegressionData& data, const ScoreVector& alpha,
                                   std::span<const double> beta) {
    check_dims(data, alpha);
    if (data.n() > kBruteForceLimit)
        throw DomainError("eval_loss_bruteforce: n = " + std::to_string(data.n()) + " exceeds 8");
    const Residuals res = residuals(data, beta);
    Permutation pi = Permutation::identity(data.n());
    double best = -std::numeric_limits<double>::infinity();
    do {
        best = std::max(best, permuted_sum(alpha, res, pi));
    } while (std::next_permutation(pi.order.begin(), pi.order.end()));
    return best;
}

}  // namespace rankwalk
