#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rankwalk/certificate.hpp"
#include "rankwalk/errors.hpp"
#include "rankwalk/loss.hpp"
#include "rankwalk/lp.hpp"
#include "rankwalk/model.hpp"

namespace rankwalk {

enum class DirectionStrategy {
    first_feasible,     // any solution of the auxiliary system
    steepest_inf_norm,  // most negative s + r subject to |l_k| <= 1
};

struct WoaConfig {
    double tie_tol = 1e-9;  // relative; the absolute tolerance is tie_tol * (1 + max |e_i|)
    double lp_tol = lp::kDefaultTol;
    std::size_t max_iter = 0;  // 0 selects the arrangement region bound, capped at 1e6
    DirectionStrategy direction_strategy = DirectionStrategy::first_feasible;
    std::optional<Vector> init;  // starting beta; zero when absent
    TieBreak tie_break = TieBreak::ascending_index;
};

/// beta* + d * l lands on the hyperplane where residuals i and j agree.
struct Breakpoint {
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
};

using Breakpoints = std::vector<Breakpoint>;

struct ImprovingDirection {
    Vector direction;  // l*, scaled to max-norm 1
    Vector s;
    Vector r;
};

struct IterationRecord {
    Permutation pi;
    Vector beta_star;
    double F_star = 0.0;
    std::optional<Vector> direction;
    std::optional<double> d_star;
    Breakpoints breakpoints;
};

struct WalkTrace {
    std::vector<IterationRecord> iterations;
    std::set<Permutation> visited;
};

struct Minimizer {
    Vector beta;
    double value = 0.0;
    OptimalityCertificate certificate;
};

/// F(point + t * direction) is strictly decreasing in t >= 0.
struct UnboundedRay {
    Vector point;
    Vector direction;
};

struct WalkOutcome {
    std::variant<Minimizer, UnboundedRay> result;
    WalkTrace trace;

    bool bounded() const { return std::holds_alternative<Minimizer>(result); }
    const Minimizer& minimizer() const { return std::get<Minimizer>(result); }
    const UnboundedRay& ray() const { return std::get<UnboundedRay>(result); }
};

/// Base for failures that carry the partial trace.
class WalkError : public std::runtime_error {
public:
    WalkError(const std::string& what, WalkTrace trace) : std::runtime_error(what), trace_(std::move(trace)) {}
    const WalkTrace& trace() const { return trace_; }

private:
    WalkTrace trace_;
};

class IterationBudgetExceeded : public WalkError {
public:
    using WalkError::WalkError;
};

/// Descent or no-revisit failed, or neither a direction nor a certificate
/// was found. Each of these is impossible in exact arithmetic, so this
/// points at a tolerance problem.
class WalkInvariantViolation : public WalkError {
public:
    using WalkError::WalkError;
};

/// Sum_{i=0}^{p} C(N, i) with N = n(n-1)/2, saturating at `cap`.
inline double region_bound(std::size_t n, std::size_t p, double cap = 1e6) {
    const double big_n = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    double term = 1.0, total = 1.0;
    for (std::size_t i = 1; i <= p; ++i) {
        term *= (big_n - static_cast<double>(i) + 1.0) / static_cast<double>(i);
        if (term <= 0.0) break;
        total += term;
        if (total >= cap) return cap;
    }
    return std::min(total, cap);
}

/// Minimizes the permutation-pi linear piece of F over the cell of pi. The
/// search variable is written as anchor + delta so that a flat objective
/// returns the anchor itself. Points in the outcome are absolute betas and the
/// optimal value includes the constant term.
inline lp::LpOutcome cell_lp(const RegressionData& data, const ScoreVector& alpha, const Permutation& pi,
                             std::span<const double> anchor = {}, double lp_tol = lp::kDefaultTol,
                             double tie_tol = 1e-9) {
    check_dims(data, alpha);
    const std::size_t n = data.n(), p = data.p();
    if (pi.size() != n || !pi.is_bijection()) throw DomainError("cell_lp: pi is not a permutation of size n");
    Vector base(p, 0.0);
    if (!anchor.empty()) {
        if (anchor.size() != p) throw DomainError("cell_lp: anchor has the wrong dimension");
        base.assign(anchor.begin(), anchor.end());
    }
    const Residuals e0 = residuals(data, base);
    // A tie block spans at most n - 1 tolerance-sized gaps.
    const double tied = static_cast<double>(n) * scaled_tie_tol(e0, tie_tol);

    lp::LinearProgram prob(p);
    double constant = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        constant += alpha[i] * e0.e[pi(i)];
        for (std::size_t k = 0; k < p; ++k) prob.objective[k] -= alpha[i] * data.row(pi(i))[k];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto& lo = data.row(pi(i));
        const auto& hi = data.row(pi(i + 1));
        Vector a(p);
        for (std::size_t k = 0; k < p; ++k) a[k] = hi[k] - lo[k];
        // Pairs ranked as tied at the anchor start exactly on their hyperplane.
        double rhs = e0.e[pi(i + 1)] - e0.e[pi(i)];
        if (rhs < 0.0 && rhs >= -tied) rhs = 0.0;
        prob.add(std::move(a), lp::Relation::less_equal, rhs);
    }

    auto shift = [&](Vector delta) {
        for (std::size_t k = 0; k < p; ++k) delta[k] += base[k];
        return delta;
    };
    auto out = lp::solve_lp(prob, lp_tol);
    if (auto* o = std::get_if<lp::Optimal>(&out)) {
        o->value += constant;
        o->point = shift(std::move(o->point));
    } else if (auto* u = std::get_if<lp::Unbounded>(&out)) {
        u->point = shift(std::move(u->point));
    }
    return out;
}

/// Solves the auxiliary system over the active pairs. An empty result means
/// the system is infeasible, i.e. the point is a minimizer.
inline std::optional<ImprovingDirection> improving_direction(
    const RegressionData& data, const ScoreVector& alpha, const ActivePairs& ap,
    DirectionStrategy strategy = DirectionStrategy::first_feasible, double lp_tol = lp::kDefaultTol) {
    check_dims(data, alpha);
    const std::size_t n = data.n(), p = data.p();
    const std::size_t nv = p + 2 * n;  // [l | s | r]
    lp::LinearProgram prob(nv);
    for (auto [i, j] : ap.pairs()) {
        Vector a(nv, 0.0);
        for (std::size_t k = 0; k < p; ++k) a[k] = alpha[i] * data.row(j)[k];
        a[p + i] += 1.0;
        a[p + n + j] += 1.0;
        prob.add(std::move(a), lp::Relation::greater_equal, 0.0);
    }
    Vector total(nv, 0.0);
    std::fill(total.begin() + static_cast<std::ptrdiff_t>(p), total.end(), 1.0);

    Vector x;
    if (strategy == DirectionStrategy::first_feasible) {
        prob.add(total, lp::Relation::equal, -1.0);
        const auto out = lp::solve_lp(prob, lp_tol);
        if (const auto* o = std::get_if<lp::Optimal>(&out))
            x = o->point;
        else if (const auto* u = std::get_if<lp::Unbounded>(&out))
            x = u->point;
        else
            return std::nullopt;
    } else {
        prob.objective = total;
        for (std::size_t k = 0; k < p; ++k) {
            Vector a(nv, 0.0);
            a[k] = 1.0;
            prob.add(a, lp::Relation::less_equal, 1.0);
            prob.add(std::move(a), lp::Relation::greater_equal, -1.0);
        }
        const auto out = lp::solve_lp(prob, lp_tol);
        const auto* o = std::get_if<lp::Optimal>(&out);
        if (!o) throw NumericFailure("improving_direction: box-constrained system was not solved to optimality");
        if (o->value >= -lp_tol) return std::nullopt;
        x = o->point;
    }

    ImprovingDirection dir;
    dir.direction.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(p));
    dir.s.assign(x.begin() + static_cast<std::ptrdiff_t>(p), x.begin() + static_cast<std::ptrdiff_t>(p + n));
    dir.r.assign(x.begin() + static_cast<std::ptrdiff_t>(p + n), x.end());
    double scale = 0.0;
    for (double v : dir.direction) scale = std::max(scale, std::abs(v));
    if (!(scale > 0.0)) throw NumericFailure("improving_direction: solution has a zero direction");
    for (double& v : dir.direction) v /= scale;
    for (double& v : dir.s) v /= scale;
    for (double& v : dir.r) v /= scale;
    return dir;
}

/// Positive step lengths at which two residuals meet along beta* + d * l.
/// Pairs already tied at beta* and pairs whose residuals move in parallel
/// are skipped.
inline Breakpoints breakpoints(const RegressionData& data, std::span<const double> beta_star,
                               std::span<const double> direction, double tie_tol = 1e-9,
                               double lp_tol = lp::kDefaultTol) {
    if (direction.size() != data.p()) throw DomainError("breakpoints: direction has the wrong dimension");
    if (std::all_of(direction.begin(), direction.end(), [](double v) { return v == 0.0; }))
        throw DomainError("breakpoints: direction is zero");
    const Residuals res = residuals(data, beta_star);
    const double tied = scaled_tie_tol(res, tie_tol);
    const std::size_t n = data.n();
    Vector slope(n);
    for (std::size_t i = 0; i < n; ++i) slope[i] = dot(data.row(i), direction);

    Breakpoints out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double den = slope[j] - slope[i];
            if (std::abs(den) <= lp_tol * (1.0 + std::abs(slope[i]) + std::abs(slope[j]))) continue;
            const double num = res.e[j] - res.e[i];
            if (std::abs(num) <= tied) continue;
            const double d = num / den;
            if (d > 0.0) out.push_back(Breakpoint{i, j, d});
        }
    }
    return out;
}

/// Smallest d in the breakpoint set minimizing F(beta* + d * l). Walks the
/// sorted set and stops at the first increase, which is enough because F is
/// convex along the line.
inline double line_search(const RegressionData& data, const ScoreVector& alpha, std::span<const double> beta_star,
                          std::span<const double> direction, const Breakpoints& bps) {
    if (bps.empty()) throw DomainError("line_search: empty breakpoint set");
    Vector ds;
    ds.reserve(bps.size());
    for (const auto& b : bps) ds.push_back(b.d);
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());

    Vector point(beta_star.size());
    auto f_at = [&](double d) {
        for (std::size_t k = 0; k < point.size(); ++k) point[k] = beta_star[k] + d * direction[k];
        return eval_loss(data, alpha, point);
    };
    double best_d = ds.front();
    double best_f = f_at(best_d);
    for (std::size_t k = 1; k < ds.size(); ++k) {
        const double f = f_at(ds[k]);
        const double eps = 1e-12 * (1.0 + std::abs(best_f));
        if (f < best_f - eps) {
            best_f = f;
            best_d = ds[k];
        } else if (f > best_f + eps) {
            break;
        }
    }
    return best_d;
}

/// Cell-to-cell descent through the residual ordering cells, ending with an
/// optimality certificate or an unbounded ray.
inline WalkOutcome minimize(const RegressionData& data, const ScoreVector& alpha, const WoaConfig& config = {}) {
    check_dims(data, alpha);
    if (!(config.tie_tol > 0.0) || !(config.lp_tol > 0.0))
        throw DomainError("minimize: tolerances must be positive");
    const std::size_t p = data.p();
    Vector beta = config.init.value_or(Vector(p, 0.0));
    if (beta.size() != p) throw DomainError("minimize: init has the wrong dimension");

    const std::size_t budget = config.max_iter > 0
                                   ? config.max_iter
                                   : static_cast<std::size_t>(region_bound(data.n(), p));
    WalkTrace trace;
    std::optional<double> last_f;

    for (std::size_t iter = 0;; ++iter) {
        if (iter >= budget)
            throw IterationBudgetExceeded("minimize: no answer within " + std::to_string(budget) + " iterations",
                                          std::move(trace));
        IterationRecord rec;
        {
            const Residuals res = residuals(data, beta);
            rec.pi = consistent_permutation(res, scaled_tie_tol(res, config.tie_tol), config.tie_break);
        }
        if (!trace.visited.insert(rec.pi).second) {
            trace.iterations.push_back(std::move(rec));
            throw WalkInvariantViolation("minimize: a cell was visited twice", std::move(trace));
        }

        const auto cell = cell_lp(data, alpha, rec.pi, beta, config.lp_tol, config.tie_tol);
        if (const auto* u = std::get_if<lp::Unbounded>(&cell)) {
            rec.beta_star = u->point;
            rec.F_star = eval_loss(data, alpha, u->point);
            rec.direction = u->ray;
            trace.iterations.push_back(std::move(rec));
            return WalkOutcome{UnboundedRay{u->point, u->ray}, std::move(trace)};
        }
        const auto* opt = std::get_if<lp::Optimal>(&cell);
        if (!opt) {
            trace.iterations.push_back(std::move(rec));
            throw WalkInvariantViolation("minimize: the current cell was reported empty", std::move(trace));
        }
        rec.beta_star = opt->point;
        rec.F_star = eval_loss(data, alpha, rec.beta_star);
        if (last_f && !(rec.F_star < *last_f)) {
            const double prev = *last_f;
            trace.iterations.push_back(std::move(rec));
            throw WalkInvariantViolation("minimize: F did not decrease (" + std::to_string(prev) + " -> " +
                                             std::to_string(trace.iterations.back().F_star) + ")",
                                         std::move(trace));
        }
        last_f = rec.F_star;

        const Residuals at_star = residuals(data, rec.beta_star);
        const ActivePairs ap = active_pairs(at_star, scaled_tie_tol(at_star, config.tie_tol));
        auto dir = improving_direction(data, alpha, ap, config.direction_strategy, config.lp_tol);
        if (!dir) {
            auto cert = build_certificate(data, alpha, ap, config.lp_tol);
            if (!cert) {
                trace.iterations.push_back(std::move(rec));
                throw WalkInvariantViolation("minimize: neither an improving direction nor a certificate exists",
                                             std::move(trace));
            }
            Minimizer m{rec.beta_star, rec.F_star, std::move(*cert)};
            trace.iterations.push_back(std::move(rec));
            return WalkOutcome{std::move(m), std::move(trace)};
        }

        rec.direction = dir->direction;
        rec.breakpoints = breakpoints(data, rec.beta_star, dir->direction, config.tie_tol, config.lp_tol);
        if (rec.breakpoints.empty()) {
            UnboundedRay ray{rec.beta_star, dir->direction};
            trace.iterations.push_back(std::move(rec));
            return WalkOutcome{std::move(ray), std::move(trace)};
        }
        const double d = line_search(data, alpha, rec.beta_star, dir->direction, rec.breakpoints);
        rec.d_star = d;
        for (std::size_t k = 0; k < p; ++k) beta[k] = rec.beta_star[k] + d * dir->direction[k];
        trace.iterations.push_back(std::move(rec));
    }
}

}  // namespace rankwalk
