#pragma once

// Dense two-phase simplex over free variables.
//
// Problems are stated as   min c^T x  s.t.  a_k^T x {<=, >=, =} b_k,  x free.
// Internally every free variable is split into a nonnegative pair, every
// equality into two inequalities, and the result is solved as
//   max -c^T z  s.t.  A z <= b,  z >= 0
// in dictionary form: only nonbasic columns are stored, so the tableau is
// (rows + 2) x (2 * vars + 2) regardless of how many slacks there are.
// Phase one uses a single artificial column with -1 in every row.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rankwalk/errors.hpp"
#include "rankwalk/model.hpp"

namespace rankwalk::lp {

enum class Relation { less_equal, greater_equal, equal };

struct Constraint {
    Vector coeffs;
    Relation rel = Relation::greater_equal;
    double rhs = 0.0;
};

struct LinearProgram {
    Vector objective;  // minimized
    std::vector<Constraint> constraints;

    LinearProgram() = default;
    explicit LinearProgram(std::size_t num_vars) : objective(num_vars, 0.0) {}
    explicit LinearProgram(Vector c) : objective(std::move(c)) {}

    std::size_t num_vars() const { return objective.size(); }
    void add(Vector coeffs, Relation rel, double rhs) {
        constraints.push_back(Constraint{std::move(coeffs), rel, rhs});
    }
};

/// Dual multipliers satisfy sum_k duals[k] * a_k = c, with duals[k] >= 0 on
/// '>=' rows, <= 0 on '<=' rows and free on '=' rows.
struct Optimal {
    Vector point;
    double value = 0.0;
    Vector duals;
};

/// `point` is feasible; every point + t * ray (t >= 0) is feasible and the
/// objective strictly decreases along `ray`. ray is scaled to max-norm 1.
struct Unbounded {
    Vector point;
    Vector ray;
};

struct Infeasible {};

using LpOutcome = std::variant<Optimal, Unbounded, Infeasible>;

inline constexpr double kDefaultTol = 1e-9;

namespace detail {

inline double dotp(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double abs_dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] * b[k]);
    return s;
}

inline void validate(const LinearProgram& prob, double tol) {
    if (!(tol > 0.0)) throw DomainError("solve_lp: tolerance must be positive");
    const std::size_t nv = prob.num_vars();
    for (double c : prob.objective)
        if (!std::isfinite(c)) throw DomainError("solve_lp: non-finite objective coefficient");
    for (std::size_t k = 0; k < prob.constraints.size(); ++k) {
        const auto& con = prob.constraints[k];
        if (con.coeffs.size() != nv)
            throw DomainError("solve_lp: constraint " + std::to_string(k) + " has " +
                              std::to_string(con.coeffs.size()) + " coefficients, expected " +
                              std::to_string(nv));
        if (!std::isfinite(con.rhs)) throw DomainError("solve_lp: non-finite right-hand side");
        for (double a : con.coeffs)
            if (!std::isfinite(a)) throw DomainError("solve_lp: non-finite coefficient");
    }
}

struct RowRef {
    std::size_t row;
    double sign;  // y_k contribution = sign * u_row
};

class Dictionary {
public:
    enum class Result { optimal, unbounded };

    Dictionary(const LinearProgram& prob, double tol, bool bland_from_start)
        : tol_(tol), bland_(bland_from_start) {
        const std::size_t nv = prob.num_vars();
        ns_ = 2 * nv;
        row_refs_.resize(prob.constraints.size());
        for (std::size_t k = 0; k < prob.constraints.size(); ++k) {
            const auto& con = prob.constraints[k];
            if (con.rel != Relation::greater_equal) {
                row_refs_[k].push_back({m_, -1.0});
                ++m_;
            }
            if (con.rel != Relation::less_equal) {
                row_refs_[k].push_back({m_, 1.0});
                ++m_;
            }
        }
        cols_ = ns_ + 1;
        width_ = cols_ + 1;
        t_.assign((m_ + 2) * width_, 0.0);
        basic_.resize(m_);
        nonbasic_.resize(cols_);
        for (std::size_t j = 0; j < cols_; ++j) nonbasic_[j] = j;  // artificial id = ns_ + m_ set below
        nonbasic_[ns_] = artificial_id();

        for (std::size_t k = 0; k < prob.constraints.size(); ++k) {
            const auto& con = prob.constraints[k];
            for (const RowRef& ref : row_refs_[k]) {
                const double s = -ref.sign;  // '<=' rows as-is, '>=' rows negated
                for (std::size_t v = 0; v < nv; ++v) {
                    at(ref.row, 2 * v) = s * con.coeffs[v];
                    at(ref.row, 2 * v + 1) = -s * con.coeffs[v];
                }
                at(ref.row, ns_) = -1.0;
                at(ref.row, cols_) = s * con.rhs;
                basic_[ref.row] = ns_ + ref.row;
            }
        }
        // Phase-two objective row stores -d for max (-c)^T z, i.e. +c.
        for (std::size_t v = 0; v < nv; ++v) {
            at(m_ + 1, 2 * v) = prob.objective[v];
            at(m_ + 1, 2 * v + 1) = -prob.objective[v];
        }
        at(m_, ns_) = 1.0;  // phase one: max -x0
        stall_limit_ = 50 * std::max<std::size_t>(m_, 1);
    }

    // Returns false iff the constraints are infeasible.
    bool phase_one() {
        std::size_t r = m_;
        double most_negative = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (at(i, cols_) < most_negative) {
                most_negative = at(i, cols_);
                r = i;
            }
        }
        if (r != m_) {
            pivot(r, ns_);
            if (simplex(m_, true, nullptr) != Result::optimal)
                throw NumericFailure("solve_lp: phase one reported unbounded");
            double scale = 1.0;
            for (std::size_t i = 0; i < m_; ++i) scale = std::max(scale, std::abs(at(i, cols_)));
            // Objective rows hold the current objective value; phase one maximizes -x0.
            if (-at(m_, cols_) > tol_ * scale) return false;
            for (std::size_t i = 0; i < m_; ++i) {
                if (basic_[i] != artificial_id()) continue;
                std::size_t best = cols_;
                double mag = tol_;
                for (std::size_t j = 0; j < cols_; ++j) {
                    if (std::abs(at(i, j)) > mag) {
                        mag = std::abs(at(i, j));
                        best = j;
                    }
                }
                if (best != cols_) pivot(i, best);
                break;
            }
        }
        artificial_locked_ = true;
        return true;
    }

    Result phase_two(std::size_t* ray_col) { return simplex(m_ + 1, false, ray_col); }

    Vector structural_values(std::size_t nv) const {
        Vector z(ns_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basic_[i] < ns_) z[basic_[i]] = std::max(0.0, at(i, cols_));
        Vector x(nv);
        for (std::size_t v = 0; v < nv; ++v) x[v] = z[2 * v] - z[2 * v + 1];
        return x;
    }

    Vector ray_values(std::size_t col, std::size_t nv) const {
        Vector z(ns_, 0.0);
        if (nonbasic_[col] < ns_) z[nonbasic_[col]] = 1.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (basic_[i] < ns_) z[basic_[i]] = -at(i, col);
        Vector r(nv);
        double mx = 0.0;
        for (std::size_t v = 0; v < nv; ++v) {
            r[v] = z[2 * v] - z[2 * v + 1];
            mx = std::max(mx, std::abs(r[v]));
        }
        if (mx > 0.0)
            for (double& v : r) v /= mx;
        return r;
    }

    Vector duals(std::size_t num_constraints) const {
        Vector u(m_, 0.0);
        for (std::size_t j = 0; j < cols_; ++j) {
            const std::size_t id = nonbasic_[j];
            if (id >= ns_ && id < ns_ + m_) u[id - ns_] = at(m_ + 1, j);
        }
        Vector y(num_constraints, 0.0);
        for (std::size_t k = 0; k < num_constraints; ++k)
            for (const RowRef& ref : row_refs_[k]) y[k] += ref.sign * u[ref.row];
        return y;
    }

private:
    std::size_t artificial_id() const { return ns_ + m_; }
    double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
    double at(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }

    void pivot(std::size_t r, std::size_t s) {
        const double inv = 1.0 / at(r, s);
        double* pr = &t_[r * width_];
        for (std::size_t j = 0; j < width_; ++j)
            if (j != s) pr[j] *= inv;
        pr[s] = inv;
        for (std::size_t i = 0; i < m_ + 2; ++i) {
            if (i == r) continue;
            double* pi = &t_[i * width_];
            const double f = pi[s];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width_; ++j)
                if (j != s) pi[j] -= f * pr[j];
            pi[s] = -f * inv;
        }
        std::swap(basic_[r], nonbasic_[s]);
    }

    Result simplex(std::size_t obj, bool phase1, std::size_t* ray_col) {
        std::size_t degenerate_run = 0;
        const std::size_t max_pivots = 200000 + 100 * (m_ + cols_) * (m_ + cols_);
        for (std::size_t iter = 0; iter < max_pivots; ++iter) {
            std::size_t s = cols_;
            double best = -tol_;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (!phase1 && artificial_locked_ && nonbasic_[j] == artificial_id()) continue;
                const double d = at(obj, j);
                if (d >= -tol_) continue;
                if (bland_) {
                    if (s == cols_ || nonbasic_[j] < nonbasic_[s]) s = j;
                } else if (d < best) {
                    best = d;
                    s = j;
                }
            }
            if (s == cols_) return Result::optimal;

            std::size_t r = m_;
            double min_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, s);
                if (a <= tol_) continue;
                const double ratio = std::max(0.0, at(i, cols_)) / a;
                if (r == m_ || ratio < min_ratio - tol_) {
                    r = i;
                    min_ratio = ratio;
                } else if (ratio <= min_ratio + tol_) {
                    const bool better = bland_ ? basic_[i] < basic_[r] : a > at(r, s);
                    if (better) {
                        r = i;
                        min_ratio = std::min(min_ratio, ratio);
                    }
                }
            }
            if (r == m_) {
                if (ray_col) *ray_col = s;
                return Result::unbounded;
            }
            if (min_ratio <= tol_) {
                if (++degenerate_run > stall_limit_) bland_ = true;
            } else {
                degenerate_run = 0;
            }
            pivot(r, s);
        }
        throw NumericFailure("solve_lp: pivot budget exhausted");
    }

    double tol_;
    bool bland_;
    bool artificial_locked_ = false;
    std::size_t ns_ = 0, m_ = 0, cols_ = 0, width_ = 0;
    std::size_t stall_limit_ = 50;
    std::vector<double> t_;
    std::vector<std::size_t> basic_, nonbasic_;
    std::vector<std::vector<RowRef>> row_refs_;
};

inline bool point_feasible(const LinearProgram& prob, std::span<const double> x, double tol) {
    for (const auto& con : prob.constraints) {
        const double act = dotp(con.coeffs, x);
        const double scale = 1.0 + std::abs(con.rhs) + abs_dot(con.coeffs, x);
        const double slack = act - con.rhs;
        switch (con.rel) {
            case Relation::less_equal:
                if (slack > tol * scale) return false;
                break;
            case Relation::greater_equal:
                if (slack < -tol * scale) return false;
                break;
            case Relation::equal:
                if (std::abs(slack) > tol * scale) return false;
                break;
        }
    }
    return true;
}

inline bool ray_certified(const LinearProgram& prob, std::span<const double> ray, double tol) {
    double norm = 0.0;
    for (double r : ray) norm = std::max(norm, std::abs(r));
    if (norm == 0.0) return false;
    for (const auto& con : prob.constraints) {
        const double act = dotp(con.coeffs, ray);
        double scale = 1.0;
        for (double a : con.coeffs) scale += std::abs(a);
        if (con.rel == Relation::less_equal && act > tol * scale) return false;
        if (con.rel == Relation::greater_equal && act < -tol * scale) return false;
        if (con.rel == Relation::equal && std::abs(act) > tol * scale) return false;
    }
    return dotp(prob.objective, ray) < -tol;
}

inline std::variant<Optimal, Unbounded, Infeasible, std::monostate> attempt(const LinearProgram& prob,
                                                                           double tol, bool bland) {
    Dictionary dict(prob, tol, bland);
    if (!dict.phase_one()) return Infeasible{};
    std::size_t ray_col = 0;
    const auto result = dict.phase_two(&ray_col);
    const std::size_t nv = prob.num_vars();
    Vector x = dict.structural_values(nv);
    if (!point_feasible(prob, x, tol)) return std::monostate{};
    if (result == Dictionary::Result::unbounded) {
        Vector ray = dict.ray_values(ray_col, nv);
        if (!ray_certified(prob, ray, tol)) return std::monostate{};
        return Unbounded{std::move(x), std::move(ray)};
    }
    Optimal opt;
    opt.value = dotp(prob.objective, x);
    opt.point = std::move(x);
    opt.duals = dict.duals(prob.constraints.size());
    return opt;
}

}  // namespace detail

/// Solves the LP. The first attempt prices by largest reduced cost and falls
/// back to Bland's rule after 50 * rows consecutive degenerate pivots; if its
/// answer fails the feasibility or ray check, a pure-Bland solve is tried
/// before giving up with NumericFailure.
inline LpOutcome solve_lp(const LinearProgram& prob, double lp_tol = kDefaultTol) {
    detail::validate(prob, lp_tol);
    for (bool bland : {false, true}) {
        auto res = detail::attempt(prob, lp_tol, bland);
        if (auto* o = std::get_if<Optimal>(&res)) return std::move(*o);
        if (auto* u = std::get_if<Unbounded>(&res)) return std::move(*u);
        if (std::holds_alternative<Infeasible>(res)) return Infeasible{};
    }
    throw NumericFailure("solve_lp: simplex result failed verification after retry");
}

/// Some point satisfying all constraints, or nullopt if there is none.
inline std::optional<Vector> find_feasible(std::size_t num_vars, std::span<const Constraint> constraints,
                                           double lp_tol = kDefaultTol) {
    LinearProgram prob(num_vars);
    prob.constraints.assign(constraints.begin(), constraints.end());
    const LpOutcome out = solve_lp(prob, lp_tol);
    if (const auto* o = std::get_if<Optimal>(&out)) return o->point;
    if (const auto* u = std::get_if<Unbounded>(&out)) return u->point;
    return std::nullopt;
}

/// Residuals of the optimality conditions for an Optimal result.
struct DualityAudit {
    double stationarity = 0.0;   // max |sum_k y_k a_k - c|
    double sign_violation = 0.0; // worst wrong-signed multiplier
    double slackness = 0.0;      // max |y_k (a_k^T x - b_k)|
    double primal_violation = 0.0;
    double gap = 0.0;            // |c^T x - b^T y|

    bool within(double tol) const {
        return stationarity <= tol && sign_violation <= tol && slackness <= tol && primal_violation <= tol &&
               gap <= tol;
    }
};

inline DualityAudit audit_duality(const LinearProgram& prob, const Optimal& opt) {
    DualityAudit a;
    Vector grad(prob.num_vars(), 0.0);
    double dual_obj = 0.0;
    for (std::size_t k = 0; k < prob.constraints.size(); ++k) {
        const auto& con = prob.constraints[k];
        const double y = opt.duals[k];
        for (std::size_t v = 0; v < grad.size(); ++v) grad[v] += y * con.coeffs[v];
        dual_obj += y * con.rhs;
        const double slack = detail::dotp(con.coeffs, opt.point) - con.rhs;
        a.slackness = std::max(a.slackness, std::abs(y * slack));
        if (con.rel == Relation::greater_equal) {
            a.sign_violation = std::max(a.sign_violation, -y);
            a.primal_violation = std::max(a.primal_violation, -slack);
        } else if (con.rel == Relation::less_equal) {
            a.sign_violation = std::max(a.sign_violation, y);
            a.primal_violation = std::max(a.primal_violation, slack);
        } else {
            a.primal_violation = std::max(a.primal_violation, std::abs(slack));
        }
    }
    for (std::size_t v = 0; v < grad.size(); ++v)
        a.stationarity = std::max(a.stationarity, std::abs(grad[v] - prob.objective[v]));
    a.gap = std::abs(detail::dotp(prob.objective, opt.point) - dual_obj);
    return a;
}

}  // namespace rankwalk::lp
