#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rankwalk/errors.hpp"

namespace rankwalk {

using Vector = std::vector<double>;

/// Regression instance: n rows x_i of length p and responses y_i.
class RegressionData {
public:
    RegressionData(std::vector<Vector> x_rows, Vector y)
        : x_(std::move(x_rows)), y_(std::move(y)) {
        if (x_.empty()) throw DomainError("RegressionData: need at least one observation");
        if (x_.size() != y_.size())
            throw DomainError("RegressionData: " + std::to_string(x_.size()) + " rows but " +
                              std::to_string(y_.size()) + " responses");
        p_ = x_.front().size();
        if (p_ == 0) throw DomainError("RegressionData: need at least one regressor");
        for (std::size_t i = 0; i < x_.size(); ++i) {
            if (x_[i].size() != p_)
                throw DomainError("RegressionData: row " + std::to_string(i + 1) + " has " +
                                  std::to_string(x_[i].size()) + " entries, expected " +
                                  std::to_string(p_));
            for (double v : x_[i])
                if (!std::isfinite(v)) throw DomainError("RegressionData: non-finite regressor");
            if (!std::isfinite(y_[i])) throw DomainError("RegressionData: non-finite response");
        }
    }

    std::size_t n() const { return x_.size(); }
    std::size_t p() const { return p_; }
    const Vector& row(std::size_t i) const { return x_[i]; }
    const std::vector<Vector>& rows() const { return x_; }
    double y(std::size_t i) const { return y_[i]; }
    const Vector& y() const { return y_; }

private:
    std::vector<Vector> x_;
    Vector y_;
    std::size_t p_ = 0;
};

/// Rank weights alpha_1 <= ... <= alpha_n. Construct through make_scores or
/// normalize_scores so the ordering always holds.
class ScoreVector {
public:
    ScoreVector() = default;

    static ScoreVector from_sorted(Vector alpha) {
        if (!std::is_sorted(alpha.begin(), alpha.end()))
            throw DomainError(
                "score table is not nondecreasing; pass it through normalize_scores first "
                "(any reordering of the weights leaves the optimal value unchanged)");
        for (double a : alpha)
            if (!std::isfinite(a)) throw DomainError("score table has a non-finite entry");
        ScoreVector s;
        s.alpha_ = std::move(alpha);
        return s;
    }

    std::size_t size() const { return alpha_.size(); }
    double operator[](std::size_t i) const { return alpha_[i]; }
    const Vector& values() const { return alpha_; }

private:
    Vector alpha_;
};

namespace score {
struct Sign {};
struct Wilcoxon {};
struct VanDerWaerden {};
struct Custom {
    Vector table;
};
}  // namespace score

using ScoreFunction = std::variant<score::Sign, score::Wilcoxon, score::VanDerWaerden, score::Custom>;

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal quantile. Acklam's rational approximation followed by
/// Newton steps against the erfc-based CDF; |normal_cdf(result) - u| < 1e-12.
inline double inverse_normal_cdf(double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("inverse_normal_cdf: argument must lie in (0,1)");
    if (u > 0.5) return -inverse_normal_cdf(1.0 - u);
    if (u == 0.5) return 0.0;

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};

    double x;
    if (u < 0.02425) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    // The approximation has relative error ~1e-9; two Newton steps reach
    // machine precision.
    for (int it = 0; it < 3; ++it) {
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        if (pdf <= 0.0) break;
        x -= (normal_cdf(x) - u) / pdf;
    }
    return x;
}

/// Sorts raw weights ascending. Any permutation of the weights yields the same
/// infimum of the loss, so this is always safe.
inline ScoreVector normalize_scores(std::span<const double> raw) {
    Vector v(raw.begin(), raw.end());
    std::sort(v.begin(), v.end());
    return ScoreVector::from_sorted(std::move(v));
}

/// alpha_i = phi(i / (n + 1)), i = 1..n.
inline ScoreVector make_scores(const ScoreFunction& kind, std::size_t n) {
    if (n == 0) throw DomainError("make_scores: n must be positive");
    if (const auto* custom = std::get_if<score::Custom>(&kind)) {
        if (custom->table.size() != n)
            throw DomainError("make_scores: custom table has " + std::to_string(custom->table.size()) +
                              " entries, expected " + std::to_string(n));
        return ScoreVector::from_sorted(custom->table);
    }
    Vector alpha(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const double xi = static_cast<double>(i) / static_cast<double>(n + 1);
        double v = 0.0;
        if (std::holds_alternative<score::Sign>(kind)) {
            v = xi > 0.5 ? 1.0 : (xi < 0.5 ? -1.0 : 0.0);
        } else if (std::holds_alternative<score::Wilcoxon>(kind)) {
            v = std::sqrt(12.0) * (xi - 0.5);
        } else {
            v = xi == 0.5 ? 0.0 : inverse_normal_cdf(xi);
        }
        alpha[i - 1] = v;
    }
    return ScoreVector::from_sorted(std::move(alpha));
}

}  // namespace rankwalk
