#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "rankwalk/loss.hpp"
#include "rankwalk/model.hpp"
#include "rankwalk/woa.hpp"

namespace rankwalk {

namespace perturbation {
/// Jump by `magnitude` in a uniformly random direction. magnitude <= 0
/// selects 1e-4 * (1 + ||beta||).
struct Random {
    double magnitude = 0.0;
    std::uint64_t seed = 0;
};
/// Continue the previous step by `magnitude`.
struct Prolong {
    double magnitude = 0.0;
};
}  // namespace perturbation

using Perturbation = std::variant<perturbation::Random, perturbation::Prolong>;

struct GgdConfig {
    Perturbation perturbation = perturbation::Random{};
    std::size_t max_iter = 10000;
    double stop_tol = 1e-6;
    std::size_t window = 10;
    double tie_tol = 1e-9;
    double lp_tol = lp::kDefaultTol;
};

struct NonSmooth {};

enum class GgdStop { zero_gradient, unbounded_direction, stalled, max_iter, perturbation_failed };

inline const char* to_string(GgdStop s) {
    switch (s) {
        case GgdStop::zero_gradient: return "zero_gradient";
        case GgdStop::unbounded_direction: return "unbounded_direction";
        case GgdStop::stalled: return "stalled";
        case GgdStop::max_iter: return "max_iter";
        case GgdStop::perturbation_failed: return "perturbation_failed";
    }
    return "unknown";
}

struct GgdTrace {
    std::vector<Vector> points;  // every visited point, perturbations included
    std::vector<double> values;  // F at each point
    GgdStop reason = GgdStop::max_iter;
    std::size_t iterations = 0;  // gradient steps taken
    std::size_t perturbations = 0;

    const Vector& final_point() const { return points.back(); }
    double final_value() const { return values.back(); }
};

/// Gradient of F where it is differentiable, i.e. where all residuals are
/// distinct beyond the tie tolerance.
inline std::variant<Vector, NonSmooth> cell_gradient(const RegressionData& data, const ScoreVector& alpha,
                                                     std::span<const double> beta, double tie_tol = 1e-9) {
    check_dims(data, alpha);
    const Residuals res = residuals(data, beta);
    const ActivePairs ap = active_pairs(res, scaled_tie_tol(res, tie_tol));
    if (ap.blocks.size() != data.n()) return NonSmooth{};
    Vector g(data.p(), 0.0);
    for (std::size_t b = 0; b < ap.blocks.size(); ++b) {
        const std::size_t obs = ap.blocks[b].observations.front();
        for (std::size_t k = 0; k < g.size(); ++k) g[k] -= alpha[ap.blocks[b].lo] * data.row(obs)[k];
    }
    return g;
}

namespace detail {

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline Vector random_unit(std::mt19937_64& rng, std::size_t p) {
    std::normal_distribution<double> g;
    Vector u(p);
    double nrm = 0.0;
    while (nrm == 0.0) {
        for (auto& x : u) x = g(rng);
        nrm = norm2(u);
    }
    for (auto& x : u) x /= nrm;
    return u;
}

}  // namespace detail

/// Generic gradient descent with exact line search and perturbation at
/// non-smooth points. Produces no optimality certificate.
inline GgdTrace ggd_minimize(const RegressionData& data, const ScoreVector& alpha, std::span<const double> beta0,
                             const GgdConfig& config = {}) {
    check_dims(data, alpha);
    const std::size_t p = data.p();
    if (beta0.size() != p) throw DomainError("ggd_minimize: beta0 has the wrong dimension");

    std::uint64_t seed = 0;
    double magnitude = 0.0;
    const bool prolong = std::holds_alternative<perturbation::Prolong>(config.perturbation);
    if (const auto* r = std::get_if<perturbation::Random>(&config.perturbation)) {
        seed = r->seed;
        magnitude = r->magnitude;
    } else {
        magnitude = std::get<perturbation::Prolong>(config.perturbation).magnitude;
    }
    std::mt19937_64 rng(seed);

    GgdTrace t;
    Vector beta(beta0.begin(), beta0.end());
    double f = eval_loss(data, alpha, beta);
    t.points.push_back(beta);
    t.values.push_back(f);
    std::vector<double> step_values{f};
    Vector last_step;

    auto smooth_at = [&](const Vector& b) {
        return std::holds_alternative<Vector>(cell_gradient(data, alpha, b, config.tie_tol));
    };

    while (true) {
        if (t.iterations >= config.max_iter) {
            t.reason = GgdStop::max_iter;
            return t;
        }
        const auto grad = cell_gradient(data, alpha, beta, config.tie_tol);
        if (std::holds_alternative<NonSmooth>(grad)) {
            double m = magnitude > 0.0 ? magnitude : 1e-4 * (1.0 + detail::norm2(beta));
            // A prolongation that stays inside some hyperplane never reaches a
            // smooth point; those attempts switch to a random direction.
            Vector dir = prolong && !last_step.empty() ? last_step : detail::random_unit(rng, p);
            bool accepted = false;
            for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
                if (attempt == 30) {
                    dir = detail::random_unit(rng, p);
                    m = magnitude > 0.0 ? magnitude : 1e-4 * (1.0 + detail::norm2(beta));
                }
                Vector cand(p);
                for (std::size_t k = 0; k < p; ++k) cand[k] = beta[k] + m * dir[k];
                const double fc = eval_loss(data, alpha, cand);
                if (smooth_at(cand) && fc <= f + config.stop_tol) {
                    beta = std::move(cand);
                    f = fc;
                    accepted = true;
                } else {
                    m *= 0.5;
                }
            }
            if (!accepted) {
                t.reason = GgdStop::perturbation_failed;
                return t;
            }
            ++t.perturbations;
            t.points.push_back(beta);
            t.values.push_back(f);
            continue;
        }

        const Vector& g = std::get<Vector>(grad);
        double gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        if (gmax <= 1e-12 * (1.0 + std::abs(f))) {
            t.reason = GgdStop::zero_gradient;
            return t;
        }
        Vector dir(p);
        for (std::size_t k = 0; k < p; ++k) dir[k] = -g[k] / gmax;
        const auto bps = breakpoints(data, beta, dir, config.tie_tol, config.lp_tol);
        if (bps.empty()) {
            t.reason = GgdStop::unbounded_direction;
            return t;
        }
        const double d = line_search(data, alpha, beta, dir, bps);
        for (std::size_t k = 0; k < p; ++k) beta[k] += d * dir[k];
        const double nrm = detail::norm2(dir);
        last_step = dir;
        for (auto& v : last_step) v /= nrm;
        f = eval_loss(data, alpha, beta);
        ++t.iterations;
        t.points.push_back(beta);
        t.values.push_back(f);
        step_values.push_back(f);
        if (step_values.size() > config.window &&
            step_values[step_values.size() - 1 - config.window] - f < config.stop_tol) {
            t.reason = GgdStop::stalled;
            return t;
        }
    }
}

}  // namespace rankwalk
