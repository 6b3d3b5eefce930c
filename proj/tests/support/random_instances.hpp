#pragma once

#include <random>
#include <vector>

#include "rankwalk/model.hpp"

namespace rankwalk::test_support {

struct Instance {
    RegressionData data;
    ScoreVector alpha;
};

/// Small-integer instance with entries in [-3, 3]. The narrow range makes
/// coincident hyperplanes and exact residual ties common. Scores alternate
/// between random integer tables and the named score functions.
template <class Rng>
Instance random_instance(Rng& rng, std::size_t n, std::size_t p) {
    std::uniform_int_distribution<int> v(-3, 3);
    std::vector<Vector> x(n, Vector(p));
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& c : x[i]) c = v(rng);
        y[i] = v(rng);
    }
    ScoreVector alpha;
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
        case 0: alpha = make_scores(score::Sign{}, n); break;
        case 1: alpha = make_scores(score::Wilcoxon{}, n); break;
        case 2: alpha = make_scores(score::VanDerWaerden{}, n); break;
        default: {
            Vector raw(n);
            for (auto& a : raw) a = v(rng);
            alpha = normalize_scores(raw);
        }
    }
    return Instance{RegressionData(std::move(x), std::move(y)), std::move(alpha)};
}

}  // namespace rankwalk::test_support
