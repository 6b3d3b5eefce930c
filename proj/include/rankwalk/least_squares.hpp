#pragma once

#include <Eigen/Dense>

#include "rankwalk/model.hpp"

namespace rankwalk {

/// Minimum-norm least-squares fit of y on X. Rank-deficient designs are
/// fine; the complete orthogonal decomposition picks the minimum-norm beta.
inline Vector least_squares(const RegressionData& data) {
    const auto n = static_cast<Eigen::Index>(data.n());
    const auto p = static_cast<Eigen::Index>(data.p());
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = data.y(static_cast<std::size_t>(i));
        for (Eigen::Index k = 0; k < p; ++k) x(i, k) = data.row(static_cast<std::size_t>(i))[static_cast<std::size_t>(k)];
    }
    const Eigen::VectorXd beta = x.completeOrthogonalDecomposition().solve(y);
    return Vector(beta.data(), beta.data() + beta.size());
}

}  // namespace rankwalk
