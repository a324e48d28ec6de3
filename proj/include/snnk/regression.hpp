// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <optional>

#include "snnk/error.hpp"

namespace snnk {

// 1e-8 * trace(X^T X) / M
inline double default_ridge(const Eigen::MatrixXd& X) {
    if (X.cols() == 0) return 0.0;
    return 1e-8 * X.squaredNorm() / static_cast<double>(X.cols());
}

inline double ridge_objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                              const Eigen::MatrixXd& W, double ridge) {
    return (X * W - Y).squaredNorm() + ridge * W.squaredNorm();
}

// d/dW of ridge_objective.
inline Eigen::MatrixXd ridge_gradient(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                      const Eigen::MatrixXd& W, double ridge) {
    return 2.0 * (X.transpose() * (X * W - Y) + ridge * W);
}

// argmin |X W - Y|_F^2 + ridge |W|_F^2 through the normal equations, followed by
// one step of iterative refinement. Without a ridge the default is used.
inline Eigen::MatrixXd closed_form_regression(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                              std::optional<double> ridge = std::nullopt) {
    require(X.rows() >= 1 && X.rows() == Y.rows(), ErrorCode::ShapeMismatch,
            "design and target row counts differ");
    const double lambda = ridge.value_or(default_ridge(X));
    require(lambda >= 0.0 && std::isfinite(lambda), ErrorCode::InvalidArgument,
            "ridge must be finite and nonnegative");
    const Eigen::Index M = X.cols();
    Eigen::MatrixXd G = X.transpose() * X;
    if (lambda == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        require(qr.rank() == M, ErrorCode::SingularSystem,
                "rank-deficient design with zero ridge");
    }
    G.diagonal().array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    require(ldlt.info() == Eigen::Success && ldlt.isPositive(), ErrorCode::SingularSystem,
            "normal equations are not positive definite");
    const Eigen::MatrixXd rhs = X.transpose() * Y;
    Eigen::MatrixXd W = ldlt.solve(rhs);
    Eigen::MatrixXd residual = rhs - G * W;
    W += ldlt.solve(residual);
    return W;
}

}  // namespace snnk
