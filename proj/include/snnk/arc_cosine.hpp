// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>

#include "snnk/activation.hpp"
#include "snnk/error.hpp"
#include "snnk/random.hpp"

// Arc-cosine kernels K_n(x, y) = (1/pi) |x|^n |y|^n J_n(angle(x, y)), n <= 2,
// and the ReLU random features that linearize K_1.

namespace snnk {

inline double arc_cosine_j(int n, double theta) {
    const double s = std::sin(theta), c = std::cos(theta), r = kPi - theta;
    switch (n) {
        case 0: return r;
        case 1: return s + r * c;
        case 2: return 3.0 * s * c + r * (1.0 + 2.0 * c * c);
        default: throw Error(ErrorCode::InvalidArgument, "arc-cosine order must be 0, 1 or 2");
    }
}

inline double vector_angle(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    require(x.size() == y.size(), ErrorCode::ShapeMismatch, "angle between vectors of different size");
    const double nx = x.norm(), ny = y.norm();
    require(nx > 0.0 && ny > 0.0, ErrorCode::ZeroVector, "angle with a zero vector");
    return std::acos(std::clamp(x.dot(y) / (nx * ny), -1.0, 1.0));
}

inline double arc_cosine_exact(int n, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double alpha = vector_angle(x, y);
    return std::pow(x.norm() * y.norm(), n) * arc_cosine_j(n, alpha) / kPi;
}

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
    long draws = 0;
};

// 2 * mean of Gamma_n(x) Gamma_n(y) over omega ~ N(0, I), Gamma_n(v) = max(0, v.omega)^n
// (step function for n = 0). With `antithetic` the draws come in (omega, -omega)
// pairs and the standard error is computed over pair means.
inline McEstimate arc_cosine_mc(int n, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                long num_draws, std::uint64_t seed, bool antithetic = false) {
    require(n >= 0 && n <= 2, ErrorCode::InvalidArgument, "arc-cosine order must be 0, 1 or 2");
    require(x.size() == y.size(), ErrorCode::ShapeMismatch, "inputs differ in size");
    require(num_draws >= 2, ErrorCode::InvalidArgument, "need at least two draws");
    auto gamma = [n](double t) {
        if (t <= 0.0) return 0.0;
        return n == 0 ? 1.0 : (n == 1 ? t : t * t);
    };
    Rng rng = make_rng(seed, {0xa7c});
    const Eigen::Index d = x.size();
    Eigen::VectorXd omega(d);
    const long units = antithetic ? num_draws / 2 : num_draws;
    double mean = 0.0, m2 = 0.0;
    for (long i = 0; i < units; ++i) {
        for (Eigen::Index k = 0; k < d; ++k) omega[k] = standard_normal(rng);
        const double px = x.dot(omega), py = y.dot(omega);
        double v = 2.0 * gamma(px) * gamma(py);
        if (antithetic) v = 0.5 * (v + 2.0 * gamma(-px) * gamma(-py));
        // Welford update
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    McEstimate out;
    out.mean = mean;
    out.draws = antithetic ? 2 * units : units;
    out.se = std::sqrt(m2 / static_cast<double>(units - 1) / static_cast<double>(units));
    return out;
}

// max(0, G v / sqrt(l')); the same map is applied to inputs and to weights.
inline Eigen::VectorXd relu_snnk_features(const Eigen::VectorXd& v, const Eigen::MatrixXd& G) {
    require(G.cols() == v.size(), ErrorCode::ShapeMismatch, "projection and input dims differ");
    Eigen::VectorXd out = G * v / std::sqrt(static_cast<double>(G.rows()));
    return out.cwiseMax(0.0);
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng = make_rng(seed, {0x6a});
    Eigen::MatrixXd G(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k) G(i, k) = standard_normal(rng);
    return G;
}

}  // namespace snnk
