// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "snnk/error.hpp"
#include "snnk/random.hpp"

// Dot-product kernels K(x, y) = sum_n a_n (x.y)^n estimated with Kar-Karnick
// random Maclaurin features. Signed coefficients are split as f = f1 - f2 with
// nonnegative coefficient lists.

namespace snnk {

// Maclaurin coefficients of tanh up to degree N, from (tanh)' = 1 - tanh^2:
// (n + 1) a_{n+1} = -sum_{i + j = n} a_i a_j for n >= 1, a_1 = 1.
inline std::vector<double> tanh_series_coeffs(int N) {
    require(N >= 0 && N <= 25, ErrorCode::InvalidArgument, "tanh series degree must be in [0, 25]");
    std::vector<double> a(static_cast<std::size_t>(N) + 1, 0.0);
    if (N >= 1) a[1] = 1.0;
    for (int n = 1; n + 1 <= N; ++n) {
        double s = 0.0;
        for (int i = 0; i <= n; ++i) s += a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(n - i)];
        a[static_cast<std::size_t>(n + 1)] = -s / static_cast<double>(n + 1);
    }
    return a;
}

enum class DegreeSampling {
    SupportOnly,  // geometric law rejected onto degrees with a_n > 0
    Geometric,    // plain geometric law; zero-coefficient degrees give zero features
};

struct TaylorSplitKernel {
    std::vector<double> coeff_pos;  // f1
    std::vector<double> coeff_neg;  // f2
    double geometric_ratio = 0.5;   // p(n) proportional to ratio^(n+1)
    DegreeSampling sampling = DegreeSampling::SupportOnly;

    static TaylorSplitKernel from_signed(const std::vector<double>& a) {
        TaylorSplitKernel k;
        k.coeff_pos.assign(a.size(), 0.0);
        k.coeff_neg.assign(a.size(), 0.0);
        for (std::size_t n = 0; n < a.size(); ++n) {
            require(std::isfinite(a[n]), ErrorCode::InvalidArgument, "coefficients must be finite");
            (a[n] >= 0.0 ? k.coeff_pos[n] : k.coeff_neg[n]) = std::abs(a[n]);
        }
        return k;
    }

    int degree() const { return static_cast<int>(std::max(coeff_pos.size(), coeff_neg.size())) - 1; }
};

inline double polynomial_kernel_value(const std::vector<double>& a, double t) {
    double acc = 0.0, p = 1.0;
    for (double c : a) {
        acc += c * p;
        p *= t;
    }
    return acc;
}

namespace detail {

// Probabilities of the degree law over 0..N.
inline std::vector<double> degree_law(const std::vector<double>& coeffs, double ratio,
                                      DegreeSampling mode) {
    std::vector<double> p(coeffs.size(), 0.0);
    double total = 0.0;
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
        if (mode == DegreeSampling::SupportOnly && coeffs[n] <= 0.0) continue;
        p[n] = std::pow(ratio, static_cast<double>(n + 1));
        total += p[n];
    }
    if (total > 0.0)
        for (double& v : p) v /= total;
    return p;
}

// Rejection sampler: draw geometric degrees until one lands in the allowed set.
inline int draw_degree(const std::vector<double>& law, double ratio, Rng& rng) {
    const int N = static_cast<int>(law.size()) - 1;
    for (int guard = 0; guard < 1000000; ++guard) {
        // P(n) = (1 - ratio) ratio^n
        int n = 0;
        while (uniform01(rng) < ratio) ++n;
        if (n <= N && law[static_cast<std::size_t>(n)] > 0.0) return n;
    }
    throw Error(ErrorCode::InvalidArgument, "degree sampler failed to hit the support");
}

}  // namespace detail

// One Kar-Karnick feature map. Row i carries degree n_i and uses the first n_i
// Rademacher vectors omega_{i,1..N}; feature_i(x) = sqrt(a_n / (p_n D)) prod_k omega_{i,k}.x.
struct MaclaurinFeatures {
    std::vector<int> degrees;
    std::vector<double> scale;
    std::vector<Eigen::MatrixXd> omegas;  // per feature: N x d Rademacher

    Eigen::VectorXd map(const Eigen::VectorXd& x) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(degrees.size()));
        for (std::size_t i = 0; i < degrees.size(); ++i) {
            double v = scale[i];
            for (int k = 0; k < degrees[i] && v != 0.0; ++k) v *= omegas[i].row(k).dot(x);
            out[static_cast<Eigen::Index>(i)] = v;
        }
        return out;
    }
};

inline std::vector<Eigen::MatrixXd> rademacher_blocks(int D, int N, Eigen::Index d, std::uint64_t seed,
                                                      std::uint64_t stream) {
    Rng rng = make_rng(seed, {0x4b, stream});
    std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(D), Eigen::MatrixXd(std::max(N, 1), d));
    for (auto& m : out)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < d; ++c) m(r, c) = rademacher(rng);
    return out;
}

inline MaclaurinFeatures maclaurin_features(const std::vector<double>& coeffs, double ratio,
                                            DegreeSampling mode, int D, std::vector<Eigen::MatrixXd> omegas,
                                            std::uint64_t degree_seed) {
    MaclaurinFeatures f;
    f.omegas = std::move(omegas);
    auto law = detail::degree_law(coeffs, ratio, mode);
    const bool empty = std::all_of(law.begin(), law.end(), [](double p) { return p == 0.0; });
    Rng rng = make_rng(degree_seed, {0xde9});
    for (int i = 0; i < D; ++i) {
        if (empty) {
            f.degrees.push_back(0);
            f.scale.push_back(0.0);
            continue;
        }
        int n = detail::draw_degree(law, ratio, rng);
        double p = law[static_cast<std::size_t>(n)];
        double a = coeffs[static_cast<std::size_t>(n)];
        f.degrees.push_back(n);
        f.scale.push_back(std::sqrt(a / (p * D)));
    }
    return f;
}

struct KarKarnickResult {
    double estimate = 0.0;  // <[Phi1(x)|Phi2(x)], [Phi1(y)|-Phi2(y)]>
    double positive = 0.0;  // <Phi1(x), Phi1(y)>
    double negative = 0.0;  // <Phi2(x), Phi2(y)>
    double sparsity = 0.0;  // fraction of zero entries in [Phi1(x)|Phi2(x)]
};

inline double sequential_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

// D features per sign. With shared_rademacher the two polynomial kernels use
// the same omega vectors (degrees are still drawn separately per kernel).
inline KarKarnickResult kar_karnick_estimate(const TaylorSplitKernel& k, const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& y, int D, std::uint64_t seed,
                                             bool shared_rademacher = true) {
    require(x.size() == y.size(), ErrorCode::ShapeMismatch, "inputs differ in size");
    require(D >= 1, ErrorCode::InvalidArgument, "feature count must be >= 1");
    for (double c : k.coeff_pos) require(c >= 0.0, ErrorCode::InvalidArgument, "negative coefficient");
    for (double c : k.coeff_neg) require(c >= 0.0, ErrorCode::InvalidArgument, "negative coefficient");
    const int N = std::max(k.degree(), 0);
    auto om1 = rademacher_blocks(D, N, x.size(), seed, 1);
    auto om2 = shared_rademacher ? om1 : rademacher_blocks(D, N, x.size(), seed, 2);
    auto f1 = maclaurin_features(k.coeff_pos, k.geometric_ratio, k.sampling, D, std::move(om1),
                                 derive_seed(seed, {1}));
    auto f2 = maclaurin_features(k.coeff_neg, k.geometric_ratio, k.sampling, D, std::move(om2),
                                 derive_seed(seed, {2}));
    Eigen::VectorXd p1x = f1.map(x), p1y = f1.map(y), p2x = f2.map(x), p2y = f2.map(y);
    KarKarnickResult r;
    r.positive = sequential_dot(p1x, p1y);
    r.negative = sequential_dot(p2x, p2y);
    r.estimate = r.positive + sequential_dot(p2x, -p2y);
    const auto zeros = (p1x.array() == 0.0).count() + (p2x.array() == 0.0).count();
    r.sparsity = static_cast<double>(zeros) / static_cast<double>(2 * D);
    return r;
}

}  // namespace snnk
