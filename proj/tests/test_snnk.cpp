// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "snnk/arc_cosine.hpp"
#include "snnk/layer.hpp"
#include "snnk/regression.hpp"
#include "snnk/taylor.hpp"

using namespace snnk;

namespace {

// Planar arc-cosine kernel by quadrature over the direction of w ~ N(0, I_2):
// |w|^2 is chi-square with 2 dof, so E|w|^{2n} = 2^n n!. Both cosines are
// positive on the overlap of the two half-circles facing x and y.
double planar_arc_cosine(int n, double ax, double nx, double ay, double ny) {
    const int steps = 200000;
    const double lo = std::max(ax, ay) - kPi / 2, hi = std::min(ax, ay) + kPi / 2;
    const double h = (hi - lo) / steps;
    double acc = 0.0;
    for (int i = 0; i < steps; ++i) {
        double phi = lo + (i + 0.5) * h;
        acc += std::pow(std::cos(phi - ax) * std::cos(phi - ay), n);
    }
    acc *= h;
    double moment = std::pow(2.0, n) * std::tgamma(n + 1.0);
    return 2.0 * moment / (2 * kPi) * std::pow(nx * ny, n) * acc;
}

MatrixXd random_matrix(int r, int c, double scale, std::uint64_t seed) {
    return gaussian_matrix(r, c, seed) * scale;
}

}  // namespace

TEST(ArcCosine, MatchesPlanarQuadrature) {
    const double ax = 0.3, ay = 1.9, nx = 1.2, ny = 0.7;
    VectorXd x(2), y(2);
    x << nx * std::cos(ax), nx * std::sin(ax);
    y << ny * std::cos(ay), ny * std::sin(ay);
    for (int n = 0; n <= 2; ++n)
        EXPECT_NEAR(arc_cosine_exact(n, x, y), planar_arc_cosine(n, ax, nx, ay, ny), 1e-6) << "n=" << n;
}

TEST(ArcCosine, Degenerate) {
    VectorXd x = VectorXd::Constant(3, 0.5);
    EXPECT_NEAR(arc_cosine_exact(1, x, x), x.squaredNorm(), 1e-12);
    EXPECT_NEAR(arc_cosine_exact(1, x, -x), 0.0, 1e-12);
    EXPECT_NEAR(arc_cosine_exact(0, x, x), 1.0, 1e-12);
    try {
        arc_cosine_exact(1, x, VectorXd::Zero(3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
    }
    EXPECT_THROW(arc_cosine_exact(3, x, x), Error);
}

TEST(ArcCosine, MonteCarloAgrees) {
    VectorXd x(3), y(3);
    x << 0.5, -0.2, 0.9;
    y << 0.1, 0.4, 0.3;
    for (int n = 0; n <= 2; ++n) {
        auto mc = arc_cosine_mc(n, x, y, 200000, 7);
        EXPECT_NEAR(mc.mean, arc_cosine_exact(n, x, y), 5 * mc.se) << "n=" << n;
        auto anti = arc_cosine_mc(n, x, y, 200000, 7, true);
        EXPECT_EQ(anti.draws, 200000);
        EXPECT_NEAR(anti.mean, arc_cosine_exact(n, x, y), 5 * anti.se) << "n=" << n;
    }
}

TEST(ReluSnnk, EstimatesFirstOrderKernel) {
    MatrixXd W = random_matrix(3, 5, 0.5, 1);
    VectorXd x = random_matrix(5, 1, 0.4, 2).col(0);
    const int trials = 400;
    VectorXd mean = VectorXd::Zero(3);
    for (int s = 0; s < trials; ++s) {
        SnnkLayer layer = relu_snnk_from_weights(W, 64, static_cast<std::uint64_t>(s));
        EXPECT_EQ(layer.feature_dim(), 64);
        mean += snnk_forward(x, layer) / trials;
    }
    for (int i = 0; i < 3; ++i) {
        const double k1 = arc_cosine_exact(1, W.row(i).transpose(), x);
        EXPECT_NEAR(mean[i], k1, 0.05 * k1 + 1e-3);
    }
}

TEST(UrfLayer, RowsMatchKernelEstimates) {
    FflSpec spec{random_matrix(4, 6, 0.3, 3), VectorXd::Constant(4, 0.1), Activation::sine()};
    UrfConfig cfg;
    cfg.m = 8;
    cfg.seed = 11;
    SnnkLayer layer = snnk_from_ffl(spec, cfg);
    EXPECT_EQ(layer.feature_dim(), 32);
    EXPECT_EQ(layer.parameter_count(), 4u * 32u);
    VectorXd x = random_matrix(6, 1, 0.3, 4).col(0);
    VectorXd y = snnk_forward(x, layer);
    auto px = phi(x, layer.draws);
    for (int i = 0; i < 4; ++i) {
        auto pw = psi(VectorXd(spec.W.row(i).transpose()), spec.b[i], layer.draws);
        EXPECT_EQ(y[i], kernel_estimate(px, pw).value);
    }
}

TEST(UrfLayer, ApproximatesDenseLayerOnAverage) {
    FflSpec spec{random_matrix(3, 4, 0.3, 5), VectorXd::Constant(3, -0.2), Activation::tanh()};
    VectorXd x = random_matrix(4, 1, 0.1, 6).col(0);
    const VectorXd exact = ffl_forward(x, spec);
    UrfConfig cfg;
    cfg.m = 32;
    VectorXd sum = VectorXd::Zero(3), sq = VectorXd::Zero(3);
    const int trials = 300;
    for (int s = 0; s < trials; ++s) {
        cfg.seed = static_cast<std::uint64_t>(s);
        VectorXd y = snnk_forward(x, snnk_from_ffl(spec, cfg));
        sum += y;
        sq += y.cwiseProduct(y);
    }
    for (int i = 0; i < 3; ++i) {
        const double mean = sum[i] / trials;
        const double se = std::sqrt((sq[i] / trials - mean * mean) / (trials - 1));
        EXPECT_NEAR(mean, exact[i], 5 * se) << "unit " << i;
        EXPECT_LT(se, 0.1) << "unit " << i;
    }
}

TEST(UrfLayer, ShapeChecks) {
    FflSpec bad{MatrixXd::Zero(2, 3), VectorXd::Zero(3), Activation::sine()};
    EXPECT_THROW(bad.validate(), Error);
    SnnkLayer layer = learnable_urf_layer(Activation::sine(), 3, 2, UrfConfig{}, 1);
    EXPECT_THROW(snnk_forward(VectorXd::Zero(4), layer), Error);
}

TEST(Learnable, InitialisationScale) {
    SnnkLayer layer = learnable_relu_layer(16, 64, 256, 1, 2);
    EXPECT_TRUE(layer.learnable);
    EXPECT_EQ(layer.parameter_count(), 64u * 256u);
    const double var = layer.A.squaredNorm() / static_cast<double>(layer.A.size());
    EXPECT_NEAR(var, 1.0 / 256.0, 0.1 / 256.0);
    EXPECT_EQ(ffl_parameter_count(16, 64), 1024u);
}

TEST(GatedBlock, ZeroGateIsIdentity) {
    SnnkLayer layer = learnable_urf_layer(Activation::sine(), 5, 5, UrfConfig{}, 3);
    MatrixXd X = random_matrix(7, 5, 0.4, 8);
    EXPECT_EQ(gated_residual_block(X, layer, VectorXd::Zero(5)), X);
    VectorXd v = VectorXd::Constant(5, 0.5);
    MatrixXd Y = gated_residual_block(X, layer, v);
    VectorXd s = snnk_forward(X.row(2).transpose(), layer);
    for (int k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(Y(2, k), X(2, k) + 0.5 * s[k]);
    EXPECT_EQ(gated_block_parameter_count(5, 32), 192u);
}

TEST(Regression, MatchesNormalEquations) {
    MatrixXd X = random_matrix(40, 6, 1.0, 9), Y = random_matrix(40, 2, 1.0, 10);
    const double lambda = 0.3;
    MatrixXd G = X.transpose() * X + lambda * MatrixXd::Identity(6, 6);
    MatrixXd ref = G.fullPivLu().solve(X.transpose() * Y);
    MatrixXd W = closed_form_regression(X, Y, lambda);
    EXPECT_LE((W - ref).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(ridge_gradient(X, Y, W, lambda).cwiseAbs().maxCoeff(), 1e-10);
    // Perturbing the solution never lowers the objective.
    const double base = ridge_objective(X, Y, W, lambda);
    for (int s = 0; s < 10; ++s)
        EXPECT_GE(ridge_objective(X, Y, W + random_matrix(6, 2, 1e-3, 100 + s), lambda), base);
}

TEST(Regression, DefaultRidgeAndSingularity) {
    MatrixXd X = random_matrix(10, 3, 1.0, 11);
    X.col(2) = X.col(0);
    MatrixXd Y = random_matrix(10, 1, 1.0, 12);
    try {
        closed_form_regression(X, Y, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularSystem);
    }
    MatrixXd W = closed_form_regression(X, Y);
    EXPECT_TRUE(W.allFinite());
    EXPECT_DOUBLE_EQ(default_ridge(X), 1e-8 * X.squaredNorm() / 3.0);
    EXPECT_THROW(closed_form_regression(X, random_matrix(9, 1, 1.0, 13)), Error);
}

TEST(Taylor, TanhCoefficients) {
    // tanh x = x - x^3/3 + 2x^5/15 - 17x^7/315 + 62x^9/2835 - ...
    const std::vector<double> ref = {0, 1, 0, -1.0 / 3, 0, 2.0 / 15, 0, -17.0 / 315, 0, 62.0 / 2835};
    auto a = tanh_series_coeffs(9);
    for (std::size_t n = 0; n < ref.size(); ++n) EXPECT_NEAR(a[n], ref[n], 1e-15) << n;
    auto big = tanh_series_coeffs(25);
    for (double t : {0.1, 0.5, 1.0}) EXPECT_NEAR(polynomial_kernel_value(big, t), std::tanh(t), 1e-4);
    EXPECT_THROW(tanh_series_coeffs(26), Error);
}

TEST(Taylor, SignSplit) {
    auto k = TaylorSplitKernel::from_signed({0.5, -1.0, 2.0});
    EXPECT_EQ(k.coeff_pos, (std::vector<double>{0.5, 0.0, 2.0}));
    EXPECT_EQ(k.coeff_neg, (std::vector<double>{0.0, 1.0, 0.0}));
    EXPECT_EQ(k.degree(), 2);
}

TEST(KarKarnick, EstimateIsDifferenceOfParts) {
    auto k = TaylorSplitKernel::from_signed(tanh_series_coeffs(9));
    VectorXd x = VectorXd::Constant(4, 0.3), y = VectorXd::Constant(4, -0.2);
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto r = kar_karnick_estimate(k, x, y, 32, s);
        EXPECT_EQ(r.estimate, r.positive - r.negative);
        EXPECT_GE(r.sparsity, 0.0);
        EXPECT_LE(r.sparsity, 1.0);
    }
}

TEST(KarKarnick, UnbiasedForSignedKernel) {
    auto a = tanh_series_coeffs(7);
    auto k = TaylorSplitKernel::from_signed(a);
    VectorXd x(3), y(3);
    x << 0.4, -0.3, 0.5;
    y << 0.2, 0.6, 0.1;
    for (bool shared : {true, false}) {
        double s = 0.0, s2 = 0.0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            double v = kar_karnick_estimate(k, x, y, 16, static_cast<std::uint64_t>(i), shared).estimate;
            s += v;
            s2 += v * v;
        }
        const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
        EXPECT_NEAR(mean, polynomial_kernel_value(a, x.dot(y)), 5 * se) << "shared=" << shared;
    }
}

TEST(KarKarnick, GeometricModeWastesFeaturesOnZeroCoefficients) {
    auto k = TaylorSplitKernel::from_signed(tanh_series_coeffs(9));
    VectorXd x = VectorXd::Constant(3, 0.5);
    double support = 0.0, geometric = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        support += kar_karnick_estimate(k, x, x, 64, s).sparsity;
        k.sampling = DegreeSampling::Geometric;
        geometric += kar_karnick_estimate(k, x, x, 64, s).sparsity;
        k.sampling = DegreeSampling::SupportOnly;
    }
    EXPECT_GT(geometric, support);
}
