// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "snnk/fourier.hpp"

using namespace snnk;

namespace {

std::vector<double> dense_points(double lo, double hi, int n) {
    std::vector<double> zs;
    for (int i = 0; i < n; ++i) zs.push_back(lo + (hi - lo) * i / (n - 1));
    return zs;
}

}  // namespace

TEST(Activation, PointValues) {
    EXPECT_DOUBLE_EQ(eval_activation(Activation::sine(), kPi / 2), 1.0);
    EXPECT_EQ(eval_activation(Activation::tanh(), 0.0), 0.0);
    // 1 / (1 + e^-1)
    EXPECT_NEAR(eval_activation(Activation::swish(1.0), 1.0), 0.7310585786300049, 1e-15);
    // Phi_N(1) = 0.8413447460685429...
    EXPECT_NEAR(eval_activation(Activation::gelu(), 1.0), 0.8413447460685429, 1e-15);
    EXPECT_NEAR(eval_activation(Activation::sigmoid(), 0.0), 0.5, 0.0);
}

TEST(Activation, Parity) {
    for (double z : {0.1, 0.7, 2.5, 9.0}) {
        EXPECT_EQ(eval_activation(Activation::sine(), -z), -eval_activation(Activation::sine(), z));
        EXPECT_EQ(eval_activation(Activation::tanh(), -z), -eval_activation(Activation::tanh(), z));
        EXPECT_EQ(eval_activation(Activation::cosine(), -z), eval_activation(Activation::cosine(), z));
    }
}

TEST(Activation, ParameterValidation) {
    EXPECT_THROW(Activation::swish(0.0), Error);
    EXPECT_THROW(Activation::smoothed_relu(-1.0), Error);
    EXPECT_EQ(parse_activation("swish:2").param, 2.0);
    try {
        parse_activation("relu");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedActivation);
    }
}

TEST(Activation, SmoothedReluApproachesRelu) {
    const Activation a = Activation::smoothed_relu(1e-3);
    EXPECT_NEAR(eval_activation(a, 1.0), 1.0, 1e-12);
    EXPECT_NEAR(eval_activation(a, -1.0), 0.0, 1e-12);
}

TEST(ClosedForm, SineAtoms) {
    const auto d = closed_form_ft(Activation::sine());
    ASSERT_EQ(d[Axis::ImPlus].atoms.size(), 1u);
    ASSERT_EQ(d[Axis::ImMinus].atoms.size(), 1u);
    EXPECT_DOUBLE_EQ(d[Axis::ImPlus].atoms[0].xi, -1.0 / (2 * kPi));
    EXPECT_DOUBLE_EQ(d[Axis::ImMinus].atoms[0].xi, 1.0 / (2 * kPi));
    EXPECT_EQ(d[Axis::ImPlus].atoms[0].weight, 0.5);
    EXPECT_TRUE(d[Axis::RePlus].is_zero());
    EXPECT_TRUE(d[Axis::ReMinus].is_zero());
    EXPECT_EQ(d.coefficient(Axis::ImPlus), cdouble(0, 0.5));
    EXPECT_EQ(d.coefficient(Axis::ImMinus), cdouble(0, -0.5));
}

TEST(ClosedForm, CosineAtoms) {
    const auto d = closed_form_ft(Activation::cosine());
    ASSERT_EQ(d[Axis::RePlus].atoms.size(), 2u);
    EXPECT_TRUE(d[Axis::ImPlus].is_zero());
    EXPECT_TRUE(d[Axis::ImMinus].is_zero());
    EXPECT_DOUBLE_EQ(std::abs(d[Axis::RePlus].atoms[0].xi), 1.0 / (2 * kPi));
    EXPECT_DOUBLE_EQ(reconstruct(d, 0.0).real(), 1.0);
}

TEST(ClosedForm, UnsupportedKinds) {
    for (auto a : {Activation::gelu(), Activation::swish(1.0), Activation::smoothed_relu(0.5)}) {
        try {
            closed_form_ft(a);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::UnsupportedClosedForm);
        }
    }
}

TEST(ClosedForm, MassesMatchComponents) {
    for (auto a : {Activation::sine(), Activation::cosine(), Activation::tanh(), Activation::sigmoid()}) {
        const auto d = closed_form_ft(a);
        for (Axis ax : kAxes) {
            EXPECT_EQ(std::abs(d.coefficient(ax)), d[ax].mass());
            // Trapezoid integral recomputed independently.
            const auto& g = d[ax].density.grid();
            const auto& v = d[ax].density.values();
            double trap = 0.0;
            for (std::size_t i = 1; i < g.size(); ++i) trap += 0.5 * (v[i] + v[i - 1]) * (g[i] - g[i - 1]);
            EXPECT_NEAR(trap, d[ax].density_mass(), 1e-9 * std::max(1.0, trap));
        }
    }
}

TEST(ClosedForm, TanhSignLayout) {
    const auto d = closed_form_ft(Activation::tanh());
    EXPECT_TRUE(d[Axis::RePlus].is_zero());
    EXPECT_TRUE(d[Axis::ReMinus].is_zero());
    // Im FT = -pi csch(pi^2 xi) is negative for xi > 0.
    EXPECT_GT(d[Axis::ImMinus].density.lower(), 0.0);
    EXPECT_LT(d[Axis::ImPlus].density.upper(), 0.0);
}

TEST(ClosedForm, TanhDensityMatchesQuadrature) {
    const auto d = closed_form_ft(Activation::tanh());
    std::vector<double> xs = dense_points(0.05, 3.0, 60);
    std::vector<double> grid;
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) grid.push_back(-*it);
    grid.insert(grid.end(), xs.begin(), xs.end());
    const auto q = numeric_ft(Activation::tanh(), grid, WindowSpec::plateau_window(40.0, 200.0), 1e-9);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double xi = grid[i];
        const auto& table = xi > 0 ? d[Axis::ImMinus].density : d[Axis::ImPlus].density;
        const double closed = tanh_ft(xi).imag();
        EXPECT_NEAR(q[i].imag(), closed, 1e-4 * std::abs(closed)) << "xi=" << xi;
        // The table is truncated where the tail mass drops below tolerance.
        if (xi >= table.lower() && xi <= table.upper()) {
            const double tab = xi > 0 ? -table(xi) : table(xi);
            EXPECT_NEAR(tab, closed, 1e-3 * std::abs(closed)) << "xi=" << xi;
        }
        EXPECT_LE(std::abs(q[i].real()), 1e-8);
    }
}

TEST(NumericFt, GaussianSelfDual) {
    auto grid = uniform_grid(201, -3.0, 3.0);
    auto q = numeric_ft([](double z) { return std::exp(-kPi * z * z); }, grid, WindowSpec::none(12.0), 1e-10);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(q[i].real(), std::exp(-kPi * grid[i] * grid[i]), 1e-8);
        EXPECT_NEAR(q[i].imag(), 0.0, 1e-8);
    }
}

TEST(NumericFt, OddFunctionsArePurelyImaginaryAndOdd) {
    auto grid = uniform_grid(101, -2.0, 2.0);
    auto q = numeric_ft(Activation::tanh(), grid, WindowSpec::plateau_window(8.0, 8.0));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_LE(std::abs(q[i].real()), 1e-8);
        EXPECT_NEAR(q[i].imag(), -q[grid.size() - 1 - i].imag(), 1e-12);
    }
}

TEST(NumericFt, RejectsBadGrids) {
    EXPECT_THROW(numeric_ft(Activation::sine(), {0.0, 1.0, 0.5}, WindowSpec{}), Error);
    EXPECT_THROW(numeric_ft(Activation::sine(), {-1.0, 0.0, 2.0}, WindowSpec{}), Error);
}

TEST(NumericFt, FlagsNonConvergence) {
    // Nodes far too coarse for a rapidly oscillating integrand.
    auto grid = uniform_grid(3, -0.01, 0.01);
    try {
        numeric_ft([](double z) { return std::cos(40.0 * z) * std::exp(-z * z / 50.0); }, grid, WindowSpec::none(30.0), 1e-12);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::QuadratureNonConvergent);
    }
}

TEST(Decompose, SignSplit) {
    std::vector<double> grid = {-1.0, 0.0, 1.0};
    std::vector<cdouble> vals = {{1.0, 0.5}, {-2.0, -0.25}, {0.0, 0.0}};
    auto d = decompose(grid, vals);
    EXPECT_EQ(d[Axis::ReMinus].density.values()[1], 2.0);
    EXPECT_EQ(d[Axis::RePlus].density.values()[1], 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        cdouble back = d[Axis::RePlus].density(grid[i]) - d[Axis::ReMinus].density(grid[i]) +
                       cdouble(0, 1) * d[Axis::ImPlus].density(grid[i]) -
                       cdouble(0, 1) * d[Axis::ImMinus].density(grid[i]);
        EXPECT_EQ(back, vals[i]);
    }
}

TEST(Decompose, NonnegativeRealInput) {
    auto d = decompose(std::vector<double>{-1, 0, 1}, std::vector<cdouble>{1.0, 2.0, 3.0});
    EXPECT_TRUE(d[Axis::ReMinus].is_zero());
    EXPECT_TRUE(d[Axis::ImPlus].is_zero());
    EXPECT_TRUE(d[Axis::ImMinus].is_zero());
    EXPECT_EQ(d[Axis::RePlus].mass(), 4.0);
}

TEST(Reconstruction, AtomicCasesAreExact) {
    auto zs = dense_points(-5.0, 5.0, 201);
    zs.push_back(kPi / 2);
    EXPECT_LE(validate_decomposition(closed_form_ft(Activation::sine()), Activation::sine(), zs).max_abs_error, 1e-12);
    EXPECT_LE(validate_decomposition(closed_form_ft(Activation::cosine()), Activation::cosine(), zs).max_abs_error, 1e-12);
}

TEST(Reconstruction, CschDensities) {
    auto zs = dense_points(-5.0, 5.0, 201);
    for (auto a : {Activation::tanh(), Activation::sigmoid()}) {
        auto r = validate_decomposition(closed_form_ft(a), a, zs);
        EXPECT_LE(r.max_abs_error, 1e-3) << activation_name(a);
        EXPECT_LE(r.max_imag_residue, 1e-8) << activation_name(a);
    }
}

TEST(Reconstruction, NumericRoute) {
    auto zs = dense_points(-5.0, 5.0, 101);
    for (auto a : {Activation::gelu(), Activation::swish(1.0), Activation::smoothed_relu(0.5)}) {
        auto r = validate_decomposition(fourier_decomposition(a), a, zs);
        EXPECT_LE(r.max_abs_error, 1e-2) << activation_name(a);
        EXPECT_LE(r.max_imag_residue, 1e-8) << activation_name(a);
    }
}

TEST(Reconstruction, NumericRouteConvergesWithSpacing) {
    auto zs = dense_points(-5.0, 5.0, 101);
    const Activation a = Activation::gelu();
    FtOptions coarse;
    FtOptions fine = coarse;
    fine.grid_limit = coarse.grid_limit / 2.0;
    const double e0 = validate_decomposition(fourier_decomposition(a, coarse), a, zs).max_abs_error;
    const double e1 = validate_decomposition(fourier_decomposition(a, fine), a, zs).max_abs_error;
    // halving the spacing should cut the error roughly fourfold
    EXPECT_LT(e1, e0 / 3.0);
    EXPECT_LE(e1, 2e-3);
}

TEST(Reconstruction, RejectsFarPoints) {
    EXPECT_THROW(validate_decomposition(closed_form_ft(Activation::sine()), Activation::sine(), {6.0}), Error);
}

TEST(Convention, AngularRoundTrip) {
    auto grid = uniform_grid(41, -2.0, 2.0);
    ComplexFn f = [](double k) { return cdouble(std::exp(-k * k), k); };
    ComplexFn back = twopi_to_angular(angular_to_twopi(f));
    for (double k : grid) {
        EXPECT_NEAR(back(k).real(), f(k).real(), 1e-15);
        EXPECT_NEAR(back(k).imag(), f(k).imag(), 1e-15);
    }
    // FT(xi) = F(2 pi xi)
    EXPECT_EQ(tanh_ft(0.25), tanh_ft_angular(2 * kPi * 0.25));
}

TEST(DensityTable, InverseCdfSampling) {
    DensityTable t({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0});
    EXPECT_DOUBLE_EQ(t.mass(), 2.0);
    EXPECT_DOUBLE_EQ(t.sample(0.5), 1.0);
    // density 2x on [0, 1] integrates to x^2, out of total mass 2
    EXPECT_NEAR(t.sample(0.0625), std::sqrt(0.125), 1e-15);
    EXPECT_THROW(DensityTable({0.0, 1.0}, {1.0, -1.0}), Error);
}
