// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "snnk/arc_cosine.hpp"
#include "snnk/error.hpp"
#include "snnk/fourier.hpp"
#include "snnk/random.hpp"
#include "snnk/urf.hpp"

namespace snnk {

struct FflSpec {
    MatrixXd W;  // l x d
    VectorXd b;  // l
    Activation activation;

    void validate() const {
        require(W.rows() == b.size(), ErrorCode::ShapeMismatch, "W rows and b length differ");
        require(W.allFinite() && b.allFinite(), ErrorCode::InvalidArgument, "non-finite FFL weights");
    }
};

inline VectorXd ffl_forward(const VectorXd& x, const FflSpec& spec) {
    spec.validate();
    require(spec.W.cols() == x.size(), ErrorCode::ShapeMismatch, "FFL input dimension mismatch");
    VectorXd pre = spec.W * x + spec.b;
    for (Eigen::Index i = 0; i < pre.size(); ++i) pre[i] = eval_activation(spec.activation, pre[i]);
    return pre;
}

enum class FeatureKind { Urf, Relu };

// Where a derived A came from.
struct Provenance {
    std::string source;  // "ffl", "learnable", "fold"
    std::uint64_t seed = 0;
    bool operator==(const Provenance&) const = default;
};

// An SNNK layer x -> A * features(x). URF features are complex and are fed to A
// in realified form [Re Phi; -Im Phi], so a derived A holds [Re Psi | Im Psi]
// and A * features(x) = Re <Phi(x), Psi(w, b)> row by row.
// ReLU layers use features max(0, G x / sqrt(l')) and estimate K_1(w_i, x).
struct SnnkLayer {
    FeatureKind kind = FeatureKind::Urf;
    int input_dim = 0;

    // Urf
    Activation activation;
    FtOptions ft;
    UrfConfig config;
    UrfDraws draws;

    // Relu
    MatrixXd G;  // l' x d
    std::uint64_t relu_seed = 0;

    MatrixXd A;  // l x feature_dim
    bool learnable = false;
    Provenance provenance;

    int output_dim() const { return static_cast<int>(A.rows()); }
    int feature_dim() const {
        return kind == FeatureKind::Urf ? 2 * static_cast<int>(draws.feature_length())
                                        : static_cast<int>(G.rows());
    }
    std::size_t parameter_count() const { return static_cast<std::size_t>(A.size()); }
};

inline std::size_t ffl_parameter_count(int d, int l, bool with_bias = false) {
    return static_cast<std::size_t>(d) * static_cast<std::size_t>(l) +
           (with_bias ? static_cast<std::size_t>(l) : 0);
}

inline VectorXd realify(const FeatureVector& f) {
    const auto n = static_cast<Eigen::Index>(f.size());
    VectorXd out(2 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out[k] = f.entries[k].real();
        out[n + k] = -f.entries[k].imag();
    }
    return out;
}

inline VectorXd layer_features(const SnnkLayer& layer, const VectorXd& x) {
    require(x.size() == layer.input_dim, ErrorCode::ShapeMismatch, "layer input dimension mismatch");
    if (layer.kind == FeatureKind::Relu) return relu_snnk_features(x, layer.G);
    return realify(phi(x, layer.draws));
}

// Rows are layer_features of the rows of X.
inline MatrixXd layer_feature_matrix(const SnnkLayer& layer, const MatrixXd& X) {
    MatrixXd F(X.rows(), layer.feature_dim());
    for (Eigen::Index i = 0; i < X.rows(); ++i) F.row(i) = layer_features(layer, X.row(i).transpose());
    return F;
}

// Plain loops: the order of accumulation matches realified_dot, so a derived
// layer reproduces kernel_estimate exactly.
inline VectorXd apply_feature_weights(const MatrixXd& A, const VectorXd& f) {
    require(A.cols() == f.size(), ErrorCode::ShapeMismatch, "A columns and feature length differ");
    VectorXd out(A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < f.size(); ++k) acc += A(i, k) * f[k];
        out[i] = acc;
    }
    return out;
}

inline VectorXd snnk_forward(const VectorXd& x, const SnnkLayer& layer) {
    return apply_feature_weights(layer.A, layer_features(layer, x));
}

inline SnnkLayer snnk_from_ffl(const FflSpec& spec, const UrfConfig& cfg, const FtOptions& ft = {}) {
    spec.validate();
    SnnkLayer layer;
    layer.kind = FeatureKind::Urf;
    layer.input_dim = static_cast<int>(spec.W.cols());
    layer.activation = spec.activation;
    layer.ft = ft;
    layer.config = cfg;
    layer.draws = sample_draws(fourier_decomposition(spec.activation, ft), cfg, layer.input_dim);
    const auto M = static_cast<Eigen::Index>(layer.draws.feature_length());
    layer.A.resize(spec.W.rows(), 2 * M);
    for (Eigen::Index i = 0; i < spec.W.rows(); ++i) {
        FeatureVector p = psi(VectorXd(spec.W.row(i).transpose()), spec.b[i], layer.draws);
        for (Eigen::Index k = 0; k < M; ++k) {
            layer.A(i, k) = p.entries[k].real();
            layer.A(i, M + k) = p.entries[k].imag();
        }
    }
    layer.provenance = {"ffl", cfg.seed};
    return layer;
}

// ReLU-SNNK with shared projection G (l' x d); row i estimates K_1(w_i, x).
inline SnnkLayer relu_snnk_from_weights(const MatrixXd& W, int features, std::uint64_t seed) {
    require(features >= 1, ErrorCode::InvalidArgument, "feature count must be >= 1");
    SnnkLayer layer;
    layer.kind = FeatureKind::Relu;
    layer.input_dim = static_cast<int>(W.cols());
    layer.relu_seed = seed;
    layer.G = gaussian_matrix(features, W.cols(), seed);
    layer.A.resize(W.rows(), features);
    for (Eigen::Index i = 0; i < W.rows(); ++i)
        layer.A.row(i) = 2.0 * relu_snnk_features(W.row(i).transpose(), layer.G).transpose();
    layer.provenance = {"ffl", seed};
    return layer;
}

// Learnable-A layers: features fixed by (config, seed), A ~ N(0, 1/M).
inline SnnkLayer learnable_urf_layer(const Activation& act, int d, int l, const UrfConfig& cfg,
                                     std::uint64_t init_seed, const FtOptions& ft = {}) {
    require(d >= 1 && l >= 1, ErrorCode::InvalidArgument, "layer dims must be positive");
    SnnkLayer layer;
    layer.kind = FeatureKind::Urf;
    layer.input_dim = d;
    layer.activation = act;
    layer.ft = ft;
    layer.config = cfg;
    layer.draws = sample_draws(fourier_decomposition(act, ft), cfg, d);
    layer.learnable = true;
    const int M = layer.feature_dim();
    Rng rng = make_rng(init_seed, {0x1a});
    layer.A.resize(l, M);
    const double sd = 1.0 / std::sqrt(static_cast<double>(M));
    for (int i = 0; i < l; ++i)
        for (int k = 0; k < M; ++k) layer.A(i, k) = sd * standard_normal(rng);
    layer.provenance = {"learnable", init_seed};
    return layer;
}

inline SnnkLayer learnable_relu_layer(int d, int l, int features, std::uint64_t seed,
                                      std::uint64_t init_seed) {
    require(d >= 1 && l >= 1 && features >= 1, ErrorCode::InvalidArgument,
            "layer dims must be positive");
    SnnkLayer layer;
    layer.kind = FeatureKind::Relu;
    layer.input_dim = d;
    layer.relu_seed = seed;
    layer.G = gaussian_matrix(features, d, seed);
    layer.learnable = true;
    Rng rng = make_rng(init_seed, {0x1a});
    layer.A.resize(l, features);
    const double sd = 1.0 / std::sqrt(static_cast<double>(features));
    for (int i = 0; i < l; ++i)
        for (int k = 0; k < features; ++k) layer.A(i, k) = sd * standard_normal(rng);
    layer.provenance = {"learnable", init_seed};
    return layer;
}

// ---------------------------------------------------------------------------
// Gated residual block: Y = v (.) SNNK(X) + X, rowwise.

inline MatrixXd gated_residual_block(const MatrixXd& X, const SnnkLayer& layer, const VectorXd& v) {
    require(layer.output_dim() == layer.input_dim, ErrorCode::ShapeMismatch,
            "gated block needs a square layer");
    require(X.cols() == layer.input_dim && v.size() == X.cols(), ErrorCode::ShapeMismatch,
            "gated block dimensions differ");
    MatrixXd Y = X;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        VectorXd s = snnk_forward(X.row(i).transpose(), layer);
        for (Eigen::Index k = 0; k < X.cols(); ++k) {
            const double g = v[k] * s[k];
            if (g != 0.0) Y(i, k) = g + X(i, k);
        }
    }
    return Y;
}

// Trainable parameters reported for the gated block with d-dim tokens and M
// random features: (d + 1) * M.
inline std::size_t gated_block_parameter_count(int d, int M) {
    return static_cast<std::size_t>(d + 1) * static_cast<std::size_t>(M);
}

}  // namespace snnk
