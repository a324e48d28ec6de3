// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "snnk/error.hpp"
#include "snnk/fourier.hpp"
#include "snnk/layer.hpp"
#include "snnk/urf.hpp"

namespace snnk {

using Eigen::MatrixXcd;

struct DenseLayer {
    MatrixXd W;  // d_{i+1} x d_i
    VectorXd b;
    Activation f;
};

// x_{i+1} = f_{i+1}(W_i x_i + b_i)
struct LayeredNetwork {
    int input_dim = 0;
    std::vector<DenseLayer> layers;

    void validate() const {
        require(input_dim >= 1, ErrorCode::InvalidArgument, "input dimension must be positive");
        Eigen::Index d = input_dim;
        for (const DenseLayer& l : layers) {
            require(l.W.cols() == d && l.W.rows() == l.b.size(), ErrorCode::ShapeMismatch,
                    "layer dimensions do not chain");
            d = l.W.rows();
        }
    }

    int output_dim() const { return layers.empty() ? input_dim : static_cast<int>(layers.back().W.rows()); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const DenseLayer& l : layers) n += static_cast<std::size_t>(l.W.size() + l.b.size());
        return n;
    }

    VectorXd forward(const VectorXd& x) const {
        validate();
        VectorXd h = x;
        for (const DenseLayer& l : layers) h = ffl_forward(h, FflSpec{l.W, l.b, l.f});
        return h;
    }
};

// One Phi preprocessing stage of the chain.
struct PhiStage {
    Activation f;
    UrfConfig config;
    UrfDraws draws;
};

// A layer whose weight matrix may be complex after absorbing a Psi block.
struct ComplexLayer {
    MatrixXcd W;
    VectorXd b;
    Activation f;
};

// Partially bundled network: x -> Phi chain -> remaining layers. Once all
// layers are absorbed, w_bar holds the collapsed matrix.
struct PartialBundle {
    int input_dim = 0;
    FtOptions ft;
    std::vector<PhiStage> chain;
    std::vector<ComplexLayer> layers;
    std::optional<MatrixXcd> w_bar;

    std::size_t layer_count() const { return layers.size(); }
};

struct BundledNetwork {
    int input_dim = 0;
    std::vector<PhiStage> chain;
    MatrixXcd w_bar;  // d_L x M

    std::size_t parameter_count() const { return 2 * static_cast<std::size_t>(w_bar.size()); }
};

inline PartialBundle as_partial(const LayeredNetwork& net, const FtOptions& ft = {}) {
    net.validate();
    PartialBundle p;
    p.input_dim = net.input_dim;
    p.ft = ft;
    for (const DenseLayer& l : net.layers) p.layers.push_back({l.W.cast<cdouble>(), l.b, l.f});
    return p;
}

inline VectorXcd chain_forward(const std::vector<PhiStage>& chain, const VectorXcd& x) {
    VectorXcd h = x;
    for (const PhiStage& s : chain) h = phi(h, s.draws).entries;
    return h;
}

// Psi applied to every row of W with the matching bias; rows of the result
// are Psi(W^j, b^j).
inline MatrixXcd psi_rows(const MatrixXcd& W, const VectorXd& b, const UrfDraws& draws) {
    MatrixXcd P(W.rows(), static_cast<Eigen::Index>(draws.feature_length()));
    for (Eigen::Index j = 0; j < W.rows(); ++j)
        P.row(j) = psi(VectorXcd(W.row(j).transpose()), b[j], draws).entries.transpose();
    return P;
}

// Absorbs the first remaining layer. With two or more layers left, the new
// first weight is W_1 Psi_{f_1}(W_0, b_0); with one layer left it becomes w_bar.
inline PartialBundle bundle_once(PartialBundle p, const UrfConfig& cfg) {
    require(!p.layers.empty(), ErrorCode::InvalidArgument, "nothing left to bundle");
    const ComplexLayer first = p.layers.front();
    PhiStage stage;
    stage.f = first.f;
    stage.config = cfg;
    stage.draws = sample_draws(fourier_decomposition(first.f, p.ft), cfg, static_cast<int>(first.W.cols()));
    MatrixXcd P = psi_rows(first.W, first.b, stage.draws);
    p.chain.push_back(std::move(stage));
    p.layers.erase(p.layers.begin());
    if (p.layers.empty()) {
        p.w_bar = std::move(P);
    } else {
        p.layers.front().W = p.layers.front().W * P;
    }
    return p;
}

// Remaining layers act on Re of their pre-activation.
inline VectorXd partial_forward(const PartialBundle& p, const VectorXd& x) {
    VectorXcd h = chain_forward(p.chain, x.cast<cdouble>());
    if (p.w_bar) {
        VectorXd out(p.w_bar->rows());
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            VectorXcd row = p.w_bar->row(i).transpose();
            out[i] = realified_dot(h.data(), row.data(), static_cast<std::size_t>(h.size()));
        }
        return out;
    }
    VectorXd r;
    for (std::size_t li = 0; li < p.layers.size(); ++li) {
        const ComplexLayer& l = p.layers[li];
        VectorXd pre = li == 0 ? VectorXd((l.W * h).real()) : VectorXd(l.W.real() * r);
        pre += l.b;
        for (Eigen::Index i = 0; i < pre.size(); ++i) pre[i] = eval_activation(l.f, pre[i]);
        r = pre;
    }
    return r;
}

inline std::vector<UrfConfig> per_layer_configs(const UrfConfig& base, std::size_t layers) {
    std::vector<UrfConfig> out(layers, base);
    for (std::size_t i = 0; i < layers; ++i) out[i].seed = derive_seed(base.seed, {0xb0, i});
    return out;
}

inline BundledNetwork bundle_full(const LayeredNetwork& net, const std::vector<UrfConfig>& cfgs,
                                  const FtOptions& ft = {}) {
    net.validate();
    require(!net.layers.empty(), ErrorCode::InvalidArgument, "network has no layers");
    require(cfgs.size() == net.layers.size(), ErrorCode::InvalidArgument,
            "one config per layer is required");
    PartialBundle p = as_partial(net, ft);
    for (const UrfConfig& c : cfgs) p = bundle_once(std::move(p), c);
    return {net.input_dim, std::move(p.chain), std::move(*p.w_bar)};
}

inline BundledNetwork bundle_full(const LayeredNetwork& net, const UrfConfig& base,
                                  const FtOptions& ft = {}) {
    return bundle_full(net, per_layer_configs(base, net.layers.size()), ft);
}

struct FlopCount {
    double bundled = 0.0;
    double original = 0.0;
};

// Multiply-adds counted as two flops; complex products as four real products.
inline FlopCount flop_count(const BundledNetwork& bn, const LayeredNetwork& net) {
    FlopCount c;
    double d = bn.input_dim;
    bool complex_in = false;
    for (const PhiStage& s : bn.chain) {
        const double M = static_cast<double>(s.draws.feature_length());
        c.bundled += (complex_in ? 4.0 : 2.0) * M * d + 10.0 * M;
        d = M;
        complex_in = true;
    }
    c.bundled += 4.0 * static_cast<double>(bn.w_bar.rows()) * d;
    for (const DenseLayer& l : net.layers)
        c.original += 2.0 * static_cast<double>(l.W.size()) + 2.0 * static_cast<double>(l.W.rows());
    return c;
}

inline VectorXd bundled_forward(const VectorXd& x, const BundledNetwork& bn) {
    require(x.size() == bn.input_dim, ErrorCode::ShapeMismatch, "bundled input dimension mismatch");
    VectorXcd h = chain_forward(bn.chain, x.cast<cdouble>());
    require(h.size() == bn.w_bar.cols(), ErrorCode::ShapeMismatch, "chain and W_bar do not match");
    VectorXd out(bn.w_bar.rows());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        VectorXcd row = bn.w_bar.row(i).transpose();
        out[i] = realified_dot(h.data(), row.data(), static_cast<std::size_t>(h.size()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Folding an SNNK layer into the affine map that follows it.

struct FoldedAffine {
    MatrixXd F;  // M x d_out, F = A^T W2^T
    VectorXd b;  // d_out

    std::size_t parameter_count() const { return static_cast<std::size_t>(F.size() + b.size()); }
};

// W2 is d_out x l (its columns index the layer outputs).
inline FoldedAffine fold_following_linear(const SnnkLayer& layer, const MatrixXd& W2, const VectorXd& b2) {
    require(W2.cols() == layer.output_dim(), ErrorCode::ShapeMismatch,
            "W2 columns must equal the layer output dimension");
    require(W2.rows() == b2.size(), ErrorCode::ShapeMismatch, "W2 rows and b2 length differ");
    return {layer.A.transpose() * W2.transpose(), b2};
}

inline VectorXd folded_forward(const VectorXd& x, const SnnkLayer& layer, const FoldedAffine& f) {
    VectorXd feat = layer_features(layer, x);
    require(feat.size() == f.F.rows(), ErrorCode::ShapeMismatch, "folded map does not match layer");
    return f.F.transpose() * feat + f.b;
}

struct PoolerClassifierBundle {
    SnnkLayer pooler;
    FoldedAffine merged;
    double storage_before = 0.0;  // d*d + d*c
    double storage_after = 0.0;   // M*c
    double storage_ratio() const { return storage_before / storage_after; }
};

// tanh(Wp x + bp) followed by Wc . + bc, merged into Phi(x)^T Psi(Wp, bp)^T Wc^T + bc.
inline PoolerClassifierBundle bundle_pooler_classifier(const MatrixXd& Wp, const VectorXd& bp,
                                                       const MatrixXd& Wc, const VectorXd& bc,
                                                       const UrfConfig& cfg, const FtOptions& ft = {}) {
    require(Wc.rows() >= 1, ErrorCode::ShapeMismatch, "classifier needs at least one class");
    require(Wc.cols() == Wp.rows(), ErrorCode::ShapeMismatch, "classifier and pooler dims differ");
    PoolerClassifierBundle out;
    out.pooler = snnk_from_ffl(FflSpec{Wp, bp, Activation::tanh()}, cfg, ft);
    out.merged = fold_following_linear(out.pooler, Wc, bc);
    const double d = static_cast<double>(Wp.cols()), c = static_cast<double>(Wc.rows());
    out.storage_before = d * d + d * c;
    out.storage_after = static_cast<double>(out.pooler.feature_dim()) * c;
    return out;
}

inline double storage_ratio(int d, int M, int c) {
    return (static_cast<double>(d) * d + static_cast<double>(d) * c) / (static_cast<double>(M) * c);
}

// ---------------------------------------------------------------------------
// Error propagation across a bundled stack.

struct PropagationBound {
    double sum_bound = 0.0;   // deviation eps of the m-term sum: depth * 2 exp(-eps^2 / (8 m c^2))
    double mean_bound = 0.0;  // deviation eps of the m-sample mean: depth * 2 exp(-m eps^2 / (8 c^2))
    double accumulated_eps = 0.0;  // eps + delta(eps) + ... (depth - 1 compositions)
};

inline PropagationBound error_propagation_bound(double eps, int m, double c, int depth,
                                                const std::function<double(double)>& delta) {
    require(eps > 0.0 && c > 0.0 && m >= 1 && depth >= 1, ErrorCode::InvalidArgument,
            "bad error-propagation arguments");
    PropagationBound b;
    const double md = static_cast<double>(m);
    b.sum_bound = depth * 2.0 * std::exp(-eps * eps / (8.0 * md * c * c));
    b.mean_bound = depth * 2.0 * std::exp(-md * eps * eps / (8.0 * c * c));
    double term = eps, acc = eps;
    for (int i = 1; i < depth; ++i) {
        term = delta(term);
        acc += term;
    }
    b.accumulated_eps = acc;
    return b;
}

}  // namespace snnk
