// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "snnk/error.hpp"
#include "snnk/layer.hpp"
#include "snnk/random.hpp"

namespace snnk {

enum class Split { Train, Validation };

inline const char* split_name(Split s) { return s == Split::Train ? "train" : "validation"; }

struct Dataset {
    MatrixXd X;               // n x d
    MatrixXd Y;               // n x k targets (one-hot for classification)
    std::vector<int> labels;  // class indices, empty for regression
    int classes = 0;
    Split split = Split::Train;

    Eigen::Index size() const { return X.rows(); }

    void validate() const {
        require(X.rows() >= 1, ErrorCode::InvalidArgument, "dataset is empty");
        require(Y.rows() == X.rows(), ErrorCode::ShapeMismatch, "X and Y row counts differ");
        require(X.allFinite() && Y.allFinite(), ErrorCode::InvalidArgument, "non-finite data");
        if (!labels.empty()) {
            require(static_cast<Eigen::Index>(labels.size()) == X.rows(), ErrorCode::ShapeMismatch,
                    "label count differs from row count");
            for (int c : labels)
                require(c >= 0 && c < classes, ErrorCode::InvalidArgument, "label out of range");
        }
    }
};

inline Dataset subset(const Dataset& d, const std::vector<Eigen::Index>& rows, Split split) {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), d.X.cols());
    out.Y.resize(static_cast<Eigen::Index>(rows.size()), d.Y.cols());
    out.classes = d.classes;
    out.split = split;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = d.X.row(rows[i]);
        out.Y.row(static_cast<Eigen::Index>(i)) = d.Y.row(rows[i]);
        if (!d.labels.empty()) out.labels.push_back(d.labels[static_cast<std::size_t>(rows[i])]);
    }
    return out;
}

// k Gaussian clusters (unit covariance). Means are random directions rescaled
// so that the closest pair sits exactly `separation` apart.
inline Dataset generate_blobs(int n, int d, int k, double separation, std::uint64_t seed) {
    require(n >= 1 && d >= 1, ErrorCode::InvalidArgument, "blobs need n, d >= 1");
    require(k >= 2, ErrorCode::InvalidArgument, "blobs need at least two classes");
    require(separation > 0.0, ErrorCode::InvalidArgument, "separation must be positive");
    Rng rng = make_rng(seed, {0xb10b});
    MatrixXd means(k, d);
    for (int c = 0; c < k; ++c)
        for (int j = 0; j < d; ++j) means(c, j) = standard_normal(rng);
    double closest = std::numeric_limits<double>::infinity();
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) closest = std::min(closest, (means.row(a) - means.row(b)).norm());
    require(closest > 0.0, ErrorCode::InvalidArgument, "degenerate cluster means");
    means *= separation / closest;

    Dataset data;
    data.X.resize(n, d);
    data.Y = MatrixXd::Zero(n, k);
    data.classes = k;
    for (int i = 0; i < n; ++i) {
        const int c = i % k;
        for (int j = 0; j < d; ++j) data.X(i, j) = means(c, j) + standard_normal(rng);
        data.Y(i, c) = 1.0;
        data.labels.push_back(c);
    }
    return data;
}

// Deterministic shuffled split; the first part is the training set.
inline std::pair<Dataset, Dataset> train_validation_split(const Dataset& d, double validation_fraction,
                                                          std::uint64_t seed) {
    require(validation_fraction > 0.0 && validation_fraction < 1.0, ErrorCode::InvalidArgument,
            "validation fraction must be in (0, 1)");
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(d.size()));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = make_rng(seed, {0x5b11});
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng() % i)]);
    const auto nv = std::max<std::size_t>(1, static_cast<std::size_t>(validation_fraction * idx.size()));
    require(nv < idx.size(), ErrorCode::InvalidArgument, "split leaves no training rows");
    std::vector<Eigen::Index> tr(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(nv));
    std::vector<Eigen::Index> va(idx.end() - static_cast<std::ptrdiff_t>(nv), idx.end());
    return {subset(d, tr, Split::Train), subset(d, va, Split::Validation)};
}

enum class Loss { MSE, CrossEntropy };

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 100;
    int batch_size = 32;
    Loss loss = Loss::MSE;
    std::uint64_t seed = 0;
    double l2 = 0.0;
    double momentum = 0.0;
};

struct AffineHead {
    MatrixXd H;  // k x l
    VectorXd c;  // k

    static AffineHead random(int k, int l, std::uint64_t seed) {
        Rng rng = make_rng(seed, {0x4ead});
        AffineHead h;
        h.H.resize(k, l);
        const double sd = 1.0 / std::sqrt(static_cast<double>(l));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < l; ++j) h.H(i, j) = sd * standard_normal(rng);
        h.c = VectorXd::Zero(k);
        return h;
    }
};

// Outputs for a batch of cached features F (rows). Row-major n x k.
inline MatrixXd model_outputs(const MatrixXd& F, const MatrixXd& A, const std::optional<AffineHead>& head) {
    MatrixXd Z = F * A.transpose();
    if (!head) return Z;
    MatrixXd O = Z * head->H.transpose();
    O.rowwise() += head->c.transpose();
    return O;
}

struct LossValue {
    double loss = 0.0;
    double accuracy = 0.0;  // NaN for regression
};

inline LossValue evaluate_outputs(const MatrixXd& O, const Dataset& data, Loss loss) {
    LossValue v;
    const double n = static_cast<double>(O.rows());
    if (loss == Loss::MSE) {
        v.loss = (O - data.Y).squaredNorm() / n;
    } else {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < O.rows(); ++i) {
            const double mx = O.row(i).maxCoeff();
            const double lse = mx + std::log((O.row(i).array() - mx).exp().sum());
            acc += lse - O(i, data.labels[static_cast<std::size_t>(i)]);
        }
        v.loss = acc / n;
    }
    if (!data.labels.empty()) {
        int correct = 0;
        for (Eigen::Index i = 0; i < O.rows(); ++i) {
            Eigen::Index arg;
            O.row(i).maxCoeff(&arg);
            correct += arg == data.labels[static_cast<std::size_t>(i)];
        }
        v.accuracy = correct / n;
    } else {
        v.accuracy = std::numeric_limits<double>::quiet_NaN();
    }
    return v;
}

inline double total_loss(const MatrixXd& F, const Dataset& data, const MatrixXd& A,
                         const std::optional<AffineHead>& head, Loss loss, double l2) {
    double v = evaluate_outputs(model_outputs(F, A, head), data, loss).loss;
    v += l2 * A.squaredNorm();
    if (head) v += l2 * head->H.squaredNorm();
    return v;
}

struct Gradients {
    MatrixXd dA;
    MatrixXd dH;
    VectorXd dc;
};

// Output is linear in A given the cached features, so the gradient is exact.
inline Gradients analytic_gradients(const MatrixXd& F, const Dataset& data, const MatrixXd& A,
                                    const std::optional<AffineHead>& head, Loss loss, double l2) {
    const double n = static_cast<double>(F.rows());
    MatrixXd Z = F * A.transpose();
    MatrixXd O = head ? MatrixXd((Z * head->H.transpose()).rowwise() + head->c.transpose()) : Z;
    MatrixXd delta(O.rows(), O.cols());
    if (loss == Loss::MSE) {
        delta = 2.0 * (O - data.Y) / n;
    } else {
        for (Eigen::Index i = 0; i < O.rows(); ++i) {
            const double mx = O.row(i).maxCoeff();
            Eigen::RowVectorXd p = (O.row(i).array() - mx).exp();
            p /= p.sum();
            p[data.labels[static_cast<std::size_t>(i)]] -= 1.0;
            delta.row(i) = p / n;
        }
    }
    Gradients g;
    if (head) {
        g.dH = delta.transpose() * Z + 2.0 * l2 * head->H;
        g.dc = delta.colwise().sum().transpose();
        MatrixXd dZ = delta * head->H;
        g.dA = dZ.transpose() * F + 2.0 * l2 * A;
    } else {
        g.dA = delta.transpose() * F + 2.0 * l2 * A;
    }
    return g;
}

struct EpochRecord {
    int epoch = 0;
    Split split = Split::Train;
    double loss = 0.0;
    double accuracy = 0.0;
};

struct FitResult {
    SnnkLayer layer;
    std::optional<AffineHead> head;
    std::vector<EpochRecord> history;
};

// Mini-batch SGD (optional momentum) on A and the head; features stay frozen.
inline FitResult fit_A(const SnnkLayer& layer, const std::optional<AffineHead>& head, const Dataset& train,
                       const TrainConfig& cfg, const Dataset* validation = nullptr) {
    train.validate();
    require(layer.learnable, ErrorCode::InvalidArgument, "layer is not in learnable-A mode");
    require(cfg.learning_rate > 0.0 && cfg.epochs >= 0 && cfg.l2 >= 0.0, ErrorCode::InvalidArgument,
            "bad training config");
    require(cfg.batch_size >= 1 && cfg.batch_size <= train.size(), ErrorCode::InvalidArgument,
            "batch size must be in [1, n]");
    require(cfg.momentum >= 0.0 && cfg.momentum < 1.0, ErrorCode::InvalidArgument,
            "momentum must be in [0, 1)");
    const int out_dim = head ? static_cast<int>(head->H.rows()) : layer.output_dim();
    if (head)
        require(head->H.cols() == layer.output_dim() && head->c.size() == head->H.rows(),
                ErrorCode::ShapeMismatch, "head does not match the layer");
    if (cfg.loss == Loss::CrossEntropy)
        require(!train.labels.empty() && train.classes == out_dim, ErrorCode::ShapeMismatch,
                "cross-entropy needs labels for every output");
    else
        require(train.Y.cols() == out_dim, ErrorCode::ShapeMismatch, "target width differs from output");

    FitResult res{layer, head, {}};
    const MatrixXd F = layer_feature_matrix(layer, train.X);
    MatrixXd Fv;
    if (validation) Fv = layer_feature_matrix(layer, validation->X);

    auto record = [&](int epoch) {
        LossValue t = evaluate_outputs(model_outputs(F, res.layer.A, res.head), train, cfg.loss);
        res.history.push_back({epoch, Split::Train, t.loss, t.accuracy});
        if (validation) {
            LossValue v = evaluate_outputs(model_outputs(Fv, res.layer.A, res.head), *validation, cfg.loss);
            res.history.push_back({epoch, Split::Validation, v.loss, v.accuracy});
        }
        return t.loss;
    };
    const double initial = record(0);

    MatrixXd vA = MatrixXd::Zero(res.layer.A.rows(), res.layer.A.cols());
    MatrixXd vH;
    VectorXd vc;
    if (res.head) {
        vH = MatrixXd::Zero(res.head->H.rows(), res.head->H.cols());
        vc = VectorXd::Zero(res.head->c.size());
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(train.size()));
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(cfg.seed, {0x7a1});
    const bool full_batch = cfg.batch_size == train.size();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (!full_batch)
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<Eigen::Index> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(stop));
            Dataset batch = full_batch ? train : subset(train, rows, Split::Train);
            MatrixXd Fb(static_cast<Eigen::Index>(rows.size()), F.cols());
            for (std::size_t i = 0; i < rows.size(); ++i) Fb.row(static_cast<Eigen::Index>(i)) = F.row(rows[i]);
            Gradients g = analytic_gradients(Fb, batch, res.layer.A, res.head, cfg.loss, cfg.l2);
            vA = cfg.momentum * vA - cfg.learning_rate * g.dA;
            res.layer.A += vA;
            if (res.head) {
                vH = cfg.momentum * vH - cfg.learning_rate * g.dH;
                vc = cfg.momentum * vc - cfg.learning_rate * g.dc;
                res.head->H += vH;
                res.head->c += vc;
            }
        }
        const double l = record(epoch);
        if (!std::isfinite(l) || l > 10.0 * initial)
            throw Error(ErrorCode::DivergenceDetected,
                        "loss " + std::to_string(l) + " exceeds 10x the initial " + std::to_string(initial));
    }
    return res;
}

// Central differences (step 1e-5) against analytic_gradients over every
// trainable entry; relative error |a - b| / max(|a| + |b|, 1e-5).
inline double grad_check(const SnnkLayer& layer, const std::optional<AffineHead>& head, const Dataset& batch,
                         Loss loss, double l2 = 0.0) {
    batch.validate();
    const MatrixXd F = layer_feature_matrix(layer, batch.X);
    MatrixXd A = layer.A;
    std::optional<AffineHead> h = head;
    const Gradients g = analytic_gradients(F, batch, A, h, loss, l2);
    const double step = 1e-5;
    double worst = 0.0;
    auto compare = [&](double analytic, double& param) {
        const double keep = param;
        param = keep + step;
        const double up = total_loss(F, batch, A, h, loss, l2);
        param = keep - step;
        const double down = total_loss(F, batch, A, h, loss, l2);
        param = keep;
        const double numeric = (up - down) / (2.0 * step);
        worst = std::max(worst, std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-5));
    };
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j) compare(g.dA(i, j), A(i, j));
    if (h) {
        for (Eigen::Index i = 0; i < h->H.rows(); ++i)
            for (Eigen::Index j = 0; j < h->H.cols(); ++j) compare(g.dH(i, j), h->H(i, j));
        for (Eigen::Index i = 0; i < h->c.size(); ++i) compare(g.dc[i], h->c[i]);
    }
    return worst;
}

}  // namespace snnk
