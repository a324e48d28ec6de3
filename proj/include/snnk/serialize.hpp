// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "snnk/bundling.hpp"
#include "snnk/error.hpp"
#include "snnk/layer.hpp"
#include "snnk/urf.hpp"

// JSON records for layers and bundled networks. Draws are not stored: they are
// regenerated from (activation, ft options, config, input dim), which is exact
// because sampling is a pure function of those fields.

namespace snnk {

using nlohmann::json;

inline json matrix_to_json(const MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(std::move(r));
    }
    return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", rows}};
}

inline MatrixXd matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    MatrixXd M(rows, cols);
    const json& data = j.at("data");
    require(static_cast<Eigen::Index>(data.size()) == rows, ErrorCode::ConfigError, "matrix row count");
    for (Eigen::Index i = 0; i < rows; ++i) {
        require(static_cast<Eigen::Index>(data[static_cast<std::size_t>(i)].size()) == cols,
                ErrorCode::ConfigError, "matrix column count");
        for (Eigen::Index j2 = 0; j2 < cols; ++j2)
            M(i, j2) = data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j2)].get<double>();
    }
    return M;
}

inline json complex_matrix_to_json(const MatrixXcd& M) {
    return {{"re", matrix_to_json(M.real())}, {"im", matrix_to_json(M.imag())}};
}

inline MatrixXcd complex_matrix_from_json(const json& j) {
    MatrixXd re = matrix_from_json(j.at("re")), im = matrix_from_json(j.at("im"));
    require(re.rows() == im.rows() && re.cols() == im.cols(), ErrorCode::ConfigError,
            "complex matrix parts differ in shape");
    MatrixXcd M(re.rows(), re.cols());
    M.real() = re;
    M.imag() = im;
    return M;
}

inline const char* proposal_name(Proposal::Kind k) {
    switch (k) {
        case Proposal::Kind::Exact: return "exact";
        case Proposal::Kind::Gaussian: return "gaussian";
        case Proposal::Kind::GridCategorical: return "grid";
    }
    return "?";
}

inline Proposal::Kind parse_proposal(const std::string& s) {
    if (s == "exact") return Proposal::Kind::Exact;
    if (s == "gaussian") return Proposal::Kind::Gaussian;
    if (s == "grid") return Proposal::Kind::GridCategorical;
    throw Error(ErrorCode::ConfigError, "unknown proposal '" + s + "'");
}

inline json to_json(const UrfConfig& c) {
    json props = json::array();
    for (const Proposal& p : c.proposals) props.push_back({{"kind", proposal_name(p.kind)}, {"sigma", p.sigma}});
    return {{"m", c.m},
            {"A", c.A},
            {"strategy", c.strategy == SamplingStrategy::Iid ? "iid" : "block"},
            {"block_size", c.block_size},
            {"atom_mode", c.atom_mode == AtomMode::Sample ? "sample" : "concat"},
            {"seed", c.seed},
            {"proposals", props}};
}

inline UrfConfig urf_config_from_json(const json& j, UrfConfig c = {}) {
    c.m = j.value("m", c.m);
    c.A = j.value("A", c.A);
    const std::string strat = j.value("strategy", std::string(c.strategy == SamplingStrategy::Iid ? "iid" : "block"));
    if (strat == "iid")
        c.strategy = SamplingStrategy::Iid;
    else if (strat == "block")
        c.strategy = SamplingStrategy::Block;
    else
        throw Error(ErrorCode::ConfigError, "unknown strategy '" + strat + "'");
    c.block_size = j.value("block_size", c.block_size);
    const std::string mode = j.value("atom_mode", std::string("sample"));
    require(mode == "sample" || mode == "concat", ErrorCode::ConfigError, "unknown atom_mode");
    c.atom_mode = mode == "sample" ? AtomMode::Sample : AtomMode::Concat;
    c.seed = j.value("seed", c.seed);
    if (j.contains("proposals")) {
        const json& p = j.at("proposals");
        require(p.is_array() && p.size() == 4, ErrorCode::ConfigError, "proposals needs 4 entries");
        for (std::size_t i = 0; i < 4; ++i) {
            c.proposals[i].kind = parse_proposal(p[i].value("kind", std::string("exact")));
            c.proposals[i].sigma = p[i].value("sigma", 0.0);
        }
    }
    c.validate();
    return c;
}

inline json to_json(const FtOptions& o) {
    return {{"xi_min", o.xi_min},
            {"tail_tolerance", o.tail_tolerance},
            {"grid_points", o.grid_points},
            {"grid_limit", o.grid_limit},
            {"window_plateau", o.window.plateau},
            {"window_taper", o.window.taper},
            {"quadrature_tolerance", o.quadrature_tolerance}};
}

inline FtOptions ft_options_from_json(const json& j, FtOptions o = {}) {
    o.xi_min = j.value("xi_min", o.xi_min);
    o.tail_tolerance = j.value("tail_tolerance", o.tail_tolerance);
    o.grid_points = j.value("grid_points", o.grid_points);
    o.grid_limit = j.value("grid_limit", o.grid_limit);
    o.window = WindowSpec::plateau_window(j.value("window_plateau", o.window.plateau),
                                          j.value("window_taper", o.window.taper));
    o.quadrature_tolerance = j.value("quadrature_tolerance", o.quadrature_tolerance);
    return o;
}

inline std::string activation_spec(const Activation& a) {
    switch (a.kind) {
        case ActivationKind::Swish:
        case ActivationKind::SmoothedRelu: {
            json p = a.param;  // shortest round-trip text
            return activation_name(a) + ":" + p.dump();
        }
        default: return activation_name(a);
    }
}

inline json layout_to_json(const Layout& layout) {
    json out = json::array();
    for (const LayoutSlice& s : layout)
        out.push_back({{"axis", axis_name(s.axis)}, {"atom", s.atom}, {"offset", s.offset}, {"length", s.length}});
    return out;
}

inline json to_json(const SnnkLayer& layer) {
    json j;
    j["kind"] = layer.kind == FeatureKind::Urf ? "urf" : "relu";
    j["input_dim"] = layer.input_dim;
    if (layer.kind == FeatureKind::Urf) {
        j["activation"] = activation_spec(layer.activation);
        j["ft"] = to_json(layer.ft);
        j["config"] = to_json(layer.config);
        j["layout"] = layout_to_json(layout_of(layer.draws));
    } else {
        j["features"] = layer.G.rows();
        j["relu_seed"] = layer.relu_seed;
    }
    j["A"] = matrix_to_json(layer.A);
    j["learnable"] = layer.learnable;
    j["provenance"] = {{"source", layer.provenance.source}, {"seed", layer.provenance.seed}};
    return j;
}

inline SnnkLayer snnk_layer_from_json(const json& j) {
    SnnkLayer layer;
    const std::string kind = j.at("kind").get<std::string>();
    layer.input_dim = j.at("input_dim").get<int>();
    if (kind == "urf") {
        layer.kind = FeatureKind::Urf;
        layer.activation = parse_activation(j.at("activation").get<std::string>());
        layer.ft = ft_options_from_json(j.at("ft"));
        layer.config = urf_config_from_json(j.at("config"));
        layer.draws = sample_draws(fourier_decomposition(layer.activation, layer.ft), layer.config, layer.input_dim);
        if (j.contains("layout"))
            require(layout_to_json(layout_of(layer.draws)) == j.at("layout"), ErrorCode::LayoutMismatch,
                    "stored layout differs from the regenerated one");
    } else if (kind == "relu") {
        layer.kind = FeatureKind::Relu;
        layer.relu_seed = j.at("relu_seed").get<std::uint64_t>();
        layer.G = gaussian_matrix(j.at("features").get<Eigen::Index>(), layer.input_dim, layer.relu_seed);
    } else {
        throw Error(ErrorCode::ConfigError, "unknown layer kind '" + kind + "'");
    }
    layer.A = matrix_from_json(j.at("A"));
    require(layer.A.cols() == layer.feature_dim(), ErrorCode::ShapeMismatch,
            "stored A does not match the feature length");
    layer.learnable = j.value("learnable", false);
    layer.provenance.source = j.at("provenance").value("source", std::string());
    layer.provenance.seed = j.at("provenance").value("seed", std::uint64_t{0});
    return layer;
}

inline json to_json(const BundledNetwork& bn, const FtOptions& ft) {
    json chain = json::array();
    for (const PhiStage& s : bn.chain)
        chain.push_back({{"activation", activation_spec(s.f)},
                         {"input_dim", s.draws.input_dim},
                         {"config", to_json(s.config)},
                         {"layout", layout_to_json(layout_of(s.draws))}});
    return {{"input_dim", bn.input_dim}, {"ft", to_json(ft)}, {"chain", chain}, {"w_bar", complex_matrix_to_json(bn.w_bar)}};
}

inline BundledNetwork bundled_network_from_json(const json& j) {
    BundledNetwork bn;
    bn.input_dim = j.at("input_dim").get<int>();
    const FtOptions ft = ft_options_from_json(j.at("ft"));
    for (const json& s : j.at("chain")) {
        PhiStage st;
        st.f = parse_activation(s.at("activation").get<std::string>());
        st.config = urf_config_from_json(s.at("config"));
        st.draws = sample_draws(fourier_decomposition(st.f, ft), st.config, s.at("input_dim").get<int>());
        bn.chain.push_back(std::move(st));
    }
    bn.w_bar = complex_matrix_from_json(j.at("w_bar"));
    return bn;
}

}  // namespace snnk
