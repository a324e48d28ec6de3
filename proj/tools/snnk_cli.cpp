// SPDX-License-Identifier: Apache-2.0
//
// snnk: command-line harness. Every subcommand reads an optional JSON config
// and writes CSV to --out (stdout by default).

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "snnk/snnk.hpp"

using namespace snnk;
using nlohmann::json;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    int threads = 1;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    require(in.good(), ErrorCode::ConfigError, "cannot open config '" + path + "'");
    try {
        json j = json::parse(in);
        require(j.is_object(), ErrorCode::ConfigError, "config root must be an object");
        return j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("bad JSON in config: ") + e.what());
    }
}

std::uint64_t pick_seed(const Globals& g, const json& cfg) {
    if (g.seed) return *g.seed;
    return cfg.value("seed", std::uint64_t{0});
}

// Owns the output stream for --out (or forwards to stdout).
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            require(file_->good(), ErrorCode::ConfigError, "cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

EstimateConfig estimate_config_from_json(const json& j, std::uint64_t seed, int threads) {
    EstimateConfig c;
    try {
        c.activation = j.value("activation", c.activation);
        const std::string variant = j.value("variant", std::string("urf"));
        require(variant == "urf" || variant == "arc_cosine", ErrorCode::ConfigError,
                "variant must be 'urf' or 'arc_cosine'");
        c.variant = variant == "urf" ? EstimateVariant::Urf : EstimateVariant::ArcCosine;
        c.d = j.value("d", c.d);
        c.l = j.value("l", c.l);
        c.b = j.value("b", c.b);
        if (j.contains("p")) c.p = j.at("p").get<std::vector<int>>();
        c.s = j.value("s", c.s);
        c.A = j.value("A", c.A);
        c.block_size = j.value("block_size", c.block_size);
        c.strategy = parse_strategy(j.value("strategy", std::string("iid")), &c.block_size);
        c.tie_inputs = j.value("tie_inputs", c.tie_inputs);
        if (j.contains("ft")) c.ft = ft_options_from_json(j.at("ft"));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
    c.seed = seed;
    c.threads = threads;
    c.validate();
    return c;
}

int cmd_estimate(const Globals& g) {
    const json j = load_config(g.config_path);
    EstimateConfig cfg = estimate_config_from_json(j, pick_seed(g, j), g.threads);
    EstimateReport rep = run_pointwise(cfg);
    Output out(g.out_path);
    write_summary_csv(out.stream(), rep, cfg.s);
    if (j.contains("trials_out")) {
        Output trials(j.at("trials_out").get<std::string>());
        write_trials_csv(trials.stream(), rep);
    }
    return 0;
}

int cmd_sweep(const Globals& g) {
    const json j = load_config(g.config_path);
    const std::uint64_t seed = pick_seed(g, j);
    EstimateConfig base = estimate_config_from_json(j.value("base", json::object()), seed, g.threads);
    const std::string axis_name = j.value("axis", std::string("A"));
    SweepAxis axis;
    if (axis_name == "A")
        axis = SweepAxis::A;
    else if (axis_name == "strategy")
        axis = SweepAxis::Strategy;
    else if (axis_name == "activation")
        axis = SweepAxis::Activation;
    else
        throw Error(ErrorCode::ConfigError, "unknown sweep axis '" + axis_name + "'");
    std::vector<std::string> values;
    for (const json& v : j.value("values", json::array())) values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    auto results = run_sweep(axis, values, base);
    Output out(g.out_path);
    write_sweep_csv(out.stream(), axis, results, base.s);
    return 0;
}

int cmd_ft_table(const Globals& g) {
    const json j = load_config(g.config_path);
    std::vector<std::string> names = j.value("activations", std::vector<std::string>{"sine", "cosine", "tanh", "sigmoid"});
    const json xi = j.value("xi", json::object());
    const double lo = xi.value("lo", -2.0), hi = xi.value("hi", 2.0);
    const auto points = xi.value("points", std::size_t{81});
    const FtOptions ft = ft_options_from_json(j.value("ft", json::object()));
    const auto grid = uniform_grid(points, lo, hi);

    Output out(g.out_path);
    CsvWriter w(out.stream());
    w.row({"activation", "xi", "re", "im", "re_plus", "re_minus", "im_plus", "im_minus", "kind"});
    for (const std::string& name : names) {
        const Activation a = parse_activation(name);
        const FourierDecomposition d = fourier_decomposition(a, ft);
        const std::string label = activation_spec(a);
        // Atoms first, one row per atom with its weight in the owning column.
        for (Axis axis : kAxes)
            for (const Atom& atom : d[axis].atoms) {
                double parts[4] = {0, 0, 0, 0};
                parts[static_cast<int>(axis)] = atom.weight;
                w.row({label, csv_number(atom.xi), csv_number(parts[0] - parts[1]), csv_number(parts[2] - parts[3]),
                       csv_number(parts[0]), csv_number(parts[1]), csv_number(parts[2]), csv_number(parts[3]),
                       "atom"});
            }
        const bool any_density = std::any_of(d.components.begin(), d.components.end(),
                                              [](const FourierComponent& c) { return !c.density.empty(); });
        if (!any_density) continue;
        for (double x : grid) {
            double parts[4];
            for (Axis axis : kAxes) parts[static_cast<int>(axis)] = d[axis].density(x);
            w.row({label, csv_number(x), csv_number(parts[0] - parts[1]), csv_number(parts[2] - parts[3]),
                   csv_number(parts[0]), csv_number(parts[1]), csv_number(parts[2]), csv_number(parts[3]),
                   "density"});
        }
    }
    return 0;
}

LayeredNetwork network_from_json(const json& j, std::uint64_t seed) {
    LayeredNetwork net;
    const auto acts = j.at("activations").get<std::vector<std::string>>();
    if (j.contains("layers")) {
        net.input_dim = j.at("input_dim").get<int>();
        const json& layers = j.at("layers");
        require(layers.size() == acts.size(), ErrorCode::ConfigError, "one activation per layer");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            DenseLayer l;
            const auto W = layers[i].at("W").get<std::vector<std::vector<double>>>();
            const auto b = layers[i].at("b").get<std::vector<double>>();
            require(!W.empty(), ErrorCode::ConfigError, "empty weight matrix");
            l.W.resize(static_cast<Eigen::Index>(W.size()), static_cast<Eigen::Index>(W[0].size()));
            for (std::size_t r = 0; r < W.size(); ++r) {
                require(W[r].size() == W[0].size(), ErrorCode::ConfigError, "ragged weight matrix");
                for (std::size_t c = 0; c < W[r].size(); ++c)
                    l.W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = W[r][c];
            }
            l.b = Eigen::Map<const VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
            l.f = parse_activation(acts[i]);
            net.layers.push_back(std::move(l));
        }
    } else {
        const auto dims = j.at("dims").get<std::vector<int>>();
        require(dims.size() == acts.size() + 1, ErrorCode::ConfigError, "dims must have one more entry than activations");
        const json init = j.value("init", json::object());
        const double scale = init.value("scale", 1.0);
        const double bias_scale = init.value("bias_scale", 0.5);
        Rng rng = make_rng(seed, {0x1417});
        net.input_dim = dims[0];
        for (std::size_t i = 0; i < acts.size(); ++i) {
            DenseLayer l;
            l.W.resize(dims[i + 1], dims[i]);
            l.b.resize(dims[i + 1]);
            for (int r = 0; r < dims[i + 1]; ++r) {
                for (int c = 0; c < dims[i]; ++c) l.W(r, c) = scale * standard_normal(rng) / std::sqrt(static_cast<double>(dims[i]));
                l.b[r] = bias_scale * standard_normal(rng);
            }
            l.f = parse_activation(acts[i]);
            net.layers.push_back(std::move(l));
        }
    }
    net.validate();
    return net;
}

int cmd_bundle(const Globals& g) {
    const json j = load_config(g.config_path);
    const std::uint64_t seed = pick_seed(g, j);
    LayeredNetwork net;
    try {
        net = network_from_json(j.at("network"), seed);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
    std::vector<int> ms = j.contains("m") ? (j.at("m").is_array() ? j.at("m").get<std::vector<int>>()
                                                                   : std::vector<int>{j.at("m").get<int>()})
                                          : std::vector<int>{64, 256};
    const FtOptions ft = ft_options_from_json(j.value("ft", json::object()));
    UrfConfig base;
    base.A = j.value("A", 0.0);
    const int probes = j.value("probes", 50);
    const double radius = j.value("probe_radius", 0.5);
    require(probes >= 1 && radius > 0.0, ErrorCode::ConfigError, "bad probe settings");

    Rng prng = make_rng(seed, {0x9b0e});
    std::vector<VectorXd> xs;
    for (int i = 0; i < probes; ++i) {
        VectorXd x(net.input_dim);
        for (int k = 0; k < net.input_dim; ++k) x[k] = standard_normal(prng);
        x *= radius * uniform01(prng) / x.norm();
        xs.push_back(x);
    }

    std::vector<BundledNetwork> built(ms.size());
    std::vector<double> mae(ms.size());
    parallel_for(ms.size(), g.threads, [&](std::size_t i) {
        UrfConfig c = base;
        c.m = ms[i];
        c.seed = derive_seed(seed, {0xb, static_cast<std::uint64_t>(ms[i])});
        built[i] = bundle_full(net, c, ft);
        double acc = 0.0;
        for (const VectorXd& x : xs) acc += (bundled_forward(x, built[i]) - net.forward(x)).cwiseAbs().mean();
        mae[i] = acc / static_cast<double>(xs.size());
    });

    Output out(g.out_path);
    CsvWriter w(out.stream());
    w.row({"m", "features", "layer_count_before", "layer_count_after", "params_before", "params_after", "probe_mae",
           "flops_before", "flops_after"});
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const FlopCount f = flop_count(built[i], net);
        w.row({std::to_string(ms[i]), std::to_string(built[i].w_bar.cols()), std::to_string(net.layers.size()), "0",
               std::to_string(net.parameter_count()), std::to_string(built[i].parameter_count()), csv_number(mae[i]),
               csv_number(f.original), csv_number(f.bundled)});
    }
    if (j.contains("artifact")) {
        Output art(j.at("artifact").get<std::string>());
        art.stream() << to_json(built.back(), ft).dump() << "\n";
    }
    return 0;
}

int cmd_train(const Globals& g) {
    const json j = load_config(g.config_path);
    const std::uint64_t seed = pick_seed(g, j);
    const json dj = j.value("data", json::object());
    const json lj = j.value("layer", json::object());
    const json tj = j.value("train", json::object());

    Dataset all = generate_blobs(dj.value("n", 400), dj.value("d", 2), dj.value("k", 2),
                                 dj.value("separation", 10.0), derive_seed(seed, {1}));
    const double scale = dj.value("scale", 1.0);
    require(scale > 0.0, ErrorCode::ConfigError, "data.scale must be positive");
    all.X *= scale;
    auto [train, validation] = train_validation_split(all, dj.value("validation_fraction", 0.25), derive_seed(seed, {2}));

    TrainConfig tc;
    tc.learning_rate = tj.value("learning_rate", tc.learning_rate);
    tc.epochs = tj.value("epochs", tc.epochs);
    tc.batch_size = tj.value("batch_size", tc.batch_size);
    tc.l2 = tj.value("l2", tc.l2);
    tc.momentum = tj.value("momentum", tc.momentum);
    const std::string loss = tj.value("loss", std::string("cross_entropy"));
    require(loss == "mse" || loss == "cross_entropy", ErrorCode::ConfigError, "loss must be 'mse' or 'cross_entropy'");
    tc.loss = loss == "mse" ? Loss::MSE : Loss::CrossEntropy;
    tc.seed = derive_seed(seed, {3});

    const bool use_head = j.value("head", false);
    const int k = all.classes;
    const int l = use_head ? lj.value("l", 16) : k;
    const std::string kind = lj.value("kind", std::string("relu"));
    SnnkLayer layer;
    if (kind == "relu") {
        layer = learnable_relu_layer(static_cast<int>(all.X.cols()), l, lj.value("features", 64), derive_seed(seed, {4}),
                                     derive_seed(seed, {5}));
    } else if (kind == "urf") {
        UrfConfig uc;
        uc.m = lj.value("m", 16);
        uc.A = lj.value("A", uc.A);
        uc.seed = derive_seed(seed, {4});
        layer = learnable_urf_layer(parse_activation(lj.value("activation", std::string("cosine"))),
                                    static_cast<int>(all.X.cols()), l, uc, derive_seed(seed, {5}),
                                    ft_options_from_json(lj.value("ft", json::object())));
    } else {
        throw Error(ErrorCode::ConfigError, "layer kind must be 'relu' or 'urf'");
    }
    std::optional<AffineHead> head;
    if (use_head) head = AffineHead::random(k, l, derive_seed(seed, {6}));
    if (tc.batch_size > train.size()) tc.batch_size = static_cast<int>(train.size());

    FitResult fit = fit_A(layer, head, train, tc, &validation);
    Output out(g.out_path);
    CsvWriter w(out.stream());
    w.row({"epoch", "split", "loss", "accuracy"});
    for (const EpochRecord& r : fit.history)
        w.row({std::to_string(r.epoch), split_name(r.split), csv_number(r.loss), csv_number(r.accuracy)});
    if (j.contains("layer_out")) {
        Output lo(j.at("layer_out").get<std::string>());
        lo.stream() << to_json(fit.layer).dump() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scalable neural network kernels: estimation, sweeps, FT tables, bundling and training"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed_value = 0;
    app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed_value, "Base seed (overrides the config)");
    app.add_option("--out", g.out_path, "CSV output path (default: stdout)");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const Globals&);
    };
    const Sub subs[] = {
        {"estimate", "Pointwise kernel estimation benchmark", cmd_estimate},
        {"sweep", "Estimation benchmark swept over A, strategy or activation", cmd_sweep},
        {"ft-table", "Tabulate Fourier decompositions", cmd_ft_table},
        {"bundle", "Bundle a layered network and report compression", cmd_bundle},
        {"train", "Train a learnable feature-weight layer on synthetic blobs", cmd_train},
    };
    std::vector<CLI::App*> handles;
    for (const Sub& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->fallthrough();
        handles.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) g.seed = seed_value;

    try {
        for (std::size_t i = 0; i < handles.size(); ++i)
            if (handles[i]->parsed()) return subs[i].run(g);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::ConfigError ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
