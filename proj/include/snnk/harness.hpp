// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "snnk/arc_cosine.hpp"
#include "snnk/error.hpp"
#include "snnk/fourier.hpp"
#include "snnk/layer.hpp"
#include "snnk/random.hpp"
#include "snnk/urf.hpp"

namespace snnk {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index owns its
// output slot, so results never depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex lock;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> g(lock);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180 quoting)

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) os_ << ',';
            os_ << csv_field(fields[i]);
        }
        os_ << "\r\n";
    }

private:
    std::ostream& os_;
};

// ---------------------------------------------------------------------------
// Pointwise estimation benchmark

enum class EstimateVariant { Urf, ArcCosine };

struct EstimateConfig {
    std::string activation = "sine";
    EstimateVariant variant = EstimateVariant::Urf;
    int d = 200;
    int l = 1;
    double b = 0.5;
    std::vector<int> p = {8, 16, 32, 64, 128, 256, 512};
    int s = 100;
    std::uint64_t seed = 0;
    double A = 0.0;
    SamplingStrategy strategy = SamplingStrategy::Iid;
    int block_size = 1;
    bool tie_inputs = false;  // w = x (arc-cosine target |x|^2)
    int threads = 1;
    FtOptions ft;

    void validate() const {
        require(d >= 1 && l >= 1, ErrorCode::ConfigError, "d and l must be positive");
        require(!p.empty(), ErrorCode::ConfigError, "feature count list is empty");
        for (int v : p) require(v >= 1, ErrorCode::ConfigError, "feature counts must be >= 1");
        require(s >= 2, ErrorCode::ConfigError, "need at least two instantiations");
        require(A <= 0.0, ErrorCode::ConfigError, "A must be <= 0");
        require(std::isfinite(b), ErrorCode::ConfigError, "bias must be finite");
        if (variant == EstimateVariant::Urf) parse_activation(activation);
    }
};

struct EstimateRow {
    int p = 0;         // requested feature count
    int features = 0;  // total feature length actually used
    int trial = 0;
    int unit = 0;      // output coordinate
    double estimate = 0.0;
    double exact = 0.0;
    double rel_error = 0.0;
};

struct EstimateSummary {
    int p = 0;
    int features = 0;
    double mean_rel_error = 0.0;
    double std_rel_error = 0.0;
    double se_rel_error = 0.0;
    double mean_estimate = 0.0;
    double mean_exact = 0.0;
};

struct EstimateReport {
    std::string label;
    int d = 0;
    std::vector<EstimateRow> rows;  // sorted by (p, trial, unit)
    std::vector<EstimateSummary> summary;
};

inline double relative_error(double estimate, double exact) {
    return std::abs(estimate - exact) / std::max(std::abs(exact), 1e-12);
}

namespace detail {

// Inputs: scale * Uniform(0, 1) entries with scale 1/sqrt(d).
inline VectorXd uniform_input(int d, Rng& rng) {
    VectorXd v(d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (int k = 0; k < d; ++k) v[k] = scale * uniform01(rng);
    return v;
}

}  // namespace detail

inline EstimateReport run_pointwise(const EstimateConfig& cfg) {
    cfg.validate();
    EstimateReport rep;
    rep.d = cfg.d;
    const bool arc = cfg.variant == EstimateVariant::ArcCosine;
    rep.label = arc ? "arc_cosine" : cfg.activation;
    FourierDecomposition decomp;
    Activation act;
    std::size_t axes = 1;
    if (!arc) {
        act = parse_activation(cfg.activation);
        decomp = fourier_decomposition(act, cfg.ft);
        axes = decomp.active_axes().size();
    }

    struct Job {
        int p, m, trial;
    };
    std::vector<Job> jobs;
    for (int p : cfg.p) {
        const int m = arc ? p : std::max(1, p / static_cast<int>(axes));
        for (int t = 0; t < cfg.s; ++t) jobs.push_back({p, m, t});
    }
    std::vector<std::vector<EstimateRow>> out(jobs.size());

    parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
        const Job& job = jobs[j];
        // Inputs depend only on the trial, so every p sees the same targets.
        Rng in_rng = make_rng(cfg.seed, {0x1d, static_cast<std::uint64_t>(job.trial)});
        VectorXd x = detail::uniform_input(cfg.d, in_rng);
        MatrixXd W(cfg.l, cfg.d);
        for (int i = 0; i < cfg.l; ++i) W.row(i) = cfg.tie_inputs ? x.transpose() : detail::uniform_input(cfg.d, in_rng).transpose();
        const std::uint64_t feat_seed =
            derive_seed(cfg.seed, {0xfe, static_cast<std::uint64_t>(job.p), static_cast<std::uint64_t>(job.trial)});
        VectorXd est, exact(cfg.l);
        int features = 0;
        if (arc) {
            SnnkLayer layer = relu_snnk_from_weights(W, job.m, feat_seed);
            est = snnk_forward(x, layer);
            features = layer.feature_dim();
            for (int i = 0; i < cfg.l; ++i) exact[i] = arc_cosine_exact(1, W.row(i).transpose(), x);
        } else {
            UrfConfig uc;
            uc.m = job.m;
            uc.A = cfg.A;
            uc.strategy = cfg.strategy;
            uc.block_size = cfg.strategy == SamplingStrategy::Block ? std::min(cfg.block_size, job.m) : 1;
            if (cfg.strategy == SamplingStrategy::Block && job.m % uc.block_size != 0) uc.block_size = 1;
            uc.seed = feat_seed;
            UrfDraws draws = sample_draws(decomp, uc, cfg.d);
            FeatureVector px = phi(x, draws);
            est.resize(cfg.l);
            for (int i = 0; i < cfg.l; ++i)
                est[i] = kernel_estimate(px, psi(VectorXd(W.row(i).transpose()), cfg.b, draws)).value;
            features = static_cast<int>(draws.feature_length());
            exact = ffl_forward(x, FflSpec{W, VectorXd::Constant(cfg.l, cfg.b), act});
        }
        for (int i = 0; i < cfg.l; ++i)
            out[j].push_back({job.p, features, job.trial, i, est[i], exact[i], relative_error(est[i], exact[i])});
    });

    for (auto& v : out)
        for (auto& r : v) rep.rows.push_back(r);

    for (int p : cfg.p) {
        EstimateSummary s;
        s.p = p;
        std::vector<double> errs;
        for (const auto& r : rep.rows)
            if (r.p == p) {
                errs.push_back(r.rel_error);
                s.features = r.features;
                s.mean_estimate += r.estimate;
                s.mean_exact += r.exact;
            }
        const double n = static_cast<double>(errs.size());
        for (double e : errs) s.mean_rel_error += e;
        s.mean_rel_error /= n;
        s.mean_estimate /= n;
        s.mean_exact /= n;
        double var = 0.0;
        for (double e : errs) var += (e - s.mean_rel_error) * (e - s.mean_rel_error);
        s.std_rel_error = std::sqrt(var / (n - 1.0));
        s.se_rel_error = s.std_rel_error / std::sqrt(n);
        rep.summary.push_back(s);
    }
    return rep;
}

// Least-squares slope of log(mean_rel_error) against log(p).
inline double loglog_slope(const EstimateReport& rep) {
    std::vector<double> lx, ly;
    for (const auto& s : rep.summary) {
        lx.push_back(std::log(static_cast<double>(s.features)));
        ly.push_back(std::log(s.mean_rel_error));
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

inline const std::vector<std::string>& summary_header() {
    static const std::vector<std::string> h = {"activation", "d",   "p",
                                               "features",   "trials", "mean_rel_error",
                                               "std_rel_error", "se_rel_error"};
    return h;
}

inline std::vector<std::string> summary_fields(const EstimateReport& rep, const EstimateSummary& s, int trials) {
    return {rep.label,
            std::to_string(rep.d),
            std::to_string(s.p),
            std::to_string(s.features),
            std::to_string(trials),
            csv_number(s.mean_rel_error),
            csv_number(s.std_rel_error),
            csv_number(s.se_rel_error)};
}

inline void write_summary_csv(std::ostream& os, const EstimateReport& rep, int trials) {
    CsvWriter w(os);
    w.row(summary_header());
    for (const auto& s : rep.summary) w.row(summary_fields(rep, s, trials));
}

inline void write_trials_csv(std::ostream& os, const EstimateReport& rep) {
    CsvWriter w(os);
    w.row({"activation", "d", "p", "features", "trial", "unit", "estimate", "exact", "rel_error"});
    for (const auto& r : rep.rows)
        w.row({rep.label, std::to_string(rep.d), std::to_string(r.p), std::to_string(r.features),
               std::to_string(r.trial), std::to_string(r.unit), csv_number(r.estimate),
               csv_number(r.exact), csv_number(r.rel_error)});
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { A, Strategy, Activation };

inline const char* sweep_axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::A: return "A";
        case SweepAxis::Strategy: return "strategy";
        case SweepAxis::Activation: return "activation";
    }
    return "?";
}

inline SamplingStrategy parse_strategy(const std::string& s, int* block_size = nullptr) {
    if (s == "iid") return SamplingStrategy::Iid;
    if (s.rfind("block", 0) == 0) {
        if (block_size && s.size() > 6 && s[5] == ':') *block_size = std::stoi(s.substr(6));
        return SamplingStrategy::Block;
    }
    throw Error(ErrorCode::ConfigError, "unknown strategy '" + s + "'");
}

struct SweepResult {
    std::string value;
    EstimateReport report;
};

inline std::vector<SweepResult> run_sweep(SweepAxis axis, const std::vector<std::string>& values,
                                          const EstimateConfig& base) {
    require(!values.empty(), ErrorCode::ConfigError, "sweep values are empty");
    std::vector<SweepResult> out;
    for (const std::string& v : values) {
        EstimateConfig cfg = base;
        switch (axis) {
            case SweepAxis::A:
                try {
                    cfg.A = std::stod(v);
                } catch (const std::exception&) {
                    throw Error(ErrorCode::ConfigError, "bad A value '" + v + "'");
                }
                break;
            case SweepAxis::Strategy: cfg.strategy = parse_strategy(v, &cfg.block_size); break;
            case SweepAxis::Activation:
                if (v == "arc_cosine") {
                    cfg.variant = EstimateVariant::ArcCosine;
                } else {
                    cfg.variant = EstimateVariant::Urf;
                    cfg.activation = v;
                }
                break;
        }
        out.push_back({v, run_pointwise(cfg)});
    }
    return out;
}

inline void write_sweep_csv(std::ostream& os, SweepAxis axis, const std::vector<SweepResult>& results,
                            int trials) {
    CsvWriter w(os);
    std::vector<std::string> header = {"sweep", "value"};
    for (const auto& h : summary_header()) header.push_back(h);
    w.row(header);
    for (const auto& r : results)
        for (const auto& s : r.report.summary) {
            std::vector<std::string> f = {sweep_axis_name(axis), r.value};
            for (auto& x : summary_fields(r.report, s, trials)) f.push_back(x);
            w.row(f);
        }
}

}  // namespace snnk
