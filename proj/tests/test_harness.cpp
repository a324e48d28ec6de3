// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "snnk/harness.hpp"

using namespace snnk;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    fs::path p = fs::temp_directory_path() / ("snnk_harness_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SNNK_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find("\r\n")); }

EstimateConfig small_estimate() {
    EstimateConfig c;
    c.d = 20;
    c.p = {8, 32};
    c.s = 12;
    c.seed = 5;
    return c;
}

}  // namespace

TEST(Csv, Quoting) {
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
    std::ostringstream os;
    CsvWriter w(os);
    w.row({"x", "y,z"});
    EXPECT_EQ(os.str(), "x,\"y,z\"\r\n");
}

TEST(Csv, NumbersRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(csv_number(v)), v);
    EXPECT_EQ(csv_number(std::nan("")), "nan");
    EXPECT_EQ(csv_number(-INFINITY), "-inf");
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                     if (i == 7) throw Error(ErrorCode::InvalidArgument, "boom");
                 }),
                 Error);
}

TEST(Pointwise, ThreadCountDoesNotChangeResults) {
    EstimateConfig c = small_estimate();
    auto one = run_pointwise(c);
    c.threads = 3;
    auto three = run_pointwise(c);
    ASSERT_EQ(one.rows.size(), three.rows.size());
    for (std::size_t i = 0; i < one.rows.size(); ++i) EXPECT_EQ(one.rows[i].estimate, three.rows[i].estimate);
}

TEST(Pointwise, RowsAndSummary) {
    EstimateConfig c = small_estimate();
    c.l = 2;
    auto rep = run_pointwise(c);
    EXPECT_EQ(rep.rows.size(), 2u * 12 * 2);
    ASSERT_EQ(rep.summary.size(), 2u);
    // sine has two active axes, so a budget of 8 means m = 4 per axis
    EXPECT_EQ(rep.summary[0].features, 8);
    for (const auto& r : rep.rows) {
        EXPECT_DOUBLE_EQ(r.rel_error, std::abs(r.estimate - r.exact) / std::abs(r.exact));
        EXPECT_GT(r.exact, 0.0);
    }
    double m = 0.0;
    for (const auto& r : rep.rows)
        if (r.p == 8) m += r.rel_error;
    EXPECT_NEAR(rep.summary[0].mean_rel_error, m / 24.0, 1e-12);
}

TEST(Pointwise, ArcCosineVariant) {
    EstimateConfig c = small_estimate();
    c.variant = EstimateVariant::ArcCosine;
    c.tie_inputs = true;
    auto rep = run_pointwise(c);
    for (const auto& r : rep.rows) EXPECT_GE(r.estimate, 0.0);
    EXPECT_EQ(rep.label, "arc_cosine");
}

TEST(Slope, RecoversPowerLaw) {
    EstimateReport rep;
    for (int f : {4, 16, 64, 256}) {
        EstimateSummary s;
        s.features = f;
        s.mean_rel_error = 3.0 * std::pow(f, -0.5);
        rep.summary.push_back(s);
    }
    EXPECT_NEAR(loglog_slope(rep), -0.5, 1e-12);
}

TEST(Sweep, StrategyParsing) {
    int k = 1;
    EXPECT_EQ(parse_strategy("block:4", &k), SamplingStrategy::Block);
    EXPECT_EQ(k, 4);
    EXPECT_EQ(parse_strategy("iid"), SamplingStrategy::Iid);
    EXPECT_THROW(parse_strategy("orthogonal"), Error);
    auto res = run_sweep(SweepAxis::A, {"0", "-0.05"}, small_estimate());
    ASSERT_EQ(res.size(), 2u);
    EXPECT_THROW(run_sweep(SweepAxis::A, {"x"}, small_estimate()), Error);
}

class CliExample : public ::testing::TestWithParam<std::pair<const char*, const char*>> {};

TEST_P(CliExample, RunsShippedConfig) {
    auto [name, header] = GetParam();
    fs::path dir = scratch_dir();
    fs::path cfg = fs::path(SNNK_CONFIG_DIR) / (std::string(name) + ".json");
    fs::path out = dir / (std::string(name) + ".csv");
    ASSERT_EQ(run_cli(std::string(name) + " --config " + cfg.string() + " --out " + out.string()), 0);
    EXPECT_EQ(first_line(slurp(out)), header);
}

INSTANTIATE_TEST_SUITE_P(
    Shipped, CliExample,
    ::testing::Values(
        std::make_pair("estimate", "activation,d,p,features,trials,mean_rel_error,std_rel_error,se_rel_error"),
        std::make_pair("sweep", "sweep,value,activation,d,p,features,trials,mean_rel_error,std_rel_error,se_rel_error"),
        std::make_pair("ft-table", "activation,xi,re,im,re_plus,re_minus,im_plus,im_minus,kind"),
        std::make_pair("bundle",
                       "m,features,layer_count_before,layer_count_after,params_before,params_after,probe_mae,"
                       "flops_before,flops_after"),
        std::make_pair("train", "epoch,split,loss,accuracy")));

TEST(Cli, ThreadsAndSeed) {
    fs::path dir = scratch_dir();
    fs::path cfg = dir / "small.json";
    std::ofstream(cfg) << R"({"activation": "tanh", "d": 10, "p": [8, 16], "s": 10, "A": -0.1})";
    fs::path a = dir / "a.csv", b = dir / "b.csv", c = dir / "c.csv";
    const std::string base = "estimate --config " + cfg.string() + " --seed 9";
    ASSERT_EQ(run_cli(base + " --threads 1 --out " + a.string()), 0);
    ASSERT_EQ(run_cli(base + " --threads 4 --out " + b.string()), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    ASSERT_EQ(run_cli("estimate --config " + cfg.string() + " --seed 10 --out " + c.string()), 0);
    EXPECT_NE(slurp(a), slurp(c));
}

TEST(Cli, ConfigErrorsExitWithTwo) {
    fs::path dir = scratch_dir();
    fs::path bad = dir / "bad.json";
    std::ofstream(bad) << R"({"variant": "fourier"})";
    EXPECT_EQ(run_cli("estimate --config " + bad.string()), 2);
    fs::path broken = dir / "broken.json";
    std::ofstream(broken) << "{ not json";
    EXPECT_EQ(run_cli("estimate --config " + broken.string()), 2);
    EXPECT_NE(run_cli("no-such-command"), 0);
}

TEST(Cli, TrainWritesLayer) {
    fs::path dir = scratch_dir();
    fs::path cfg = dir / "train.json";
    fs::path layer = dir / "layer.json";
    std::ofstream(cfg) << R"({"data": {"n": 60, "d": 2, "k": 2, "separation": 6, "scale": 0.1},
                             "layer": {"kind": "urf", "m": 4},
                             "train": {"epochs": 3}, "layer_out": ")"
                       << layer.string() << "\"}";
    fs::path out = dir / "train.csv";
    ASSERT_EQ(run_cli("train --config " + cfg.string() + " --out " + out.string()), 0);
    EXPECT_NE(slurp(layer).find("\"kind\":\"urf\""), std::string::npos);
    // header plus train and validation rows for epochs 0..3
    const std::string text = slurp(out);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 4);
}
