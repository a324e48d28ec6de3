// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "snnk/error.hpp"
#include "snnk/fourier.hpp"
#include "snnk/random.hpp"

// Universal random features. For a decomposition of FT_f into four nonnegative
// parts with masses |c_j|,
//   f(w^T x + b) = E[ Phi(x)^T Psi(w, b) ]
// with Phi entries (1/sqrt m) Lambda_g(2 pi i xi x) and Psi entries
// (1/sqrt m) c_j r exp(2 pi i xi b) Lambda_g(w), where
//   Lambda_g(z) = (1-4A)^{d/4} exp(A |g|^2 + sqrt(1-4A) g^T z - z^T z / 2)
// and z^T z is the bilinear square. All products are bilinear (no conjugation).

namespace snnk {

using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct Proposal {
    enum class Kind { Exact, Gaussian, GridCategorical };
    Kind kind = Kind::Exact;
    double sigma = 0.0;  // Gaussian scale; 0 selects the density's second moment

    static Proposal exact() { return {Kind::Exact, 0.0}; }
    static Proposal gaussian(double sigma = 0.0) { return {Kind::Gaussian, sigma}; }
    static Proposal grid_categorical() { return {Kind::GridCategorical, 0.0}; }
};

enum class SamplingStrategy { Iid, Block };
enum class AtomMode { Sample, Concat };

// rho(xi) = 2 pi i xi on the input side and eta(xi) = 1 on the parameter side
// are fixed; every other knob lives here.
struct UrfConfig {
    int m = 16;
    double A = -0.1;
    std::array<Proposal, 4> proposals{};
    SamplingStrategy strategy = SamplingStrategy::Iid;
    int block_size = 1;
    AtomMode atom_mode = AtomMode::Sample;
    std::uint64_t seed = 0;

    void validate() const {
        require(m >= 1, ErrorCode::InvalidArgument, "m must be >= 1");
        require(A <= 0.0 && std::isfinite(A), ErrorCode::InvalidArgument, "A must be <= 0");
        if (strategy == SamplingStrategy::Block)
            require(block_size >= 1 && m % block_size == 0, ErrorCode::InvalidArgument,
                    "block_size must divide m");
    }
};

// One group of m draws sharing an axis (and, in concat mode, a fixed atom).
struct DrawBlock {
    Axis axis = Axis::RePlus;
    int atom = -1;             // atom index for concat blocks, -1 for sampled blocks
    cdouble coefficient;       // c_j for sampled blocks, s_j * atom weight for concat blocks
    std::vector<double> xi;    // m frequencies
    std::vector<double> ratio; // m importance ratios p / p_bar
    MatrixXd g;                // m x d Gaussian directions
    VectorXd g_norm2;          // |g_i|^2
};

struct UrfDraws {
    int input_dim = 0;
    int m = 0;
    double A = 0.0;
    std::vector<DrawBlock> blocks;

    std::size_t feature_length() const { return blocks.size() * static_cast<std::size_t>(m); }
};

struct LayoutSlice {
    Axis axis = Axis::RePlus;
    int atom = -1;
    std::size_t offset = 0;
    std::size_t length = 0;
    bool operator==(const LayoutSlice&) const = default;
};

using Layout = std::vector<LayoutSlice>;

struct FeatureVector {
    VectorXcd entries;
    Layout layout;

    std::size_t size() const { return static_cast<std::size_t>(entries.size()); }
};

inline Layout layout_of(const UrfDraws& draws) {
    Layout out;
    std::size_t offset = 0;
    for (const DrawBlock& b : draws.blocks) {
        out.push_back({b.axis, b.atom, offset, static_cast<std::size_t>(draws.m)});
        offset += static_cast<std::size_t>(draws.m);
    }
    return out;
}

// ---------------------------------------------------------------------------

inline cdouble lambda_feature(const VectorXd& g, const VectorXcd& z, double A) {
    require(g.size() == z.size(), ErrorCode::ShapeMismatch, "g and z dimensions differ");
    require(A <= 0.0, ErrorCode::InvalidArgument, "A must be <= 0");
    const double d = static_cast<double>(g.size());
    const double s = std::sqrt(1.0 - 4.0 * A);
    cdouble gz = 0.0, zz = 0.0;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        gz += g[k] * z[k];
        zz += z[k] * z[k];
    }
    return std::pow(1.0 - 4.0 * A, d / 4.0) * std::exp(A * g.squaredNorm() + s * gz - 0.5 * zz);
}

namespace detail {

inline double gaussian_pdf(double x, double sigma) {
    return std::exp(-0.5 * (x / sigma) * (x / sigma)) / (sigma * std::sqrt(2.0 * kPi));
}

inline double density_second_moment(const DensityTable& d) {
    const auto& g = d.grid();
    const auto& v = d.values();
    double acc = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i)
        acc += 0.5 * (g[i] * g[i] * v[i] + g[i - 1] * g[i - 1] * v[i - 1]) * (g[i] - g[i - 1]);
    return acc / d.mass();
}

inline double proposal_sigma(const Proposal& p, const DensityTable& d) {
    if (p.sigma > 0.0) return p.sigma;
    return std::sqrt(density_second_moment(d));
}

// Draw one (xi, ratio) from the mixture atoms + density of a component.
inline std::pair<double, double> draw_frequency(const FourierComponent& c, const Proposal& p,
                                                Rng& rng) {
    const double atom_mass = c.atom_mass();
    const double dens_mass = c.density_mass();
    const double total = atom_mass + dens_mass;
    double u = uniform01(rng);
    if (u * total < atom_mass || dens_mass == 0.0) {
        double target = uniform01(rng) * atom_mass;
        double acc = 0.0;
        for (const Atom& a : c.atoms) {
            acc += a.weight;
            if (target < acc) return {a.xi, 1.0};
        }
        return {c.atoms.back().xi, 1.0};
    }
    const DensityTable& d = c.density;
    switch (p.kind) {
        case Proposal::Kind::Exact: return {d.sample(uniform01(rng)), 1.0};
        case Proposal::Kind::Gaussian: {
            double sigma = proposal_sigma(p, d);
            double xi = sigma * standard_normal(rng);
            double r = d(xi) / (dens_mass * gaussian_pdf(xi, sigma));
            // Outside the support the Psi entry vanishes; park xi at 0 so the
            // paired Phi entry stays bounded.
            if (r == 0.0) xi = 0.0;
            return {xi, r};
        }
        case Proposal::Kind::GridCategorical: {
            const auto& cum = d.cumulative();
            double target = uniform01(rng) * dens_mass;
            auto it = std::upper_bound(cum.begin(), cum.end(), target);
            std::size_t cell = std::clamp<std::size_t>(static_cast<std::size_t>(it - cum.begin()), 1,
                                                       cum.size() - 1) -
                               1;
            while (d.cell_mass(cell) == 0.0 && cell + 1 < cum.size() - 1) ++cell;
            double lo = d.grid()[cell], hi = d.grid()[cell + 1];
            double xi = lo + uniform01(rng) * (hi - lo);
            double r = d(xi) * (hi - lo) / d.cell_mass(cell);
            return {xi, r};
        }
    }
    return {0.0, 0.0};
}

inline void fill_gaussian(DrawBlock& b, int m, int d, Rng& rng) {
    b.g.resize(m, d);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < d; ++k) b.g(i, k) = standard_normal(rng);
    b.g_norm2 = b.g.rowwise().squaredNorm();
}

}  // namespace detail

inline UrfDraws sample_draws(const FourierDecomposition& decomp, const UrfConfig& cfg, int input_dim) {
    cfg.validate();
    require(input_dim >= 1, ErrorCode::InvalidArgument, "input dimension must be >= 1");
    UrfDraws draws;
    draws.input_dim = input_dim;
    draws.m = cfg.m;
    draws.A = cfg.A;

    for (Axis axis : kAxes) {
        const FourierComponent& comp = decomp[axis];
        if (comp.is_zero()) continue;
        const auto j = static_cast<std::uint64_t>(axis);
        const Proposal& prop = cfg.proposals[static_cast<int>(axis)];

        if (cfg.atom_mode == AtomMode::Concat) {
            require(comp.is_atomic(), ErrorCode::NotAtomic,
                    "concat mode needs a purely atomic decomposition");
            for (std::size_t k = 0; k < comp.atoms.size(); ++k) {
                DrawBlock b;
                b.axis = axis;
                b.atom = static_cast<int>(k);
                b.coefficient = axis_sign(axis) * comp.atoms[k].weight;
                b.xi.assign(static_cast<std::size_t>(cfg.m), comp.atoms[k].xi);
                b.ratio.assign(static_cast<std::size_t>(cfg.m), 1.0);
                Rng grng = make_rng(cfg.seed, {2, j, k});
                detail::fill_gaussian(b, cfg.m, input_dim, grng);
                draws.blocks.push_back(std::move(b));
            }
            continue;
        }

        if (prop.kind != Proposal::Kind::Exact)
            require(!comp.is_atomic(), ErrorCode::ProposalMismatch,
                    std::string("continuous proposal cannot reach the atoms of ") + axis_name(axis));
        if (prop.kind == Proposal::Kind::Gaussian && !comp.density.empty())
            require(detail::proposal_sigma(prop, comp.density) > 0.0, ErrorCode::ProposalMismatch,
                    "degenerate Gaussian proposal");

        DrawBlock b;
        b.axis = axis;
        b.coefficient = decomp.coefficient(axis);
        b.xi.resize(static_cast<std::size_t>(cfg.m));
        b.ratio.resize(static_cast<std::size_t>(cfg.m));
        Rng xrng = make_rng(cfg.seed, {1, j, 0});
        const int block = cfg.strategy == SamplingStrategy::Block ? cfg.block_size : 1;
        for (int i = 0; i < cfg.m; i += block) {
            auto [xi, r] = detail::draw_frequency(comp, prop, xrng);
            for (int t = 0; t < block; ++t) {
                b.xi[static_cast<std::size_t>(i + t)] = xi;
                b.ratio[static_cast<std::size_t>(i + t)] = r;
            }
        }
        Rng grng = make_rng(cfg.seed, {2, j, 0});
        detail::fill_gaussian(b, cfg.m, input_dim, grng);
        draws.blocks.push_back(std::move(b));
    }
    require(!draws.blocks.empty(), ErrorCode::InvalidArgument, "decomposition has no mass");
    return draws;
}

// ---------------------------------------------------------------------------
// Feature maps

namespace detail {

// Lambda_g(rho * v) for every row g of the block, with v given by its real and
// imaginary parts (complex inputs arise when feature maps are chained).
template <typename RhoFn>
inline void lambda_block(const DrawBlock& b, const UrfDraws& draws, const VectorXd& v_re,
                         const VectorXd& v_im, cdouble vv, RhoFn rho, cdouble* out) {
    const double A = draws.A;
    const double d = static_cast<double>(draws.input_dim);
    const double pref = std::pow(1.0 - 4.0 * A, d / 4.0);
    const double s = std::sqrt(1.0 - 4.0 * A);
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(draws.m));
    VectorXd gr = b.g * v_re;
    VectorXd gi = v_im.size() ? VectorXd(b.g * v_im) : VectorXd::Zero(b.g.rows());
    for (Eigen::Index i = 0; i < b.g.rows(); ++i) {
        const cdouble r = rho(b.xi[static_cast<std::size_t>(i)]);
        const cdouble gv(gr[i], gi[i]);
        const cdouble expo = A * b.g_norm2[i] + s * r * gv - 0.5 * r * r * vv;
        out[i] = inv_sqrt_m * (pref * std::exp(expo));
    }
}

inline cdouble bilinear_square(const VectorXd& re, const VectorXd& im) {
    if (im.size() == 0) return {re.squaredNorm(), 0.0};
    return {re.squaredNorm() - im.squaredNorm(), 2.0 * re.dot(im)};
}

}  // namespace detail

inline FeatureVector phi(const VectorXcd& x, const UrfDraws& draws) {
    require(x.size() == draws.input_dim, ErrorCode::ShapeMismatch, "phi input dimension mismatch");
    FeatureVector fv;
    fv.entries.resize(static_cast<Eigen::Index>(draws.feature_length()));
    fv.layout = layout_of(draws);
    VectorXd re = x.real(), im = x.imag();
    const bool real_input = im.isZero(0.0);
    if (real_input) im.resize(0);
    const cdouble xx = detail::bilinear_square(re, im);
    auto rho = [](double xi) { return cdouble(0.0, 2.0 * kPi * xi); };
    for (std::size_t k = 0; k < draws.blocks.size(); ++k)
        detail::lambda_block(draws.blocks[k], draws, re, im, xx, rho,
                             fv.entries.data() + k * static_cast<std::size_t>(draws.m));
    return fv;
}

inline FeatureVector phi(const VectorXd& x, const UrfDraws& draws) {
    return phi(VectorXcd(x.cast<cdouble>()), draws);
}

inline FeatureVector psi(const VectorXcd& w, double bias, const UrfDraws& draws) {
    require(w.size() == draws.input_dim, ErrorCode::ShapeMismatch, "psi input dimension mismatch");
    FeatureVector fv;
    fv.entries.resize(static_cast<Eigen::Index>(draws.feature_length()));
    fv.layout = layout_of(draws);
    VectorXd re = w.real(), im = w.imag();
    const bool real_input = im.isZero(0.0);
    if (real_input) im.resize(0);
    const cdouble ww = detail::bilinear_square(re, im);
    auto eta = [](double) { return cdouble(1.0, 0.0); };
    for (std::size_t k = 0; k < draws.blocks.size(); ++k) {
        const DrawBlock& b = draws.blocks[k];
        cdouble* out = fv.entries.data() + k * static_cast<std::size_t>(draws.m);
        detail::lambda_block(b, draws, re, im, ww, eta, out);
        for (int i = 0; i < draws.m; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const cdouble shift = b.ratio[ii] * std::polar(1.0, 2.0 * kPi * b.xi[ii] * bias);
            out[i] = (b.coefficient * shift) * out[i];
        }
    }
    return fv;
}

inline FeatureVector psi(const VectorXd& w, double bias, const UrfDraws& draws) {
    return psi(VectorXcd(w.cast<cdouble>()), bias, draws);
}

struct KernelEstimate {
    double value = 0.0;  // Re <px, pw>
    double imag = 0.0;   // diagnostic; zero in expectation
};

// Real part of the bilinear product, accumulated as sum(re*re) then
// sum(-im*im). Layer forward passes use the same order.
inline double realified_dot(const cdouble* a, const cdouble* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += a[k].real() * b[k].real();
    for (std::size_t k = 0; k < n; ++k) acc += (-a[k].imag()) * b[k].imag();
    return acc;
}

inline KernelEstimate kernel_estimate(const FeatureVector& px, const FeatureVector& pw) {
    require(px.layout == pw.layout && px.entries.size() == pw.entries.size(),
            ErrorCode::LayoutMismatch, "feature layouts differ");
    KernelEstimate k;
    const auto n = px.size();
    k.value = realified_dot(px.entries.data(), pw.entries.data(), n);
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        im += px.entries[static_cast<Eigen::Index>(i)].real() * pw.entries[static_cast<Eigen::Index>(i)].imag() +
              px.entries[static_cast<Eigen::Index>(i)].imag() * pw.entries[static_cast<Eigen::Index>(i)].real();
    k.imag = im;
    return k;
}

// Per-atom concatenated blocks (deterministic frequencies).
inline FeatureVector concat_phi(const VectorXd& x, const FourierDecomposition& d, UrfConfig cfg) {
    require(d.is_atomic(), ErrorCode::NotAtomic, "decomposition is not atomic");
    cfg.atom_mode = AtomMode::Concat;
    return phi(x, sample_draws(d, cfg, static_cast<int>(x.size())));
}

inline FeatureVector concat_psi(const VectorXd& w, double b, const FourierDecomposition& d,
                                UrfConfig cfg) {
    require(d.is_atomic(), ErrorCode::NotAtomic, "decomposition is not atomic");
    cfg.atom_mode = AtomMode::Concat;
    return psi(w, b, sample_draws(d, cfg, static_cast<int>(w.size())));
}

// ---------------------------------------------------------------------------
// A priori entry bounds for ||x||, ||w||, |b| <= R (finite only for A < 0).

struct FeatureBounds {
    double phi = 0.0;        // max |Phi entry|
    double psi = 0.0;        // max |Psi entry|
    double azuma_c = 0.0;    // bound on one summand X_i of the m-sample mean
};

inline double max_importance_ratio(const FourierComponent& c, const Proposal& p) {
    if (c.density.empty() || p.kind == Proposal::Kind::Exact) return 1.0;
    const auto& g = c.density.grid();
    const auto& v = c.density.values();
    double best = 1.0;  // atoms
    if (p.kind == Proposal::Kind::GridCategorical) {
        for (std::size_t i = 1; i < g.size(); ++i) {
            double cm = c.density.cell_mass(i - 1);
            if (cm > 0.0) best = std::max(best, std::max(v[i], v[i - 1]) * (g[i] - g[i - 1]) / cm);
        }
        return best;
    }
    double sigma = detail::proposal_sigma(p, c.density);
    for (std::size_t i = 1; i < g.size(); ++i) {
        double q = std::min(detail::gaussian_pdf(g[i], sigma), detail::gaussian_pdf(g[i - 1], sigma));
        double top = std::max(v[i], v[i - 1]);
        if (top > 0.0) best = std::max(best, top / (c.density_mass() * q));
    }
    return best;
}

inline double max_abs_frequency(const FourierComponent& c) {
    double f = 0.0;
    for (const Atom& a : c.atoms) f = std::max(f, std::abs(a.xi));
    if (!c.density.empty())
        f = std::max({f, std::abs(c.density.lower()), std::abs(c.density.upper())});
    return f;
}

inline FeatureBounds feature_entry_bounds(const FourierDecomposition& d, const UrfConfig& cfg,
                                          int input_dim, double radius) {
    cfg.validate();
    const double A = cfg.A;
    const double pref = std::pow(1.0 - 4.0 * A, input_dim / 4.0);
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(cfg.m));
    const double R2 = radius * radius;
    const double inf = std::numeric_limits<double>::infinity();
    FeatureBounds out;
    double c_sum = 0.0;
    for (Axis axis : kAxes) {
        const FourierComponent& comp = d[axis];
        if (comp.is_zero()) continue;
        const double xi_max = max_abs_frequency(comp);
        // |Lambda_g(2 pi i xi x)| = pref exp(A|g|^2 + 2 pi^2 xi^2 |x|^2)
        const double phi_b = inv_sqrt_m * pref * std::exp(2.0 * kPi * kPi * xi_max * xi_max * R2);
        // max_g A|g|^2 + sqrt(1-4A) g^T w = (1-4A)|w|^2 / (-4A)
        const double psi_exp = A < 0.0 ? R2 * ((1.0 - 4.0 * A) / (-4.0 * A) - 0.5) : inf;
        const double r_max = max_importance_ratio(comp, cfg.proposals[static_cast<int>(axis)]);
        double psi_b = 0.0;
        double blocks = 1.0;
        if (cfg.atom_mode == AtomMode::Concat) {
            for (const Atom& a : comp.atoms) psi_b = std::max(psi_b, a.weight);
            blocks = static_cast<double>(comp.atoms.size());
        } else {
            psi_b = comp.mass() * r_max;
        }
        psi_b *= inv_sqrt_m * pref * std::exp(std::max(psi_exp, 0.0));
        out.phi = std::max(out.phi, phi_b);
        out.psi = std::max(out.psi, psi_b);
        c_sum += blocks * static_cast<double>(cfg.m) * phi_b * psi_b;
    }
    out.azuma_c = c_sum;
    return out;
}

}  // namespace snnk
