// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "snnk/activation.hpp"
#include "snnk/error.hpp"

// Fourier transforms of activations under the convention
//   FT_f(xi) = \int f(z) exp(-2 pi i xi z) dz,
// split into four nonnegative parts FT = RePlus - ReMinus + i ImPlus - i ImMinus.

namespace snnk {

using cdouble = std::complex<double>;

enum class Axis { RePlus = 0, ReMinus = 1, ImPlus = 2, ImMinus = 3 };

inline constexpr std::array<Axis, 4> kAxes = {Axis::RePlus, Axis::ReMinus, Axis::ImPlus,
                                              Axis::ImMinus};

inline const char* axis_name(Axis axis) {
    switch (axis) {
        case Axis::RePlus: return "re_plus";
        case Axis::ReMinus: return "re_minus";
        case Axis::ImPlus: return "im_plus";
        case Axis::ImMinus: return "im_minus";
    }
    return "?";
}

// Unit factor s_j in FT = sum_j s_j * component_j.
inline cdouble axis_sign(Axis axis) {
    switch (axis) {
        case Axis::RePlus: return {1.0, 0.0};
        case Axis::ReMinus: return {-1.0, 0.0};
        case Axis::ImPlus: return {0.0, 1.0};
        case Axis::ImMinus: return {0.0, -1.0};
    }
    return {0.0, 0.0};
}

struct Atom {
    double xi = 0.0;
    double weight = 0.0;
};

// Nonnegative density given by linear interpolation between tabulated points
// and zero outside [grid.front(), grid.back()]. Its exact integral is the
// trapezoid sum, so the tabulated values define the distribution that is
// sampled and the one that is reconstructed.
class DensityTable {
public:
    DensityTable() = default;

    DensityTable(std::vector<double> grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        require(grid_.size() == values_.size(), ErrorCode::InvalidArgument,
                "density grid and values differ in length");
        require(grid_.size() != 1, ErrorCode::InvalidArgument, "density needs at least 2 points");
        for (std::size_t i = 1; i < grid_.size(); ++i)
            require(grid_[i] > grid_[i - 1], ErrorCode::InvalidArgument,
                    "density grid must be strictly increasing");
        for (double v : values_)
            require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                    "density values must be finite and nonnegative");
        cumulative_.assign(grid_.size(), 0.0);
        for (std::size_t i = 1; i < grid_.size(); ++i)
            cumulative_[i] =
                cumulative_[i - 1] + 0.5 * (values_[i] + values_[i - 1]) * (grid_[i] - grid_[i - 1]);
    }

    bool empty() const { return grid_.empty() || mass() == 0.0; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double mass() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
    double lower() const { return grid_.empty() ? 0.0 : grid_.front(); }
    double upper() const { return grid_.empty() ? 0.0 : grid_.back(); }

    double operator()(double xi) const {
        if (grid_.empty() || xi < grid_.front() || xi > grid_.back()) return 0.0;
        auto it = std::upper_bound(grid_.begin(), grid_.end(), xi);
        if (it == grid_.end()) return values_.back();
        std::size_t i = static_cast<std::size_t>(it - grid_.begin());
        double t = (xi - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
        return values_[i - 1] + t * (values_[i] - values_[i - 1]);
    }

    // Inverse-CDF sample from the normalized interpolant, u in [0, 1).
    double sample(double u) const {
        double target = u * mass();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                                1, grid_.size() - 1);
        double v0 = values_[i - 1], v1 = values_[i], h = grid_[i] - grid_[i - 1];
        double seg = std::max(0.0, target - cumulative_[i - 1]) / h;
        // Solve v0 t + (v1 - v0) t^2 / 2 = seg for t in [0, 1].
        double disc = v0 * v0 + 2.0 * (v1 - v0) * seg;
        double denom = v0 + std::sqrt(std::max(0.0, disc));
        double t = denom > 0.0 ? 2.0 * seg / denom : 0.5;
        return grid_[i - 1] + std::clamp(t, 0.0, 1.0) * h;
    }

    // Cell-wise mass, used by the grid-categorical proposal.
    double cell_mass(std::size_t cell) const { return cumulative_[cell + 1] - cumulative_[cell]; }
    const std::vector<double>& cumulative() const { return cumulative_; }

private:
    std::vector<double> grid_;
    std::vector<double> values_;
    std::vector<double> cumulative_;
};

// One of the four nonnegative parts. A component may carry atoms, a density
// or both (the csch densities keep their excised core as a pair of atoms).
struct FourierComponent {
    Axis axis = Axis::RePlus;
    std::vector<Atom> atoms;
    DensityTable density;

    double atom_mass() const {
        double s = 0.0;
        for (const Atom& a : atoms) s += a.weight;
        return s;
    }
    double density_mass() const { return density.mass(); }
    double mass() const { return atom_mass() + density_mass(); }
    bool is_zero() const { return mass() == 0.0; }
    bool is_atomic() const { return density.empty(); }
};

struct FourierDecomposition {
    std::string label;
    std::array<FourierComponent, 4> components{
        FourierComponent{Axis::RePlus, {}, {}}, FourierComponent{Axis::ReMinus, {}, {}},
        FourierComponent{Axis::ImPlus, {}, {}}, FourierComponent{Axis::ImMinus, {}, {}}};

    FourierComponent& operator[](Axis a) { return components[static_cast<int>(a)]; }
    const FourierComponent& operator[](Axis a) const { return components[static_cast<int>(a)]; }

    // c_j = s_j * mass_j, so |c_j| equals the component mass.
    cdouble coefficient(Axis a) const { return axis_sign(a) * (*this)[a].mass(); }

    bool is_atomic() const {
        return std::all_of(components.begin(), components.end(),
                           [](const FourierComponent& c) { return c.is_atomic(); });
    }

    std::vector<Axis> active_axes() const {
        std::vector<Axis> out;
        for (Axis a : kAxes)
            if (!(*this)[a].is_zero()) out.push_back(a);
        return out;
    }

    std::size_t atom_count() const {
        std::size_t n = 0;
        for (const auto& c : components) n += c.atoms.size();
        return n;
    }
};

// ---------------------------------------------------------------------------
// Frequency grids and convention helpers

inline std::vector<double> uniform_grid(std::size_t n, double lo, double hi) {
    require(n >= 2 && hi > lo, ErrorCode::InvalidArgument, "bad uniform grid");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

// Geometric spacing from `lo` to `knee`, then uniform to `hi`. Used for the
// csch densities, which behave like 1/xi next to the excised core.
inline std::vector<double> graded_half_grid(std::size_t n, double lo, double knee, double hi) {
    require(n >= 4 && lo > 0.0 && knee > lo && hi > knee, ErrorCode::InvalidArgument,
            "bad graded grid");
    std::size_t n_log = n / 2;
    std::size_t n_lin = n - n_log;
    std::vector<double> g;
    g.reserve(n);
    double ratio = std::log(knee / lo) / static_cast<double>(n_log);
    for (std::size_t i = 0; i < n_log; ++i) g.push_back(lo * std::exp(ratio * static_cast<double>(i)));
    for (std::size_t i = 0; i < n_lin; ++i)
        g.push_back(knee + (hi - knee) * static_cast<double>(i) / static_cast<double>(n_lin - 1));
    return g;
}

using ComplexFn = std::function<cdouble(double)>;

// A transform stated as F(k) = \int f e^{-ikz} dz becomes FT(xi) = F(2 pi xi).
// No Jacobian enters the forward values; it only appears in the inverse measure
// dk = 2 pi dxi, which is already accounted for by using FT(xi) dxi.
inline ComplexFn angular_to_twopi(ComplexFn angular) {
    return [f = std::move(angular)](double xi) { return f(2.0 * kPi * xi); };
}

inline ComplexFn twopi_to_angular(ComplexFn twopi) {
    return [f = std::move(twopi)](double k) { return f(k / (2.0 * kPi)); };
}

// Principal-value transforms in angular form.
inline cdouble tanh_ft_angular(double k) { return {0.0, -kPi / std::sinh(kPi * k / 2.0)}; }
inline cdouble sigmoid_odd_ft_angular(double k) { return {0.0, -kPi / std::sinh(kPi * k)}; }

inline cdouble tanh_ft(double xi) { return angular_to_twopi(tanh_ft_angular)(xi); }
inline cdouble sigmoid_odd_ft(double xi) { return angular_to_twopi(sigmoid_odd_ft_angular)(xi); }

// ---------------------------------------------------------------------------
// Options

struct WindowSpec {
    enum class Kind { None, Plateau };
    Kind kind = Kind::Plateau;
    double plateau = 8.0;  // window == 1 on |z| <= plateau
    double taper = 8.0;    // smooth C-infinity decay to 0 over this length
    double span = 0.0;     // integration half-width for Kind::None

    static WindowSpec none(double span) { return {Kind::None, 0.0, 0.0, span}; }
    static WindowSpec plateau_window(double plateau, double taper) {
        return {Kind::Plateau, plateau, taper, 0.0};
    }

    double half_width() const { return kind == Kind::None ? span : plateau + taper; }

    double operator()(double z) const { return static_cast<double>(extended(z)); }

    long double extended(long double z) const {
        if (kind == Kind::None) return 1.0L;
        long double a = std::abs(z);
        if (a <= plateau) return 1.0L;
        if (a >= static_cast<long double>(plateau) + taper) return 0.0L;
        long double u = (a - plateau) / taper;
        long double e0 = std::exp(-1.0L / u);
        long double e1 = std::exp(-1.0L / (1.0L - u));
        return e1 / (e0 + e1);
    }
};

struct FtOptions {
    double xi_min = 1e-3;          // half-width of the excised core for csch densities
    double tail_tolerance = 1e-4;  // discarded csch tail mass (both sides)
    std::size_t grid_points = 4096;
    double grid_limit = 8.0;
    WindowSpec window = WindowSpec::plateau_window(8.0, 8.0);
    double quadrature_tolerance = 1e-6;
};

// ---------------------------------------------------------------------------
// Numeric transform (windowed trapezoid quadrature)

// Trapezoid rule on a power-of-two node spacing, accumulated in long double with
// exact phase reduction, so values far below the integrand's scale survive.
// Convergence is judged by comparing against the half-resolution sum.
inline std::vector<cdouble> numeric_ft(const std::function<double(double)>& f,
                                       const std::vector<double>& grid, const WindowSpec& window,
                                       double tolerance = 1e-6) {
    require(grid.size() >= 2, ErrorCode::InvalidArgument, "grid needs at least two points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        require(grid[i] > grid[i - 1], ErrorCode::InvalidArgument, "grid must be increasing");
    require(std::abs(grid.front() + grid.back()) <= 1e-12 * std::abs(grid.back()),
            ErrorCode::InvalidArgument, "grid must be symmetric about 0");
    const double half = window.half_width();
    require(half > 0.0, ErrorCode::InvalidArgument, "window must have positive extent");

    double xi_max = std::max(std::abs(grid.front()), std::abs(grid.back()));
    // Node spacing: power of two with at least 8 nodes per period of the
    // fastest oscillation.
    double h = 0.25;
    while (h * 8.0 * xi_max > 1.0) h *= 0.5;
    const long n_half = static_cast<long>(std::ceil(half / h));

    std::vector<long double> even(static_cast<std::size_t>(n_half) + 1);
    std::vector<long double> odd(static_cast<std::size_t>(n_half) + 1);
    for (long k = 0; k <= n_half; ++k) {
        double z = static_cast<double>(k) * h;
        long double w = window.extended(z);
        long double fp = w == 0.0L ? 0.0L : f(z) * w;
        long double fm = w == 0.0L ? 0.0L : f(-z) * w;
        require(std::isfinite(fp) && std::isfinite(fm), ErrorCode::QuadratureNonConvergent,
                "integrand is not finite");
        even[static_cast<std::size_t>(k)] = fp + fm;  // 2 * even part
        odd[static_cast<std::size_t>(k)] = fp - fm;   // 2 * odd part
    }

    const long double two_pi = 6.283185307179586476925286766559005768L;
    std::vector<cdouble> out(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const long double xi = grid[g];
        long double re_fine = 0.5L * even[0], im_fine = 0.0L;
        long double re_coarse = 0.5L * even[0], im_coarse = 0.0L;
        for (long k = 1; k <= n_half; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            if (even[kk] == 0.0 && odd[kk] == 0.0) continue;
            long double cycles = xi * (static_cast<long double>(k) * static_cast<long double>(h));
            cycles -= std::floor(cycles);
            long double phase = two_pi * cycles;
            long double c = std::cos(phase), s = std::sin(phase);
            long double re_t = even[kk] * c;
            long double im_t = -odd[kk] * s;
            re_fine += re_t;
            im_fine += im_t;
            if (k % 2 == 0) {
                re_coarse += re_t;
                im_coarse += im_t;
            }
        }
        // even[0] holds 2 f(0); the k = 0 node is counted once.
        cdouble fine(static_cast<double>(re_fine * h), static_cast<double>(im_fine * h));
        cdouble coarse(static_cast<double>(re_coarse * 2 * h), static_cast<double>(im_coarse * 2 * h));
        double scale = std::max(1.0, std::abs(fine));
        if (std::abs(fine - coarse) > tolerance * scale)
            throw Error(ErrorCode::QuadratureNonConvergent,
                        "trapezoid levels disagree at xi=" + std::to_string(grid[g]));
        out[g] = fine;
    }
    return out;
}

inline std::vector<cdouble> numeric_ft(const Activation& a, const std::vector<double>& grid,
                                       const WindowSpec& window, double tolerance = 1e-6) {
    return numeric_ft([a](double z) { return eval_activation(a, z); }, grid, window, tolerance);
}

// ---------------------------------------------------------------------------
// Decomposition

struct ComplexAtom {
    double xi = 0.0;
    cdouble weight;
};

// Sign split of a tabulated transform; every component shares the input grid.
inline FourierDecomposition decompose(const std::vector<double>& grid,
                                      const std::vector<cdouble>& values, std::string label = "") {
    require(grid.size() == values.size(), ErrorCode::InvalidArgument, "grid/value length mismatch");
    std::array<std::vector<double>, 4> parts;
    for (auto& p : parts) p.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        require(std::isfinite(values[i].real()) && std::isfinite(values[i].imag()),
                ErrorCode::InvalidArgument, "transform values must be finite");
        parts[0][i] = std::max(values[i].real(), 0.0);
        parts[1][i] = std::max(-values[i].real(), 0.0);
        parts[2][i] = std::max(values[i].imag(), 0.0);
        parts[3][i] = std::max(-values[i].imag(), 0.0);
    }
    FourierDecomposition d;
    d.label = std::move(label);
    for (Axis a : kAxes) {
        auto& p = parts[static_cast<int>(a)];
        if (std::any_of(p.begin(), p.end(), [](double v) { return v > 0.0; }))
            d[a].density = DensityTable(grid, std::move(p));
    }
    return d;
}

inline FourierDecomposition decompose(const std::vector<ComplexAtom>& atoms, std::string label = "") {
    FourierDecomposition d;
    d.label = std::move(label);
    for (const ComplexAtom& a : atoms) {
        require(std::isfinite(a.xi) && std::isfinite(a.weight.real()) &&
                    std::isfinite(a.weight.imag()),
                ErrorCode::InvalidArgument, "atoms must be finite");
        if (a.weight.real() > 0.0) d[Axis::RePlus].atoms.push_back({a.xi, a.weight.real()});
        if (a.weight.real() < 0.0) d[Axis::ReMinus].atoms.push_back({a.xi, -a.weight.real()});
        if (a.weight.imag() > 0.0) d[Axis::ImPlus].atoms.push_back({a.xi, a.weight.imag()});
        if (a.weight.imag() < 0.0) d[Axis::ImMinus].atoms.push_back({a.xi, -a.weight.imag()});
    }
    return d;
}

namespace detail {

// Composite Simpson on [0, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& g, double b, int panels = 2000) {
    double h = b / panels;
    double s = g(0.0) + g(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * g(i * h);
    return s * h / 3.0;
}

// Odd density  FT(xi) = -i * amplitude * csch(rate * xi)  on |xi| in
// [xi_min, xi_max]. The excised core (-xi_min, xi_min) contributes an odd real
// function of z; it is replaced by a symmetric atom pair whose first two odd
// moments match the core, so the reconstruction error from the cut is O(xi_min^5 z^5).
inline void add_csch_pair(FourierDecomposition& d, double amplitude, double rate,
                          const FtOptions& opt) {
    const double xi_min = opt.xi_min;
    require(xi_min > 0.0, ErrorCode::InvalidArgument, "xi_min must be positive");
    require(opt.tail_tolerance > 0.0 && opt.tail_tolerance < 1.0, ErrorCode::InvalidArgument,
            "tail tolerance must be in (0, 1)");
    // Two-sided tail mass beyond a: (2 amplitude / rate) * (-log tanh(rate a / 2)).
    double t = std::exp(-opt.tail_tolerance * rate / (2.0 * amplitude));
    double xi_max = std::min(opt.grid_limit, (2.0 / rate) * std::atanh(t));
    require(xi_max > 4.0 * xi_min, ErrorCode::InvalidArgument, "xi_min too large for tail cut");
    double knee = std::min(2.0 / rate, 0.5 * xi_max);
    knee = std::max(knee, 2.0 * xi_min);
    auto pos = graded_half_grid(std::max<std::size_t>(opt.grid_points / 2, 8), xi_min, knee, xi_max);

    std::vector<double> neg(pos.size());
    std::vector<double> vals(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) vals[i] = amplitude / std::sinh(rate * pos[i]);
    std::vector<double> neg_vals(vals.rbegin(), vals.rend());
    for (std::size_t i = 0; i < pos.size(); ++i) neg[i] = -pos[pos.size() - 1 - i];

    // Im FT < 0 on xi > 0, > 0 on xi < 0.
    d[Axis::ImMinus].density = DensityTable(pos, vals);
    d[Axis::ImPlus].density = DensityTable(neg, neg_vals);

    auto xcsch = [rate](double x) { return x == 0.0 ? 1.0 / rate : x / std::sinh(rate * x); };
    double mu1 = amplitude * simpson(xcsch, xi_min);
    double mu3 = amplitude * simpson([&](double x) { return x * x * xcsch(x); }, xi_min);
    double xi_star = std::sqrt(mu3 / mu1);
    double weight = mu1 / xi_star;
    d[Axis::ImPlus].atoms.push_back({-xi_star, weight});
    d[Axis::ImMinus].atoms.push_back({xi_star, weight});
}

}  // namespace detail

inline bool has_closed_form(const Activation& a) {
    switch (a.kind) {
        case ActivationKind::Sine:
        case ActivationKind::Cosine:
        case ActivationKind::Tanh:
        case ActivationKind::Sigmoid: return true;
        default: return false;
    }
}

inline FourierDecomposition closed_form_ft(const Activation& a, const FtOptions& opt = {}) {
    const double f0 = 1.0 / (2.0 * kPi);
    FourierDecomposition d;
    d.label = activation_name(a);
    switch (a.kind) {
        case ActivationKind::Sine:
            // sin z = (i/2) e^{-iz} - (i/2) e^{iz}
            d[Axis::ImPlus].atoms.push_back({-f0, 0.5});
            d[Axis::ImMinus].atoms.push_back({f0, 0.5});
            return d;
        case ActivationKind::Cosine:
            d[Axis::RePlus].atoms.push_back({-f0, 0.5});
            d[Axis::RePlus].atoms.push_back({f0, 0.5});
            return d;
        case ActivationKind::Tanh:
            detail::add_csch_pair(d, kPi, kPi * kPi, opt);
            return d;
        case ActivationKind::Sigmoid:
            // sigmoid(z) = 1/2 + tanh(z/2)/2
            detail::add_csch_pair(d, kPi, 2.0 * kPi * kPi, opt);
            d[Axis::RePlus].atoms.push_back({0.0, 0.5});
            return d;
        default:
            throw Error(ErrorCode::UnsupportedClosedForm,
                        "no vetted closed form for " + activation_name(a));
    }
}

// Closed form where vetted, windowed quadrature otherwise.
inline FourierDecomposition fourier_decomposition(const Activation& a, const FtOptions& opt = {}) {
    if (has_closed_form(a)) return closed_form_ft(a, opt);
    auto grid = uniform_grid(opt.grid_points, -opt.grid_limit, opt.grid_limit);
    auto values = numeric_ft(a, grid, opt.window, opt.quadrature_tolerance);
    return decompose(grid, values, activation_name(a));
}

// ---------------------------------------------------------------------------
// Reconstruction

namespace detail {

// \int_0^1 t^p e^{i theta t} dt for p = 0, 1.
inline std::pair<cdouble, cdouble> linear_moments(double theta) {
    const cdouble it(0.0, theta);
    if (std::abs(theta) < 1.0) {
        cdouble i0 = 0.0, i1 = 0.0, term = 1.0;  // term = (i theta)^k / k!
        for (int k = 0; k < 30; ++k) {
            i0 += term / static_cast<double>(k + 1);
            i1 += term / static_cast<double>(k + 2);
            term *= it / static_cast<double>(k + 1);
        }
        return {i0, i1};
    }
    cdouble e = std::exp(it);
    cdouble i0 = (e - 1.0) / it;
    cdouble i1 = e / it - (e - 1.0) / (it * it);
    return {i0, i1};
}

}  // namespace detail

// Exact \int density(xi) exp(i omega xi) dxi for the piecewise-linear density.
inline cdouble density_transform(const DensityTable& d, double omega) {
    const auto& g = d.grid();
    const auto& v = d.values();
    cdouble acc = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        double h = g[i] - g[i - 1];
        if (v[i] == 0.0 && v[i - 1] == 0.0) continue;
        auto [i0, i1] = detail::linear_moments(omega * h);
        acc += h * std::polar(1.0, omega * g[i - 1]) * (v[i - 1] * (i0 - i1) + v[i] * i1);
    }
    return acc;
}

// \int FT(xi) exp(2 pi i xi z) dxi for the decomposition.
inline cdouble reconstruct(const FourierDecomposition& d, double z) {
    const double omega = 2.0 * kPi * z;
    cdouble total = 0.0;
    for (Axis a : kAxes) {
        const FourierComponent& c = d[a];
        cdouble part = 0.0;
        for (const Atom& atom : c.atoms) part += atom.weight * std::polar(1.0, omega * atom.xi);
        if (!c.density.empty()) part += density_transform(c.density, omega);
        total += axis_sign(a) * part;
    }
    return total;
}

struct ReconstructionReport {
    double max_abs_error = 0.0;
    double max_imag_residue = 0.0;
};

inline ReconstructionReport validate_decomposition(const FourierDecomposition& d,
                                                   const Activation& a,
                                                   const std::vector<double>& zs) {
    ReconstructionReport r;
    for (double z : zs) {
        require(std::abs(z) <= 5.0, ErrorCode::InvalidArgument,
                "validation points must lie in [-5, 5]");
        cdouble fh = reconstruct(d, z);
        r.max_abs_error = std::max(r.max_abs_error, std::abs(fh.real() - eval_activation(a, z)));
        r.max_imag_residue = std::max(r.max_imag_residue, std::abs(fh.imag()));
    }
    return r;
}

}  // namespace snnk
