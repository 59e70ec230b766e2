#pragma once

// Shared domain types and basic observables. Units: hbar = 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace noisyqd {

using Complex = std::complex<double>;
using ComplexField = std::vector<Complex>;
using RealField = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct GridMismatch : Error {
    using Error::Error;
};

struct EmptyStateError : Error {
    using Error::Error;
};

// Overflow, NaN, caustics, broken invariants during evolution.
struct NumericalError : Error {
    NumericalError(const std::string& what, long step = -1)
        : Error(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

// ---------------------------------------------------------------------------
// SpatialGrid

class SpatialGrid {
public:
    SpatialGrid(double x_min, double x_max, std::size_t n_points)
        : x_min_(x_min), x_max_(x_max), n_(n_points) {
        if (!(x_min < x_max)) throw ConfigError("grid: x_min must be < x_max");
        if (n_points < 8) throw ConfigError("grid: n_points must be >= 8");
        dx_ = (x_max - x_min) / static_cast<double>(n_points - 1);
    }

    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    std::size_t size() const noexcept { return n_; }
    double dx() const noexcept { return dx_; }
    double x(std::size_t j) const noexcept { return x_min_ + static_cast<double>(j) * dx_; }

    RealField points() const {
        RealField xs(n_);
        for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
        return xs;
    }

    // Angular wavenumbers in FFT order for a periodic box of length n*dx.
    RealField wavenumbers() const {
        RealField k(n_);
        const double dk = 2.0 * kPi / (static_cast<double>(n_) * dx_);
        const auto last_positive = static_cast<long>((n_ - 1) / 2);
        for (std::size_t j = 0; j < n_; ++j) {
            long m = static_cast<long>(j);
            if (m > last_positive) m -= static_cast<long>(n_);
            k[j] = dk * static_cast<double>(m);
        }
        return k;
    }

    bool operator==(const SpatialGrid& o) const noexcept {
        return x_min_ == o.x_min_ && x_max_ == o.x_max_ && n_ == o.n_;
    }

private:
    double x_min_;
    double x_max_;
    std::size_t n_;
    double dx_;
};

inline void require_same_grid(const SpatialGrid& a, const SpatialGrid& b) {
    if (!(a == b)) throw GridMismatch("state and system live on different grids");
}

// ---------------------------------------------------------------------------
// Time schedule for sigma^2(t): a constant, or piecewise constant on
// contiguous segments [knots[k], knots[k+1]).

class Schedule {
public:
    Schedule() = default;

    static Schedule constant(double value) {
        if (!(value >= 0.0) || !std::isfinite(value)) throw ConfigError("schedule: value must be finite and >= 0");
        Schedule s;
        s.knots_ = {0.0, kInfinity};
        s.values_ = {value};
        return s;
    }

    static Schedule piecewise(std::vector<double> knots, std::vector<double> values) {
        if (knots.size() < 2 || values.size() + 1 != knots.size())
            throw ConfigError("schedule: need knots.size() == values.size() + 1 >= 2");
        for (std::size_t k = 0; k + 1 < knots.size(); ++k)
            if (!(knots[k] < knots[k + 1])) throw ConfigError("schedule: knots must increase");
        for (double v : values)
            if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("schedule: values must be finite and >= 0");
        Schedule s;
        s.knots_ = std::move(knots);
        s.values_ = std::move(values);
        return s;
    }

    double operator()(double t) const {
        if (t < knots_.front() || t > knots_.back())
            throw ConfigError("schedule: t=" + std::to_string(t) + " outside tabulated window");
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        auto k = static_cast<std::size_t>(std::distance(knots_.begin(), it));
        k = std::clamp<std::size_t>(k, 1, values_.size());
        return values_[k - 1];
    }

    bool is_constant() const noexcept { return values_.size() == 1; }
    bool covers(double t0, double t1) const noexcept { return t0 >= knots_.front() && t1 <= knots_.back(); }
    const std::vector<double>& knots() const noexcept { return knots_; }
    const std::vector<double>& values() const noexcept { return values_; }

    bool operator==(const Schedule&) const = default;

private:
    std::vector<double> knots_{0.0, kInfinity};
    std::vector<double> values_{0.0};
};

// ---------------------------------------------------------------------------
// States

struct WaveFunction {
    SpatialGrid grid;
    ComplexField values;
    double time = 0.0;

    WaveFunction(SpatialGrid g, ComplexField v, double t = 0.0) : grid(std::move(g)), values(std::move(v)), time(t) {
        if (values.size() != grid.size()) throw GridMismatch("wavefunction: values do not match grid size");
    }
    explicit WaveFunction(SpatialGrid g) : grid(std::move(g)), values(grid.size()), time(0.0) {}
};

// rho(x_f, x_i) stored row-major: values[f * n + i].
struct DensityMatrix {
    SpatialGrid grid;
    ComplexField values;
    double time = 0.0;

    explicit DensityMatrix(SpatialGrid g, double t = 0.0)
        : grid(std::move(g)), values(grid.size() * grid.size()), time(t) {}
    DensityMatrix(SpatialGrid g, ComplexField v, double t) : grid(std::move(g)), values(std::move(v)), time(t) {
        if (values.size() != grid.size() * grid.size()) throw GridMismatch("density: values do not match grid");
    }

    std::size_t dim() const noexcept { return grid.size(); }
    Complex& operator()(std::size_t f, std::size_t i) noexcept { return values[f * grid.size() + i]; }
    const Complex& operator()(std::size_t f, std::size_t i) const noexcept { return values[f * grid.size() + i]; }

    static DensityMatrix pure(const WaveFunction& psi) {
        DensityMatrix rho(psi.grid, psi.time);
        const std::size_t n = psi.grid.size();
        for (std::size_t f = 0; f < n; ++f)
            for (std::size_t i = 0; i < n; ++i) rho(f, i) = psi.values[f] * std::conj(psi.values[i]);
        return rho;
    }

    Complex trace() const noexcept {
        Complex s = 0.0;
        for (std::size_t j = 0; j < dim(); ++j) s += (*this)(j, j);
        return s * grid.dx();
    }

    // Tr rho^2 with the position-space measure dx^2.
    double purity() const noexcept {
        const std::size_t n = dim();
        Complex s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) s += (*this)(j, k) * (*this)(k, j);
        return s.real() * grid.dx() * grid.dx();
    }

    // max |rho(f,i) - conj(rho(i,f))|
    double hermiticity_defect() const noexcept {
        const std::size_t n = dim();
        double worst = 0.0;
        for (std::size_t f = 0; f < n; ++f)
            for (std::size_t i = f; i < n; ++i) worst = std::max(worst, std::abs((*this)(f, i) - std::conj((*this)(i, f))));
        return worst;
    }

    RealField diagonal() const {
        RealField d(dim());
        for (std::size_t j = 0; j < dim(); ++j) d[j] = (*this)(j, j).real();
        return d;
    }
};

// ---------------------------------------------------------------------------
// Oscillator parameters

// Omega = omega1 - i omega2, both non-negative.
struct ComplexFrequency {
    double omega1 = 0.0;
    double omega2 = 0.0;

    Complex value() const noexcept { return {omega1, -omega2}; }
    Complex squared() const noexcept { return value() * value(); }
};

struct OscillatorSpec {
    double mass = 1.0;
    double omega = 1.0;
    double coupling_lambda = 1.0;
    Schedule sigma2 = Schedule::constant(0.0);
};

// Per-step integrated noise W_n ~ Normal(0, variance[n] * dt).
struct NoiseRealization {
    double dt = 0.0;
    std::vector<double> increments;
    std::vector<double> variance;

    std::size_t steps() const noexcept { return increments.size(); }
};

// ---------------------------------------------------------------------------
// Observables

inline double norm2(const WaveFunction& psi) noexcept {
    double s = 0.0;
    for (const auto& z : psi.values) s += std::norm(z);
    return s * psi.grid.dx();
}

template <class F>
double expectation(const WaveFunction& psi, F&& f) {
    const double n2 = norm2(psi);
    if (!(n2 > 0.0)) throw EmptyStateError("expectation: state has zero norm");
    double s = 0.0;
    for (std::size_t j = 0; j < psi.values.size(); ++j) s += f(psi.grid.x(j)) * std::norm(psi.values[j]);
    return s * psi.grid.dx() / n2;
}

// J_R = Re[-i psi^* dpsi/dx]; central differences inside, one-sided at the two edges.
inline RealField probability_current(const WaveFunction& psi) {
    const auto& v = psi.values;
    const std::size_t n = v.size();
    const double dx = psi.grid.dx();
    RealField j(n);
    for (std::size_t k = 1; k + 1 < n; ++k) j[k] = (std::conj(v[k]) * (v[k + 1] - v[k - 1]) / (2.0 * dx)).imag();
    j[0] = (std::conj(v[0]) * (v[1] - v[0]) / dx).imag();
    j[n - 1] = (std::conj(v[n - 1]) * (v[n - 1] - v[n - 2]) / dx).imag();
    return j;
}

// Linear interpolation of a grid field at an arbitrary position inside the grid.
inline double interpolate(const SpatialGrid& grid, std::span<const double> field, double x) {
    if (x < grid.x_min() || x > grid.x_max()) throw ConfigError("probe position outside grid");
    const double s = (x - grid.x_min()) / grid.dx();
    auto j = static_cast<std::size_t>(std::floor(s));
    if (j >= grid.size() - 1) j = grid.size() - 2;
    const double w = s - static_cast<double>(j);
    return (1.0 - w) * field[j] + w * field[j + 1];
}

// ---------------------------------------------------------------------------
// Common initial states

// Ground state of the real oscillator (m, omega), unit norm in the continuum.
inline WaveFunction harmonic_ground_state(const SpatialGrid& grid, double mass, double omega) {
    WaveFunction psi(grid);
    const double a = mass * omega;
    const double c = std::pow(a / kPi, 0.25);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double x = grid.x(j);
        psi.values[j] = c * std::exp(-0.5 * a * x * x);
    }
    return psi;
}

// Gaussian packet with <x> = x0, position spread (std. dev. of |psi|^2) = width, momentum k0.
inline WaveFunction gaussian_packet(const SpatialGrid& grid, double x0, double width, double k0 = 0.0) {
    if (!(width > 0.0)) throw ConfigError("gaussian: width must be > 0");
    WaveFunction psi(grid);
    const double c = std::pow(2.0 * kPi * width * width, -0.25);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double u = grid.x(j) - x0;
        psi.values[j] = c * std::exp(-u * u / (4.0 * width * width)) * std::polar(1.0, k0 * grid.x(j));
    }
    return psi;
}

}  // namespace noisyqd
