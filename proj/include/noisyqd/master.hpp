#pragma once

// Grid evolution of the noise-averaged density matrix rho(x_f, x_i).
//
// The ket index evolves with H_eff = H_0 - (i/2) lambda^2 sigma^2 g^2 and the
// bra index with H_eff^*. That alone is the loss part and drains the trace.
// The gain part multiplies by exp(+lambda^2 sigma^2 g(x_f) g(x_i) dt); with
// both on the position factor becomes the dephasing
// exp(-(lambda^2 sigma^2 / 2) (g(x_f) - g(x_i))^2 dt) and the trace is kept.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "noisyqd/core.hpp"
#include "noisyqd/fft.hpp"
#include "noisyqd/propagation.hpp"

namespace noisyqd {

struct MasterConfig {
    bool include_gain = true;
    double dt = 1e-3;
    std::size_t n_steps = 0;
    std::size_t snapshot_stride = 1;
    bool freeze_kinetic = false;  // pure-dephasing test mode: no kinetic term

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("master: dt must be > 0");
        if (snapshot_stride < 1) throw ConfigError("master: snapshot_stride must be >= 1");
    }
    bool operator==(const MasterConfig&) const = default;
};

inline constexpr double kHermiticityAbortTolerance = 1e-8;

class LiouvillePropagator {
public:
    LiouvillePropagator(SpatialGrid grid, SystemSpec spec, MasterConfig cfg)
        : grid_(std::move(grid)), spec_(std::move(spec)), cfg_(cfg), fft_(grid_.size(), 2) {
        spec_.validate(grid_);
        cfg_.validate();
        const std::size_t n = grid_.size();
        potential_ = spec_.potential_on(grid_);
        coupling_ = spec_.coupling_on(grid_);
        const RealField k = grid_.wavenumbers();
        kinetic_.resize(n * n);
        const double inv = 1.0 / static_cast<double>(n * n);
        const double c = cfg_.dt / (2.0 * spec_.mass);
        for (std::size_t f = 0; f < n; ++f)
            for (std::size_t i = 0; i < n; ++i) kinetic_[f * n + i] = std::polar(inv, -(k[f] * k[f] - k[i] * k[i]) * c);
        if (spec_.time_independent()) half_ = half_factors(0.0);
    }

    const SpatialGrid& grid() const noexcept { return grid_; }

    // Position-space factor for half a step at time t (row-major f, i).
    ComplexField half_factors(double t) const {
        const std::size_t n = grid_.size();
        const double h = 0.5 * cfg_.dt;
        const double f_t = spec_.drive ? spec_.drive(t) : 0.0;
        const double a = 0.5 * spec_.noise_strength(t);
        ComplexField phase(n);
        for (std::size_t j = 0; j < n; ++j) phase[j] = std::polar(1.0, -(potential_[j] + coupling_[j] * f_t) * h);
        ComplexField out(n * n);
        for (std::size_t f = 0; f < n; ++f) {
            const double gf = coupling_[f];
            for (std::size_t i = 0; i < n; ++i) {
                const double gi = coupling_[i];
                const double expo = cfg_.include_gain ? -a * (gf - gi) * (gf - gi) * h : -a * (gf * gf + gi * gi) * h;
                out[f * n + i] = phase[f] * std::conj(phase[i]) * std::exp(expo);
            }
        }
        return out;
    }

    void step(DensityMatrix& rho) {
        require_same_grid(rho.grid, grid_);
        const ComplexField* half = &half_;
        if (!spec_.time_independent()) {
            scratch_ = half_factors(rho.time + 0.5 * cfg_.dt);
            half = &scratch_;
        }
        const std::size_t total = rho.values.size();
        auto buf = fft_.buffer();
        for (std::size_t j = 0; j < total; ++j) buf[j] = rho.values[j] * (*half)[j];
        if (!cfg_.freeze_kinetic) {
            fft_.forward();
            for (std::size_t j = 0; j < total; ++j) buf[j] *= kinetic_[j];
            fft_.backward();
        }
        for (std::size_t j = 0; j < total; ++j) rho.values[j] = buf[j] * (*half)[j];
        rho.time += cfg_.dt;
        const double defect = rho.hermiticity_defect();
        if (!(defect <= kHermiticityAbortTolerance))
            throw NumericalError("liouville_step: Hermiticity defect " + std::to_string(defect));
    }

private:
    SpatialGrid grid_;
    SystemSpec spec_;
    MasterConfig cfg_;
    FftPlan fft_;
    RealField potential_;
    RealField coupling_;
    ComplexField kinetic_;
    ComplexField half_;
    ComplexField scratch_;
};

inline DensityMatrix liouville_step(const DensityMatrix& rho, const SystemSpec& spec, const MasterConfig& cfg) {
    if (!(rho.hermiticity_defect() <= kHermiticityAbortTolerance))
        throw NumericalError("liouville_step: input is not Hermitian");
    LiouvillePropagator prop(rho.grid, spec, cfg);
    DensityMatrix out = rho;
    prop.step(out);
    return out;
}

inline Complex trace(const DensityMatrix& rho) { return rho.trace(); }
inline double purity(const DensityMatrix& rho) { return rho.purity(); }

struct DensityTrajectory {
    std::vector<DensityMatrix> snapshots;
    std::vector<double> times;  // every step, including t0
    ComplexField trace;
    RealField purity;
    std::vector<RealField> diagonals;  // at snapshot times
    std::vector<double> snapshot_times;
};

inline DensityTrajectory evolve_density(const DensityMatrix& rho0, const SystemSpec& spec, const MasterConfig& cfg) {
    if (std::abs(rho0.trace() - 1.0) > 1e-8) throw ConfigError("evolve_density: initial trace must be 1");
    if (!spec.sigma2.covers(rho0.time, rho0.time + cfg.dt * static_cast<double>(cfg.n_steps)))
        throw ConfigError("evolve_density: sigma^2 schedule does not cover the evolution window");
    LiouvillePropagator prop(rho0.grid, spec, cfg);
    DensityTrajectory tr;
    DensityMatrix rho = rho0;
    auto snap = [&] {
        tr.snapshots.push_back(rho);
        tr.diagonals.push_back(rho.diagonal());
        tr.snapshot_times.push_back(rho.time);
    };
    auto record = [&] {
        tr.times.push_back(rho.time);
        tr.trace.push_back(rho.trace());
        tr.purity.push_back(rho.purity());
    };
    snap();
    record();
    for (std::size_t s = 0; s < cfg.n_steps; ++s) {
        try {
            prop.step(rho);
        } catch (const NumericalError& e) {
            throw NumericalError(e.what(), static_cast<long>(s + 1));
        }
        record();
        if (!std::isfinite(tr.trace.back().real())) throw NumericalError("evolve_density: non-finite trace", static_cast<long>(s + 1));
        if ((s + 1) % cfg.snapshot_stride == 0) snap();
    }
    return tr;
}

}  // namespace noisyqd
