#pragma once

// Split-operator evolution on a periodic grid, either under the effective
// non-Hermitian Hamiltonian (noise integrated out) or under one sampled
// noise realization (unitary).

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "noisyqd/core.hpp"
#include "noisyqd/fft.hpp"

namespace noisyqd {

// ---------------------------------------------------------------------------
// System description

struct HarmonicPotential {
    double omega = 1.0;
    bool operator==(const HarmonicPotential&) const = default;
};

// V(x) = -1/sqrt(x^2 + a^2)
struct SoftCoulombPotential {
    double a = 1.0;
    bool operator==(const SoftCoulombPotential&) const = default;
};

struct TabulatedPotential {
    RealField values;
    bool operator==(const TabulatedPotential&) const = default;
};

using Potential = std::variant<HarmonicPotential, SoftCoulombPotential, TabulatedPotential>;

// g(x) = x
struct DipoleCoupling {
    bool operator==(const DipoleCoupling&) const = default;
};

struct TabulatedCoupling {
    RealField values;
    bool operator==(const TabulatedCoupling&) const = default;
};

using Coupling = std::variant<DipoleCoupling, TabulatedCoupling>;

// Deterministic drive F(t); empty means F = 0.
using Drive = std::function<double(double)>;

struct SystemSpec {
    double mass = 1.0;
    Potential potential = HarmonicPotential{1.0};
    Drive drive;
    Coupling coupling = DipoleCoupling{};
    double coupling_lambda = 1.0;
    Schedule sigma2 = Schedule::constant(0.0);

    bool time_independent() const { return !drive && sigma2.is_constant(); }
    bool dipole() const { return std::holds_alternative<DipoleCoupling>(coupling); }

    double noise_strength(double t) const { return coupling_lambda * coupling_lambda * sigma2(t); }

    void validate(const SpatialGrid& grid) const {
        if (!(mass > 0.0)) throw ConfigError("system: mass must be > 0");
        if (const auto* sc = std::get_if<SoftCoulombPotential>(&potential); sc && !(sc->a > 0.0))
            throw ConfigError("system: soft-Coulomb parameter a must be > 0");
        if (const auto* h = std::get_if<HarmonicPotential>(&potential); h && !(h->omega >= 0.0))
            throw ConfigError("system: harmonic omega must be >= 0");
        if (const auto* tp = std::get_if<TabulatedPotential>(&potential); tp && tp->values.size() != grid.size())
            throw ConfigError("system: tabulated potential length does not match grid");
        if (const auto* tc = std::get_if<TabulatedCoupling>(&coupling); tc && tc->values.size() != grid.size())
            throw ConfigError("system: tabulated coupling length does not match grid");
    }

    RealField potential_on(const SpatialGrid& grid) const {
        RealField v(grid.size());
        std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                for (std::size_t j = 0; j < grid.size(); ++j) {
                    const double x = grid.x(j);
                    if constexpr (std::is_same_v<P, HarmonicPotential>)
                        v[j] = 0.5 * mass * p.omega * p.omega * x * x;
                    else if constexpr (std::is_same_v<P, SoftCoulombPotential>)
                        v[j] = -1.0 / std::sqrt(x * x + p.a * p.a);
                    else
                        v[j] = p.values.at(j);
                }
            },
            potential);
        return v;
    }

    RealField coupling_on(const SpatialGrid& grid) const {
        if (const auto* tc = std::get_if<TabulatedCoupling>(&coupling)) {
            if (tc->values.size() != grid.size()) throw ConfigError("system: tabulated coupling length does not match grid");
            return tc->values;
        }
        return grid.points();
    }
};

// Absorbing layer of the given width at both box edges: per step the state is
// multiplied by exp(-strength * dt * s^2), s in [0,1] the depth into the layer.
struct Boundary {
    enum class Kind { periodic, absorbing_mask };
    Kind kind = Kind::periodic;
    double width = 0.0;
    double strength = 0.0;
    bool operator==(const Boundary&) const = default;
};

struct EvolutionConfig {
    double dt = 1e-3;
    std::size_t n_steps = 0;
    std::size_t snapshot_stride = 1;
    Boundary boundary;

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("evolution: dt must be > 0");
        if (snapshot_stride < 1) throw ConfigError("evolution: snapshot_stride must be >= 1");
        if (boundary.kind == Boundary::Kind::absorbing_mask && (!(boundary.strength >= 0.0) || !(boundary.width > 0.0)))
            throw ConfigError("evolution: absorbing mask needs width > 0 and strength >= 0");
    }
    bool operator==(const EvolutionConfig&) const = default;
};

// W(x) = V(x) + g(x) F(t) - (i/2) lambda^2 sigma^2(t) g(x)^2
inline ComplexField effective_potential(const SystemSpec& spec, const SpatialGrid& grid, double t) {
    spec.validate(grid);
    const RealField v = spec.potential_on(grid);
    const RealField g = spec.coupling_on(grid);
    const double f = spec.drive ? spec.drive(t) : 0.0;
    const double loss = 0.5 * spec.noise_strength(t);
    ComplexField w(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) w[j] = {v[j] + g[j] * f, -loss * g[j] * g[j]};
    return w;
}

// ---------------------------------------------------------------------------
// Stepper

// Strang step: exp(-i W dt/2) . exp(-i p^2 dt/2m) . exp(-i W dt/2), kinetic
// factor applied in momentum space. Time-dependent inputs are sampled at the
// step midpoint. In stochastic mode W is the noiseless potential and the
// exact noise phase exp(-i lambda g(x) W_n) is applied once at the end of
// the step.
class Propagator {
public:
    Propagator(SpatialGrid grid, SystemSpec spec, EvolutionConfig cfg)
        : grid_(std::move(grid)), spec_(std::move(spec)), cfg_(cfg), fft_(grid_.size(), 1) {
        spec_.validate(grid_);
        cfg_.validate();
        const std::size_t n = grid_.size();
        potential_ = spec_.potential_on(grid_);
        coupling_ = spec_.coupling_on(grid_);

        const RealField k = grid_.wavenumbers();
        kinetic_.resize(n);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) kinetic_[j] = std::polar(inv_n, -k[j] * k[j] * cfg_.dt / (2.0 * spec_.mass));

        if (cfg_.boundary.kind == Boundary::Kind::absorbing_mask) {
            mask_.assign(n, 1.0);
            const double width = cfg_.boundary.width;
            for (std::size_t j = 0; j < n; ++j) {
                const double edge = std::min(grid_.x(j) - grid_.x_min(), grid_.x_max() - grid_.x(j));
                if (edge < width) {
                    const double s = (width - edge) / width;
                    mask_[j] = std::exp(-cfg_.boundary.strength * cfg_.dt * s * s);
                }
            }
        }

        if (spec_.time_independent()) {
            effective_half_ = half_factors(0.0, true);
            noiseless_half_ = half_factors(0.0, false);
        }
    }

    const SpatialGrid& grid() const noexcept { return grid_; }
    const SystemSpec& spec() const noexcept { return spec_; }
    const EvolutionConfig& config() const noexcept { return cfg_; }

    void step_effective(WaveFunction& psi) {
        require_same_grid(psi.grid, grid_);
        const double t_mid = psi.time + 0.5 * cfg_.dt;
        const ComplexField* half = &effective_half_;
        if (!spec_.time_independent()) {
            scratch_half_ = half_factors(t_mid, true);
            half = &scratch_half_;
        }
        strang(psi.values, *half, nullptr);
        psi.time += cfg_.dt;
    }

    void step_stochastic(WaveFunction& psi, double increment) {
        require_same_grid(psi.grid, grid_);
        const double t_mid = psi.time + 0.5 * cfg_.dt;
        const ComplexField* half = &noiseless_half_;
        if (!spec_.time_independent()) {
            scratch_half_ = half_factors(t_mid, false);
            half = &scratch_half_;
        }
        fill_noise_phase(increment);
        strang(psi.values, *half, &noise_phase_);
        psi.time += cfg_.dt;
    }

    // exp(-i W(x, t) dt / 2), with or without the anti-Hermitian loss part.
    ComplexField half_factors(double t, bool with_loss) const {
        const double f = spec_.drive ? spec_.drive(t) : 0.0;
        const double loss = with_loss ? 0.5 * spec_.noise_strength(t) : 0.0;
        const double h = 0.5 * cfg_.dt;
        ComplexField out(grid_.size());
        for (std::size_t j = 0; j < grid_.size(); ++j) {
            const double g = coupling_[j];
            out[j] = std::polar(std::exp(-loss * g * g * h), -(potential_[j] + g * f) * h);
        }
        return out;
    }

private:
    void strang(ComplexField& values, const ComplexField& half, const ComplexField* extra) {
        auto buf = fft_.buffer();
        const std::size_t n = values.size();
        for (std::size_t j = 0; j < n; ++j) buf[j] = values[j] * half[j];
        fft_.forward();
        for (std::size_t j = 0; j < n; ++j) buf[j] *= kinetic_[j];
        fft_.backward();
        if (extra) {
            for (std::size_t j = 0; j < n; ++j) values[j] = buf[j] * half[j] * (*extra)[j];
        } else {
            for (std::size_t j = 0; j < n; ++j) values[j] = buf[j] * half[j];
        }
        if (!mask_.empty())
            for (std::size_t j = 0; j < n; ++j) values[j] *= mask_[j];
    }

    void fill_noise_phase(double increment) {
        const std::size_t n = grid_.size();
        noise_phase_.resize(n);
        const double a = -spec_.coupling_lambda * increment;
        if (spec_.dipole()) {
            // g is linear in j: geometric recurrence, re-anchored every block
            // to keep rounding drift at the 1e-15 level.
            constexpr std::size_t block = 32;
            const Complex ratio = std::polar(1.0, a * grid_.dx());
            for (std::size_t j0 = 0; j0 < n; j0 += block) {
                Complex z = std::polar(1.0, a * grid_.x(j0));
                const std::size_t j1 = std::min(n, j0 + block);
                for (std::size_t j = j0; j < j1; ++j) {
                    noise_phase_[j] = z;
                    z *= ratio;
                }
            }
        } else {
            for (std::size_t j = 0; j < n; ++j) noise_phase_[j] = std::polar(1.0, a * coupling_[j]);
        }
    }

    SpatialGrid grid_;
    SystemSpec spec_;
    EvolutionConfig cfg_;
    FftPlan fft_;
    RealField potential_;
    RealField coupling_;
    ComplexField kinetic_;
    RealField mask_;
    ComplexField effective_half_;
    ComplexField noiseless_half_;
    ComplexField scratch_half_;
    ComplexField noise_phase_;
};

inline WaveFunction step_effective(const WaveFunction& psi, const SystemSpec& spec, const EvolutionConfig& cfg) {
    Propagator prop(psi.grid, spec, cfg);
    WaveFunction out = psi;
    prop.step_effective(out);
    return out;
}

inline WaveFunction step_stochastic(const WaveFunction& psi, const SystemSpec& spec, const EvolutionConfig& cfg,
                                    double increment) {
    Propagator prop(psi.grid, spec, cfg);
    WaveFunction out = psi;
    prop.step_stochastic(out, increment);
    return out;
}

// ---------------------------------------------------------------------------
// Trajectories

struct Trajectory {
    std::vector<WaveFunction> snapshots;
    std::vector<double> times;  // one entry per step, including t0
    RealField norm2;
    RealField mean_x;
    RealField mean_x2;
    std::vector<double> probes;
    std::vector<RealField> current;  // current[p][k]: J_R at probes[p], times[k]
};

namespace detail {

inline void record(Trajectory& tr, const WaveFunction& psi) {
    const double n2 = norm2(psi);
    tr.times.push_back(psi.time);
    tr.norm2.push_back(n2);
    if (n2 > 0.0) {
        tr.mean_x.push_back(expectation(psi, [](double x) { return x; }));
        tr.mean_x2.push_back(expectation(psi, [](double x) { return x * x; }));
    } else {
        tr.mean_x.push_back(std::nan(""));
        tr.mean_x2.push_back(std::nan(""));
    }
    if (!tr.probes.empty()) {
        const RealField j = probability_current(psi);
        for (std::size_t p = 0; p < tr.probes.size(); ++p) tr.current[p].push_back(interpolate(psi.grid, j, tr.probes[p]));
    }
}

}  // namespace detail

// Runs cfg.n_steps steps. With a noise realization the evolution is the
// stochastic one; otherwise the effective non-Hermitian one.
inline Trajectory evolve(const WaveFunction& psi0, const SystemSpec& spec, const EvolutionConfig& cfg,
                         const NoiseRealization* noise = nullptr, std::span<const double> probes = {}) {
    if (noise) {
        if (noise->steps() < cfg.n_steps) throw ConfigError("evolve: noise realization shorter than n_steps");
        if (std::abs(noise->dt - cfg.dt) > 1e-15 * cfg.dt) throw ConfigError("evolve: noise dt differs from evolution dt");
    }
    if (!spec.sigma2.covers(psi0.time, psi0.time + cfg.dt * static_cast<double>(cfg.n_steps)))
        throw ConfigError("evolve: sigma^2 schedule does not cover the evolution window");
    for (double x : probes)
        if (x < psi0.grid.x_min() || x > psi0.grid.x_max()) throw ConfigError("evolve: probe outside grid");

    Propagator prop(psi0.grid, spec, cfg);
    Trajectory tr;
    tr.probes.assign(probes.begin(), probes.end());
    tr.current.resize(probes.size());
    tr.times.reserve(cfg.n_steps + 1);

    WaveFunction psi = psi0;
    tr.snapshots.push_back(psi);
    detail::record(tr, psi);
    for (std::size_t s = 0; s < cfg.n_steps; ++s) {
        if (noise)
            prop.step_stochastic(psi, noise->increments[s]);
        else
            prop.step_effective(psi);
        const double n2 = norm2(psi);
        if (!std::isfinite(n2)) throw NumericalError("evolve: non-finite state", static_cast<long>(s + 1));
        detail::record(tr, psi);
        if ((s + 1) % cfg.snapshot_stride == 0) tr.snapshots.push_back(psi);
    }
    return tr;
}

}  // namespace noisyqd
