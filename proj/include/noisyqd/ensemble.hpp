#pragma once

// Monte Carlo over white-noise realizations. Trajectory k draws from an engine
// seeded by (master_seed, k) alone, and per-block partial sums are folded in
// block order, so results are bitwise independent of the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "noisyqd/core.hpp"
#include "noisyqd/propagation.hpp"

namespace noisyqd {

inline constexpr std::uint64_t kDefaultMasterSeed = 0x5EEDF00DCAFEULL;

struct EnsembleConfig {
    std::size_t n_realizations = 1;
    std::uint64_t master_seed = kDefaultMasterSeed;
    unsigned max_concurrency = 0;  // 0: hardware concurrency

    void validate() const {
        if (n_realizations < 1) throw ConfigError("ensemble: n_realizations must be >= 1");
    }
    bool operator==(const EnsembleConfig&) const = default;
};

// Seed of trajectory `index` under `master_seed`.
inline std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

// W_n ~ Normal(0, sigma^2(t_n + dt/2) dt) for n < cfg.n_steps, starting at t0.
inline NoiseRealization sample_noise(std::uint64_t seed, const EvolutionConfig& cfg, const Schedule& sigma2,
                                     double t0 = 0.0) {
    cfg.validate();
    NoiseRealization noise;
    noise.dt = cfg.dt;
    noise.increments.resize(cfg.n_steps);
    noise.variance.resize(cfg.n_steps);
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t n = 0; n < cfg.n_steps; ++n) {
        const double var = sigma2(t0 + (static_cast<double>(n) + 0.5) * cfg.dt);
        noise.variance[n] = var;
        noise.increments[n] = std::sqrt(var * cfg.dt) * normal(engine);
    }
    return noise;
}

// ---------------------------------------------------------------------------
// Single-step characteristic function: E[exp(-i lambda x W)] with
// W ~ Normal(0, sigma^2 dt) against exp(-lambda^2 sigma^2 x^2 dt / 2).

struct CharacteristicCheck {
    Complex empirical;
    double exact = 0.0;
    double standard_error = 0.0;
    double z_score = 0.0;
};

inline CharacteristicCheck noise_characteristic_check(double x, double dt, double sigma2, double lambda,
                                                      std::size_t n_draws, std::uint64_t seed = kDefaultMasterSeed) {
    if (n_draws < 1000) throw ConfigError("noise_characteristic_check: need at least 1000 draws");
    if (!(dt > 0.0) || !(sigma2 >= 0.0)) throw ConfigError("noise_characteristic_check: need dt > 0, sigma^2 >= 0");
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(sigma2 * dt);
    Complex sum = 0.0;
    double sum_abs2 = 0.0;
    for (std::size_t k = 0; k < n_draws; ++k) {
        const Complex z = std::polar(1.0, -lambda * x * scale * normal(engine));
        sum += z;
        sum_abs2 += std::norm(z);
    }
    const double n = static_cast<double>(n_draws);
    CharacteristicCheck out;
    out.empirical = sum / n;
    out.exact = std::exp(-0.5 * lambda * lambda * sigma2 * x * x * dt);
    const double var = std::max(0.0, (sum_abs2 - std::norm(sum) / n) / (n - 1.0));
    out.standard_error = std::sqrt(var / n);
    const double diff = std::abs(out.empirical - out.exact);
    out.z_score = out.standard_error > 0.0 ? diff / out.standard_error : (diff == 0.0 ? 0.0 : kInfinity);
    return out;
}

// ---------------------------------------------------------------------------
// Accumulation

// Sums of z and |z|^2 per entry.
struct FieldAccumulator {
    ComplexField sum;
    RealField sum_abs2;
    std::size_t count = 0;

    FieldAccumulator() = default;
    explicit FieldAccumulator(std::size_t size) : sum(size), sum_abs2(size) {}

    void add(std::span<const Complex> sample) {
        for (std::size_t j = 0; j < sum.size(); ++j) {
            sum[j] += sample[j];
            sum_abs2[j] += std::norm(sample[j]);
        }
        ++count;
    }

    // Adds the outer product v v^dagger, laid out row-major.
    void add_outer(std::span<const Complex> v) {
        const std::size_t n = v.size();
        for (std::size_t f = 0; f < n; ++f) {
            const Complex a = v[f];
            const double na = std::norm(a);
            Complex* row = sum.data() + f * n;
            double* row2 = sum_abs2.data() + f * n;
            for (std::size_t i = 0; i < n; ++i) {
                row[i] += a * std::conj(v[i]);
                row2[i] += na * std::norm(v[i]);
            }
        }
        ++count;
    }

    void merge(const FieldAccumulator& o) {
        if (sum.empty()) {
            *this = o;
            return;
        }
        for (std::size_t j = 0; j < sum.size(); ++j) {
            sum[j] += o.sum[j];
            sum_abs2[j] += o.sum_abs2[j];
        }
        count += o.count;
    }

    ComplexField mean() const {
        ComplexField m(sum.size());
        const double n = static_cast<double>(count);
        for (std::size_t j = 0; j < sum.size(); ++j) m[j] = sum[j] / n;
        return m;
    }

    // Standard error of the mean per entry, from the complex sample variance.
    RealField standard_error() const {
        RealField se(sum.size(), 0.0);
        if (count < 2) return se;
        const double n = static_cast<double>(count);
        for (std::size_t j = 0; j < sum.size(); ++j) {
            const double var = std::max(0.0, (sum_abs2[j] - std::norm(sum[j]) / n) / (n - 1.0));
            se[j] = std::sqrt(var / n);
        }
        return se;
    }
};

template <class State>
struct AveragedState {
    State mean;
    RealField stderr_field;
    std::size_t n = 0;
    double mean_sample_norm2 = 0.0;  // average over samples of norm^2 (or trace)

    // sqrt(sum_j stderr_j^2 * measure): the L2 size of the statistical error.
    double stderr_norm() const {
        double s = 0.0;
        for (double e : stderr_field) s += e * e;
        const double dx = mean.grid.dx();
        if constexpr (std::is_same_v<State, DensityMatrix>)
            return std::sqrt(s * dx * dx);
        else
            return std::sqrt(s * dx);
    }
};

namespace detail {

// Applies body(worker_state, first, last) -> Acc to fixed blocks of
// [first, last) on up to `workers` threads and folds the partial results in
// block order.
template <class Acc, class MakeState, class Body>
Acc ordered_block_reduce(std::size_t first, std::size_t last, std::size_t block, unsigned workers, MakeState make_state,
                         Body body) {
    const std::size_t n_blocks = last > first ? (last - first + block - 1) / block : 0;
    Acc total{};
    if (n_blocks == 0) return total;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_blocks)));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex mu;
    std::map<std::size_t, Acc> pending;
    std::size_t next_fold = 0;
    std::exception_ptr error;

    auto run = [&] {
        try {
            auto state = make_state();
            for (;;) {
                if (failed.load()) return;
                const std::size_t b = next.fetch_add(1);
                if (b >= n_blocks) return;
                const std::size_t lo = first + b * block;
                const std::size_t hi = std::min(last, lo + block);
                Acc part = body(state, lo, hi);
                std::lock_guard lock(mu);
                pending.emplace(b, std::move(part));
                for (auto it = pending.find(next_fold); it != pending.end(); it = pending.find(next_fold)) {
                    total.merge(it->second);
                    pending.erase(it);
                    ++next_fold;
                }
            }
        } catch (...) {
            std::lock_guard lock(mu);
            if (!error) error = std::current_exception();
            failed.store(true);
        }
    };

    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run);
        for (auto& t : threads) t.join();
    }
    if (error) std::rethrow_exception(error);
    return total;
}

// An explicit max_concurrency is honoured as given, even above the core count.
inline unsigned worker_count(const EnsembleConfig& ens) {
    if (ens.max_concurrency != 0) return ens.max_concurrency;
    return std::max(1u, std::thread::hardware_concurrency());
}

inline constexpr std::size_t kTrajectoriesPerBlock = 16;

template <class F>
decltype(auto) with_trajectory_index(std::size_t k, F&& f) {
    try {
        return f();
    } catch (const NumericalError& e) {
        throw NumericalError("trajectory " + std::to_string(k) + ": " + e.what());
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Averaged amplitude

// Per-snapshot accumulators of the raw (ungauged) amplitudes.
struct AmplitudeEnsemble {
    std::vector<FieldAccumulator> snapshots;
    std::vector<double> times;
    double sum_sample_norm2 = 0.0;  // at the final time
    std::size_t count = 0;
    std::optional<SpatialGrid> grid;

    void merge(const AmplitudeEnsemble& o) {
        if (snapshots.empty()) {
            *this = o;
            return;
        }
        for (std::size_t s = 0; s < snapshots.size(); ++s) snapshots[s].merge(o.snapshots[s]);
        sum_sample_norm2 += o.sum_sample_norm2;
        count += o.count;
    }

    AveragedState<WaveFunction> state(std::size_t snapshot) const {
        const auto& acc = snapshots.at(snapshot);
        AveragedState<WaveFunction> out{WaveFunction(*grid, acc.mean(), times.at(snapshot)), acc.standard_error(),
                                        acc.count, count ? sum_sample_norm2 / static_cast<double>(count) : 0.0};
        return out;
    }

    AveragedState<WaveFunction> final_state() const { return state(snapshots.size() - 1); }
};

// Trajectories [first, last) of the ensemble defined by ens.master_seed.
// Snapshots at multiples of evo.snapshot_stride plus the final step.
inline AmplitudeEnsemble accumulate_amplitude(const WaveFunction& psi0, const SystemSpec& spec,
                                              const EvolutionConfig& evo, const EnsembleConfig& ens, std::size_t first,
                                              std::size_t last) {
    ens.validate();
    evo.validate();
    spec.validate(psi0.grid);

    std::vector<std::size_t> snap_steps;
    for (std::size_t s = 0; s <= evo.n_steps; s += evo.snapshot_stride) snap_steps.push_back(s);
    if (snap_steps.back() != evo.n_steps) snap_steps.push_back(evo.n_steps);

    auto make_state = [&] { return Propagator(psi0.grid, spec, evo); };
    auto body = [&](Propagator& prop, std::size_t lo, std::size_t hi) {
        AmplitudeEnsemble part;
        part.grid = psi0.grid;
        part.snapshots.assign(snap_steps.size(), FieldAccumulator(psi0.grid.size()));
        for (std::size_t s : snap_steps) part.times.push_back(psi0.time + static_cast<double>(s) * evo.dt);
        for (std::size_t k = lo; k < hi; ++k) {
            detail::with_trajectory_index(k, [&] {
                const NoiseRealization noise = sample_noise(trajectory_seed(ens.master_seed, k), evo, spec.sigma2, psi0.time);
                WaveFunction psi = psi0;
                std::size_t next_snap = 0;
                for (std::size_t step = 0;; ++step) {
                    if (next_snap < snap_steps.size() && snap_steps[next_snap] == step)
                        part.snapshots[next_snap++].add(psi.values);
                    if (step == evo.n_steps) break;
                    prop.step_stochastic(psi, noise.increments[step]);
                }
                const double n2 = norm2(psi);
                if (!std::isfinite(n2)) throw NumericalError("non-finite state", static_cast<long>(evo.n_steps));
                part.sum_sample_norm2 += n2;
                ++part.count;
            });
        }
        return part;
    };
    auto total = detail::ordered_block_reduce<AmplitudeEnsemble>(first, last, detail::kTrajectoriesPerBlock,
                                                                 detail::worker_count(ens), make_state, body);
    if (total.snapshots.empty()) {
        total.grid = psi0.grid;
    }
    return total;
}

inline AveragedState<WaveFunction> average_amplitude(const WaveFunction& psi0, const SystemSpec& spec,
                                                     const EvolutionConfig& evo, const EnsembleConfig& ens) {
    return accumulate_amplitude(psi0, spec, evo, ens, 0, ens.n_realizations).final_state();
}

// ---------------------------------------------------------------------------
// Averaged density matrix

// One component of rho0 = sum_k weight_k |psi_k><psi_k|.
struct WeightedState {
    double weight = 1.0;
    WaveFunction psi;
};

struct DensityEnsemble {
    FieldAccumulator field;
    double sum_sample_trace = 0.0;
    std::optional<SpatialGrid> grid;
    double time = 0.0;

    void merge(const DensityEnsemble& o) {
        if (field.sum.empty()) {
            *this = o;
            return;
        }
        field.merge(o.field);
        sum_sample_trace += o.sum_sample_trace;
    }

    AveragedState<DensityMatrix> state() const {
        const double n = static_cast<double>(field.count);
        return {DensityMatrix(*grid, field.mean(), time), field.standard_error(), field.count,
                field.count ? sum_sample_trace / n : 0.0};
    }
};

inline DensityEnsemble accumulate_density(std::span<const WeightedState> rho0, const SystemSpec& spec,
                                          const EvolutionConfig& evo, const EnsembleConfig& ens, std::size_t first,
                                          std::size_t last) {
    ens.validate();
    evo.validate();
    if (rho0.empty()) throw ConfigError("average_density: empty initial state");
    const SpatialGrid& grid = rho0.front().psi.grid;
    for (const auto& c : rho0) {
        require_same_grid(c.psi.grid, grid);
        if (!(c.weight >= 0.0)) throw ConfigError("average_density: negative weight");
    }
    spec.validate(grid);
    const std::size_t n = grid.size();
    const double t0 = rho0.front().psi.time;

    auto make_state = [&] { return Propagator(grid, spec, evo); };
    auto body = [&](Propagator& prop, std::size_t lo, std::size_t hi) {
        DensityEnsemble part;
        part.grid = grid;
        part.time = t0 + static_cast<double>(evo.n_steps) * evo.dt;
        part.field = FieldAccumulator(n * n);
        ComplexField sample(n * n);
        for (std::size_t k = lo; k < hi; ++k) {
            detail::with_trajectory_index(k, [&] {
                const NoiseRealization noise = sample_noise(trajectory_seed(ens.master_seed, k), evo, spec.sigma2, t0);
                if (rho0.size() == 1 && rho0.front().weight == 1.0) {
                    WaveFunction psi = rho0.front().psi;
                    for (std::size_t s = 0; s < evo.n_steps; ++s) prop.step_stochastic(psi, noise.increments[s]);
                    const double n2 = norm2(psi);
                    if (!std::isfinite(n2)) throw NumericalError("non-finite state", static_cast<long>(evo.n_steps));
                    part.field.add_outer(psi.values);
                    part.sum_sample_trace += n2;
                    return;
                }
                std::fill(sample.begin(), sample.end(), Complex(0.0));
                double tr = 0.0;
                for (const auto& c : rho0) {
                    WaveFunction psi = c.psi;
                    for (std::size_t s = 0; s < evo.n_steps; ++s) prop.step_stochastic(psi, noise.increments[s]);
                    for (std::size_t f = 0; f < n; ++f)
                        for (std::size_t i = 0; i < n; ++i) sample[f * n + i] += c.weight * psi.values[f] * std::conj(psi.values[i]);
                    tr += c.weight * norm2(psi);
                }
                if (!std::isfinite(tr)) throw NumericalError("non-finite state", static_cast<long>(evo.n_steps));
                part.field.add(sample);
                part.sum_sample_trace += tr;
            });
        }
        return part;
    };
    auto total = detail::ordered_block_reduce<DensityEnsemble>(first, last, detail::kTrajectoriesPerBlock,
                                                               detail::worker_count(ens), make_state, body);
    if (!total.grid) total.grid = grid;
    return total;
}

inline AveragedState<DensityMatrix> average_density(std::span<const WeightedState> rho0, const SystemSpec& spec,
                                                    const EvolutionConfig& evo, const EnsembleConfig& ens) {
    return accumulate_density(rho0, spec, evo, ens, 0, ens.n_realizations).state();
}

inline AveragedState<DensityMatrix> average_density(const WaveFunction& psi0, const SystemSpec& spec,
                                                    const EvolutionConfig& evo, const EnsembleConfig& ens) {
    const WeightedState pure{1.0, psi0};
    return average_density(std::span<const WeightedState>(&pure, 1), spec, evo, ens);
}

}  // namespace noisyqd
