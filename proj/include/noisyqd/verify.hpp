#pragma once

// Cross-checks of the library against independent oracles. Each criterion
// runs at its stated scale and tolerance and reports what it measured.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "noisyqd/core.hpp"
#include "noisyqd/ensemble.hpp"
#include "noisyqd/master.hpp"
#include "noisyqd/oscillator.hpp"
#include "noisyqd/propagation.hpp"

namespace noisyqd {

struct CriterionResult {
    std::string name;
    bool passed = false;
    std::string detail;
    nlohmann::json metrics = nlohmann::json::object();
};

struct VerifyOptions {
    std::optional<std::size_t> realizations;  // replaces the ensemble sizes below when set
    std::uint64_t master_seed = kDefaultMasterSeed;
    unsigned max_concurrency = 0;
};

namespace verify_detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

inline SystemSpec noisy_oscillator(double omega, double noise_strength) {
    SystemSpec s;
    s.potential = HarmonicPotential{omega};
    s.coupling_lambda = 1.0;
    s.sigma2 = Schedule::constant(noise_strength);
    return s;
}

inline EvolutionConfig steps(double dt, std::size_t n) {
    EvolutionConfig c;
    c.dt = dt;
    c.n_steps = n;
    c.snapshot_stride = n;
    return c;
}

inline double l2(const WaveFunction& a, const WaveFunction& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.values.size(); ++j) s += std::norm(a.values[j] - b.values[j]);
    return std::sqrt(s * a.grid.dx());
}

inline double relative_l2(const WaveFunction& a, const WaveFunction& ref) {
    return l2(a, ref) / std::sqrt(norm2(ref));
}

// Least-squares slope and R^2 of y against x.
struct LineFit {
    double slope;
    double r2;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k], sy += y[k], sxx += x[k] * x[k], sxy += x[k] * y[k], syy += y[k] * y[k];
    }
    const double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n, cyy = syy - sy * sy / n;
    return {cxy / cxx, cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 1.0};
}

}  // namespace verify_detail

// lambda = 1, x = 1, sigma^2 = 1, dt = 0.01, 1e5 draws: z < 4.
inline CriterionResult verify_gaussian_identity(const VerifyOptions& o = {}) {
    const auto r = noise_characteristic_check(1.0, 0.01, 1.0, 1.0, 100000, o.master_seed);
    CriterionResult c{"gaussian_identity", r.z_score < 4.0, {}, {}};
    c.metrics = {{"empirical_re", r.empirical.real()}, {"empirical_im", r.empirical.imag()}, {"exact", r.exact},
                 {"standard_error", r.standard_error}, {"z_score", r.z_score}, {"threshold", 4.0}};
    c.detail = "z = " + verify_detail::fmt(r.z_score) + " (< 4)";
    return c;
}

// Noise-averaged amplitude vs the effective non-Hermitian evolution.
inline CriterionResult verify_amplitude_equivalence(const VerifyOptions& o = {}) {
    using namespace verify_detail;
    const SpatialGrid g(-8.0, 8.0, 512);
    const auto spec = noisy_oscillator(1.0, 0.2);
    const auto evo = steps(1e-3, 2000);
    const auto psi0 = harmonic_ground_state(g, 1.0, 1.0);
    EnsembleConfig ens;
    ens.n_realizations = o.realizations.value_or(10000);
    ens.master_seed = o.master_seed;
    ens.max_concurrency = o.max_concurrency;
    const std::size_t quarter = ens.n_realizations / 4;

    auto acc = accumulate_amplitude(psi0, spec, evo, ens, 0, quarter);
    const auto small = acc.final_state();
    acc.merge(accumulate_amplitude(psi0, spec, evo, ens, quarter, ens.n_realizations));
    const auto full = acc.final_state();
    const auto exact = evolve(psi0, spec, evo).snapshots.back();

    const double dist = l2(full.mean, exact);
    const double se = full.stderr_norm();
    const double ratio = small.stderr_norm() / se;
    const bool ok_dist = dist < 5.0 * se;
    const bool ok_ratio = std::abs(ratio - 2.0) <= 0.5;
    CriterionResult c{"amplitude_equivalence", ok_dist && ok_ratio, {}, {}};
    c.metrics = {{"n", full.n},          {"n_quarter", small.n},   {"l2_distance", dist},
                 {"stderr_norm", se},    {"distance_over_stderr", dist / se},
                 {"stderr_ratio", ratio}, {"mean_sample_norm2", full.mean_sample_norm2},
                 {"norm2_of_mean", norm2(full.mean)}};
    c.detail = "L2 = " + fmt(dist / se) + " x stderr (< 5); stderr(n/4)/stderr(n) = " + fmt(ratio) + " (2 +- 0.5)";
    return c;
}

// Gain on: trace conserved. Gain off: trace decays at -lambda^2 sigma^2 <x^2>_diag.
inline CriterionResult verify_dissipation_fluctuation(const VerifyOptions& = {}) {
    using namespace verify_detail;
    const SpatialGrid g(-8.0, 8.0, 256);
    const double rate = 0.2;
    const auto spec = noisy_oscillator(1.0, rate);
    const auto rho0 = DensityMatrix::pure(harmonic_ground_state(g, 1.0, 1.0));
    MasterConfig mc;
    mc.dt = 1e-3;
    const std::size_t n_steps = 2000;

    double worst_trace = 0.0;
    {
        mc.include_gain = true;
        LiouvillePropagator prop(g, spec, mc);
        DensityMatrix rho = rho0;
        for (std::size_t s = 0; s < n_steps; ++s) {
            prop.step(rho);
            worst_trace = std::max(worst_trace, std::abs(rho.trace() - 1.0));
        }
    }

    std::vector<double> tr, x2;
    {
        mc.include_gain = false;
        LiouvillePropagator prop(g, spec, mc);
        DensityMatrix rho = rho0;
        auto record = [&] {
            const RealField d = rho.diagonal();
            double t = 0.0, m2 = 0.0;
            for (std::size_t j = 0; j < g.size(); ++j) t += d[j], m2 += g.x(j) * g.x(j) * d[j];
            tr.push_back(t * g.dx());
            x2.push_back(m2 / t);
        };
        record();
        for (std::size_t s = 0; s < n_steps; ++s) {
            prop.step(rho);
            record();
        }
    }
    bool monotone = true;
    for (std::size_t k = 1; k < tr.size(); ++k) monotone = monotone && tr[k] < tr[k - 1];
    double worst_rel = 0.0;
    for (std::size_t k = 1; k + 1 < tr.size(); ++k) {
        const double dlog = (std::log(tr[k + 1]) - std::log(tr[k - 1])) / (2.0 * mc.dt);
        const double model = -rate * x2[k];
        worst_rel = std::max(worst_rel, std::abs(dlog - model) / std::abs(model));
    }
    const bool ok = worst_trace <= 1e-6 && monotone && worst_rel < 0.02;
    CriterionResult c{"dissipation_fluctuation", ok, {}, {}};
    c.metrics = {{"gain_on_max_trace_error", worst_trace}, {"gain_off_monotone", monotone},
                 {"gain_off_final_trace", tr.back()},       {"log_derivative_max_rel_error", worst_rel}};
    c.detail = "gain on |tr-1| <= " + fmt(worst_trace) + " (1e-6); gain off monotone=" + (monotone ? "yes" : "no") +
               ", log-derivative rel. error " + fmt(worst_rel) + " (< 0.02)";
    return c;
}

// Averaged density matrix vs gain-on master evolution at t = 2.
inline CriterionResult verify_ensemble_master(const VerifyOptions& o = {}) {
    // Box kept at |x| <= 5 so every exact entry sits well above the ~1e-14
    // roundoff floor of the 2D FFT; further out the reference is noise.
    const SpatialGrid g(-5.0, 5.0, 128);
    const auto spec = verify_detail::noisy_oscillator(1.0, 0.2);
    const auto psi0 = harmonic_ground_state(g, 1.0, 1.0);
    const std::size_t n_steps = 2000;
    const double dt = 1e-3;
    EnsembleConfig ens;
    ens.n_realizations = o.realizations.value_or(10000);
    ens.master_seed = o.master_seed;
    ens.max_concurrency = o.max_concurrency;
    const auto avg = average_density(psi0, spec, verify_detail::steps(dt, n_steps), ens);

    MasterConfig mc;
    mc.dt = dt;
    LiouvillePropagator prop(g, spec, mc);
    DensityMatrix rho = DensityMatrix::pure(psi0);
    for (std::size_t s = 0; s < n_steps; ++s) prop.step(rho);

    std::size_t within = 0;
    double worst_z = 0.0;
    for (std::size_t k = 0; k < rho.values.size(); ++k) {
        const double diff = std::abs(avg.mean.values[k] - rho.values[k]);
        if (diff <= 4.0 * avg.stderr_field[k]) ++within;
        if (avg.stderr_field[k] > 0.0) worst_z = std::max(worst_z, diff / avg.stderr_field[k]);
    }
    const double fraction = static_cast<double>(within) / static_cast<double>(rho.values.size());
    CriterionResult c{"ensemble_master", fraction >= 0.95, {}, {}};
    c.metrics = {{"n", avg.n},
                 {"fraction_within_4_stderr", fraction},
                 {"max_z", worst_z},
                 {"ensemble_trace", avg.mean.trace().real()},
                 {"master_trace", rho.trace().real()},
                 {"ensemble_purity", avg.mean.purity()},
                 {"master_purity", rho.purity()}};
    c.detail = verify_detail::fmt(100.0 * fraction) + "% of entries within 4 stderr (>= 95%)";
    return c;
}

// Grid evolution vs quadrature of the closed-form propagator, Omega = 1 - 0.2i, t = 2.
inline CriterionResult verify_propagator_fidelity(const VerifyOptions& o = {}) {
    using namespace verify_detail;
    const ComplexFrequency f{1.0, 0.2};
    const Complex w2 = f.squared();  // omega^2 - i lambda^2 sigma^2
    const double omega = std::sqrt(w2.real());
    const double noise = -w2.imag();
    const SpatialGrid g(-8.0, 8.0, 256);
    const double t = 2.0;
    const auto psi0 = gaussian_packet(g, 0.5, 0.3);
    const auto spec = noisy_oscillator(omega, noise);

    WaveFunction exact(g);
    for (std::size_t a = 0; a < g.size(); ++a) {
        Complex s = 0.0;
        for (std::size_t b = 0; b < g.size(); ++b) s += ho_propagator(1.0, f, g.x(a), g.x(b), t) * psi0.values[b];
        exact.values[a] = s * g.dx();
    }
    auto grid_error = [&](double dt) {
        const auto n = static_cast<std::size_t>(std::lround(t / dt));
        return relative_l2(evolve(psi0, spec, steps(dt, n)).snapshots.back(), exact);
    };
    const double e_fine = grid_error(1e-3);
    const double e_coarse = grid_error(0.04);
    const double e_half = grid_error(0.02);
    const double ratio = e_coarse / e_half;

    std::mt19937_64 rng(o.master_seed);
    std::uniform_real_distribution<double> tt(0.3, 1.2), xx(-1.0, 1.0);
    double worst_semigroup = 0.0;
    for (int draw = 0; draw < 10; ++draw) {
        const double t1 = tt(rng), t2 = tt(rng), xa = xx(rng), xb = xx(rng);
        const double L = 15.0;
        const int nq = 24000;
        const double h = 2.0 * L / nq;
        Complex s = 0.0;
        for (int q = 0; q <= nq; ++q) {
            const double y = -L + q * h;
            s += ((q == 0 || q == nq) ? 0.5 : 1.0) * ho_propagator(1.0, f, xb, y, t2) * ho_propagator(1.0, f, y, xa, t1);
        }
        const Complex direct = ho_propagator(1.0, f, xb, xa, t1 + t2);
        worst_semigroup = std::max(worst_semigroup, std::abs(s * h - direct) / std::abs(direct));
    }
    const bool ok = e_fine < 1e-4 && std::abs(ratio - 4.0) <= 1.2 && worst_semigroup < 1e-6;
    CriterionResult c{"propagator_fidelity", ok, {}, {}};
    c.metrics = {{"relative_l2_dt_1e-3", e_fine},
                 {"relative_l2_dt_0.04", e_coarse},
                 {"relative_l2_dt_0.02", e_half},
                 {"halving_ratio", ratio},
                 {"semigroup_max_rel_error", worst_semigroup}};
    c.detail = "rel. L2 " + fmt(e_fine) + " (< 1e-4); dt-halving ratio " + fmt(ratio) + " (4 +- 1.2); semigroup " +
               fmt(worst_semigroup) + " (< 1e-6)";
    return c;
}

// Point-source state vs its large-time form at omega2 t = 5 over |x| <= 2 depth.
inline CriterionResult verify_asymptotics(const VerifyOptions& = {}) {
    double worst = 0.0;
    nlohmann::json per = nlohmann::json::array();
    for (const ComplexFrequency f : {ComplexFrequency{1.0, 0.2}, ComplexFrequency{1.0, 1.0}}) {
        const double t = 5.0 / f.omega2;
        const double reach = 2.0 * localisation_scales(1.0, f).depth;
        double w = 0.0;
        for (int a = 0; a <= 400; ++a) {
            const double x = -reach + 2.0 * reach * a / 400.0;
            const Complex exact = point_source_psi(1.0, f, x, t);
            w = std::max(w, std::abs(asymptotic_psi(1.0, f, x, t) - exact) / std::abs(exact));
        }
        per.push_back({{"omega1", f.omega1}, {"omega2", f.omega2}, {"sup_rel_error", w}});
        worst = std::max(worst, w);
    }
    CriterionResult c{"asymptotics", worst < 0.01, {}, {}};
    c.metrics = {{"cases", per}, {"sup_rel_error", worst}};
    c.detail = "sup rel. error " + verify_detail::fmt(worst) + " (< 0.01)";
    return c;
}

// Sign of the fitted x^2 coefficient of log|psi|^2 vs localization_condition.
inline CriterionResult verify_localization(const VerifyOptions& o = {}) {
    std::mt19937_64 rng(o.master_seed);
    std::uniform_real_distribution<double> w1(0.2, 2.0), w2(0.05, 1.5);
    std::vector<ComplexFrequency> draws;
    for (int k = 0; k < 5; ++k) draws.push_back({w1(rng), w2(rng)});
    std::size_t agree = 0, total = 0;
    auto fitted_sign_negative = [](const ComplexFrequency& f, double t) {
        std::vector<double> u, y;
        const double reach = localisation_scales(1.0, f).depth;
        for (int a = 0; a <= 40; ++a) {
            const double x = -reach + 2.0 * reach * a / 40.0;
            u.push_back(x * x);
            y.push_back(std::log(std::norm(point_source_psi(1.0, f, x, t))));
        }
        return verify_detail::fit_line(u, y).slope < 0.0;
    };
    for (const auto& f : draws)
        for (int k = 1; k <= 100; ++k) {
            const double t = 0.1 * k;
            agree += fitted_sign_negative(f, t) == localization_condition(f, t);
            ++total;
        }
    const ComplexFrequency equal{1.0, 1.0};
    bool equal_all = true;
    for (int k = 1; k <= 100; ++k) equal_all = equal_all && localization_condition(equal, 0.1 * k) && fitted_sign_negative(equal, 0.1 * k);

    nlohmann::json omegas = nlohmann::json::array();
    for (const auto& f : draws) omegas.push_back({f.omega1, f.omega2});
    CriterionResult c{"localization", agree == total && equal_all, {}, {}};
    c.metrics = {{"agreements", agree}, {"total", total}, {"equal_parts_all_t", equal_all}, {"draws", omegas}};
    c.detail = std::to_string(agree) + "/" + std::to_string(total) + " sign agreements; omega1 = omega2 localised for all t: " +
               (equal_all ? "yes" : "no");
    return c;
}

// Library scalars against direct evaluation of their closed forms.
inline CriterionResult verify_closed_form_scalars(const VerifyOptions& = {}) {
    double worst = 0.0;
    auto check = [&](double got, double want) {
        worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    };
    for (const double m : {1.0, 2.5})
        for (const auto& [omega, noise] : {std::pair{1.0, 0.4}, std::pair{0.0, 2.0}, std::pair{1.7, 0.3}, std::pair{0.5, 3.0}}) {
            const ComplexFrequency f = complex_frequency(omega, noise);
            const Complex sq = f.squared();
            check(sq.real(), omega * omega);
            check(sq.imag(), -noise);
            const auto sc = localisation_scales(m, f);
            check(sc.tau, 2.0 / f.omega2);
            check(sc.depth, std::sqrt(2.0 / (m * f.omega1)));
            check(coherent_uncertainty(f), 0.5 * std::sqrt(1.0 + (f.omega2 / f.omega1) * (f.omega2 / f.omega1)));
            const double g1 = spectrum(1, f, WidthConvention::stable_ground).width;
            check(g1, 2.0 * f.omega2);
            check(spectrum(2, f, WidthConvention::stable_ground).width, 2.0 * g1);
            check(spectrum(3, f, WidthConvention::stable_ground).width, 3.0 * g1);
            check(spectrum(0, f, WidthConvention::stable_ground).width, 0.0);
            for (int n = 0; n < 4; ++n) {
                check(spectrum(n, f, WidthConvention::full).width, (2.0 * n + 1.0) * f.omega2);
                check(spectrum(n, f, WidthConvention::full).energy_re, (n + 0.5) * f.omega1);
            }
        }
    CriterionResult c{"closed_form_scalars", worst <= 1e-12, {}, {}};
    c.metrics = {{"max_rel_error", worst}};
    c.detail = "max rel. error " + verify_detail::fmt(worst) + " (<= 1e-12)";
    return c;
}

// Late-time envelope of |J_R(0.5, t)|: monotone, log-linear, steeper for larger sigma^2.
inline CriterionResult verify_current_envelope(const VerifyOptions& = {}) {
    const SpatialGrid g(-8.0, 8.0, 256);
    const double dt = 2e-3, t_end = 40.0, late = 15.0, window = kPi;
    const double probe[] = {0.5};
    std::vector<double> slopes;
    bool all_ok = true;
    nlohmann::json per = nlohmann::json::array();
    for (double s2 : {0.1, 0.5, 1.0}) {
        const auto spec = verify_detail::noisy_oscillator(1.0, s2);
        const auto tr = evolve(harmonic_ground_state(g, 1.0, 1.0), spec,
                               verify_detail::steps(dt, static_cast<std::size_t>(std::lround(t_end / dt))), nullptr, probe);
        std::vector<double> centers, log_env;
        for (double a = late; a + window <= t_end + 1e-9; a += window) {
            double env = 0.0;
            for (std::size_t k = 0; k < tr.times.size(); ++k)
                if (tr.times[k] >= a && tr.times[k] < a + window) env = std::max(env, std::abs(tr.current[0][k]));
            centers.push_back(a + 0.5 * window);
            log_env.push_back(std::log(env));
        }
        bool monotone = true;
        for (std::size_t w = 1; w < log_env.size(); ++w) monotone = monotone && log_env[w] < log_env[w - 1];
        const auto fit = verify_detail::fit_line(centers, log_env);
        const bool ok = monotone && fit.slope < 0.0 && fit.r2 >= 0.99;
        all_ok = all_ok && ok;
        slopes.push_back(fit.slope);
        per.push_back({{"sigma2", s2},
                       {"omega2", complex_frequency(1.0, s2).omega2},
                       {"slope", fit.slope},
                       {"r2", fit.r2},
                       {"monotone", monotone},
                       {"windows", centers.size()}});
    }
    const bool ordered = -slopes[0] < -slopes[1] && -slopes[1] < -slopes[2];
    CriterionResult c{"current_envelope", all_ok && ordered, {}, {}};
    c.metrics = {{"cases", per}, {"slopes_increase_with_sigma2", ordered}, {"r2_threshold", 0.99}};
    c.detail = "envelope slopes " + verify_detail::fmt(slopes[0]) + ", " + verify_detail::fmt(slopes[1]) + ", " +
               verify_detail::fmt(slopes[2]) + " (negative, log-linear R^2 >= 0.99, increasing in magnitude)";
    return c;
}

// ---------------------------------------------------------------------------

struct CriterionEntry {
    const char* name;
    CriterionResult (*run)(const VerifyOptions&);
};

inline const std::vector<CriterionEntry>& criteria_table() {
    static const std::vector<CriterionEntry> table = {
        {"gaussian_identity", verify_gaussian_identity},
        {"amplitude_equivalence", verify_amplitude_equivalence},
        {"dissipation_fluctuation", verify_dissipation_fluctuation},
        {"ensemble_master", verify_ensemble_master},
        {"propagator_fidelity", verify_propagator_fidelity},
        {"asymptotics", verify_asymptotics},
        {"localization", verify_localization},
        {"closed_form_scalars", verify_closed_form_scalars},
        {"current_envelope", verify_current_envelope},
    };
    return table;
}

// The sampling-vs-exact checks run by `verify` when no criteria are named.
inline std::vector<std::string> cross_module_criteria() {
    return {"gaussian_identity", "amplitude_equivalence", "ensemble_master"};
}

inline CriterionResult run_criterion(const std::string& name, const VerifyOptions& o = {}) {
    for (const auto& e : criteria_table())
        if (name == e.name) return e.run(o);
    throw ConfigError("unknown verification criterion '" + name + "'");
}

inline nlohmann::json to_json(const CriterionResult& r) {
    return {{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"metrics", r.metrics}};
}

}  // namespace noisyqd
