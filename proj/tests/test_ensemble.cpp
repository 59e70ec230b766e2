#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "noisyqd/ensemble.hpp"

using namespace noisyqd;

namespace {

SystemSpec harmonic(double noise_strength) {
    SystemSpec s;
    s.potential = HarmonicPotential{1.0};
    s.coupling_lambda = 1.0;
    s.sigma2 = Schedule::constant(noise_strength);
    return s;
}

EvolutionConfig evo(double dt, std::size_t steps) {
    EvolutionConfig c;
    c.dt = dt;
    c.n_steps = steps;
    c.snapshot_stride = steps;
    return c;
}

EnsembleConfig ens(std::size_t n, unsigned workers = 1, std::uint64_t seed = kDefaultMasterSeed) {
    EnsembleConfig e;
    e.n_realizations = n;
    e.master_seed = seed;
    e.max_concurrency = workers;
    return e;
}

double sample_variance(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / (n - 1.0);
}

double l2_distance(const WaveFunction& a, const WaveFunction& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.values.size(); ++j) s += std::norm(a.values[j] - b.values[j]);
    return std::sqrt(s * a.grid.dx());
}

}  // namespace

// ---------------------------------------------------------------------------

TEST(SampleNoise, SameSeedSameIncrements) {
    const auto cfg = evo(0.01, 1000);
    const auto a = sample_noise(42, cfg, Schedule::constant(1.0));
    const auto b = sample_noise(42, cfg, Schedule::constant(1.0));
    const auto c = sample_noise(43, cfg, Schedule::constant(1.0));
    EXPECT_EQ(a.increments, b.increments);
    EXPECT_NE(a.increments, c.increments);
    EXPECT_EQ(a.steps(), 1000u);
}

TEST(SampleNoise, TrajectorySeedsAreDistinctAndStable) {
    EXPECT_EQ(trajectory_seed(1, 7), trajectory_seed(1, 7));
    EXPECT_NE(trajectory_seed(1, 7), trajectory_seed(1, 8));
    EXPECT_NE(trajectory_seed(1, 7), trajectory_seed(2, 7));
    EXPECT_NE(trajectory_seed(1ULL << 32, 0), trajectory_seed(1, 0));
}

// Oracle: for 1e6 unit-variance normals the sample variance has standard
// deviation sqrt(2/1e6) = 1.4e-3, so [0.995, 1.005] is a 3.5-sigma band.
TEST(SampleNoise, VarianceMatchesSigma2) {
    const double dt = 0.01;
    const auto noise = sample_noise(2024, evo(dt, 1000000), Schedule::constant(1.0));
    RealField scaled(noise.increments.size());
    for (std::size_t n = 0; n < scaled.size(); ++n) scaled[n] = noise.increments[n] / std::sqrt(dt);
    const double v = sample_variance(scaled);
    EXPECT_GE(v, 0.995);
    EXPECT_LE(v, 1.005);
}

TEST(SampleNoise, PiecewiseScheduleSegments) {
    const double dt = 0.01;
    const std::size_t per = 100000;
    const auto sched = Schedule::piecewise({0.0, per * dt, 2 * per * dt}, {1.0, 4.0});
    const auto noise = sample_noise(5, evo(dt, 2 * per), sched);
    RealField a(per), b(per);
    for (std::size_t n = 0; n < per; ++n) {
        a[n] = noise.increments[n] / std::sqrt(dt);
        b[n] = noise.increments[per + n] / std::sqrt(dt);
    }
    EXPECT_NEAR(sample_variance(a) / 1.0, 1.0, 0.02);
    EXPECT_NEAR(sample_variance(b) / 4.0, 1.0, 0.02);
    EXPECT_EQ(noise.variance.front(), 1.0);
    EXPECT_EQ(noise.variance.back(), 4.0);
}

// ---------------------------------------------------------------------------

TEST(CharacteristicCheck, ZeroCouplingPointIsExact) {
    const auto r = noise_characteristic_check(0.0, 0.01, 1.0, 1.0, 1000);
    EXPECT_EQ(r.empirical, Complex(1.0));
    EXPECT_EQ(r.exact, 1.0);
    EXPECT_EQ(r.z_score, 0.0);
}

TEST(CharacteristicCheck, ExactValueAndAgreement) {
    const auto r = noise_characteristic_check(1.0, 0.01, 1.0, 1.0, 100000);
    EXPECT_NEAR(r.exact, std::exp(-0.005), 1e-15);
    EXPECT_NEAR(r.exact, 0.995012, 1e-6);
    EXPECT_LT(r.z_score, 4.0);
    EXPECT_GT(r.standard_error, 0.0);
}

TEST(CharacteristicCheck, ExponentDependsOnXSquaredDt) {
    const auto a = noise_characteristic_check(2.0, 0.01, 0.7, 1.3, 1000);
    const auto b = noise_characteristic_check(1.0, 0.04, 0.7, 1.3, 1000);
    EXPECT_NEAR(a.exact, b.exact, 1e-15);
}

TEST(CharacteristicCheck, RejectsTooFewDraws) {
    EXPECT_THROW(noise_characteristic_check(1.0, 0.01, 1.0, 1.0, 999), ConfigError);
}

// ---------------------------------------------------------------------------

TEST(AverageAmplitude, DegenerateEnsembleIsNoiselessEvolution) {
    SpatialGrid g(-8.0, 8.0, 128);
    const auto psi0 = gaussian_packet(g, 0.7, 0.8, 0.4);
    const auto cfg = evo(2e-3, 300);
    const auto avg = average_amplitude(psi0, harmonic(0.0), cfg, ens(1));
    const auto ref = evolve(psi0, harmonic(0.0), cfg).snapshots.back();
    EXPECT_EQ(avg.n, 1u);
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_LT(std::abs(avg.mean.values[j] - ref.values[j]), 1e-14);
    for (double e : avg.stderr_field) EXPECT_EQ(e, 0.0);
}

TEST(AverageAmplitude, BitwiseIndependentOfConcurrency) {
    SpatialGrid g(-6.0, 6.0, 64);
    const auto psi0 = harmonic_ground_state(g, 1.0, 1.0);
    const auto cfg = evo(5e-3, 100);
    const auto a = average_amplitude(psi0, harmonic(0.3), cfg, ens(53, 1));
    const auto b = average_amplitude(psi0, harmonic(0.3), cfg, ens(53, 3));
    const auto c = average_amplitude(psi0, harmonic(0.3), cfg, ens(53, 7));
    EXPECT_EQ(a.mean.values, b.mean.values);
    EXPECT_EQ(a.mean.values, c.mean.values);
    EXPECT_EQ(a.stderr_field, c.stderr_field);
    const auto d = average_amplitude(psi0, harmonic(0.3), cfg, ens(53, 1, 99));
    EXPECT_NE(a.mean.values, d.mean.values);
}

TEST(AverageAmplitude, SplitRangesMergeToFullEnsemble) {
    SpatialGrid g(-6.0, 6.0, 64);
    const auto psi0 = harmonic_ground_state(g, 1.0, 1.0);
    const auto cfg = evo(5e-3, 100);
    auto part = accumulate_amplitude(psi0, harmonic(0.3), cfg, ens(64), 0, 32);
    part.merge(accumulate_amplitude(psi0, harmonic(0.3), cfg, ens(64), 32, 64));
    const auto whole = average_amplitude(psi0, harmonic(0.3), cfg, ens(64));
    const auto merged = part.final_state();
    EXPECT_EQ(merged.n, 64u);
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(std::abs(merged.mean.values[j] - whole.mean.values[j]), 0.0, 1e-14);
}

// Oracle: the effective non-Hermitian evolution from the propagation module.
TEST(AverageAmplitude, AgreesPointwiseWithEffectiveEvolution) {
    SpatialGrid g(-6.0, 6.0, 96);
    const auto psi0 = harmonic_ground_state(g, 1.0, 1.0);
    const auto cfg = evo(4e-3, 250);
    const auto spec = harmonic(0.4);
    const auto avg = average_amplitude(psi0, spec, cfg, ens(800));
    const auto exact = evolve(psi0, spec, cfg).snapshots.back();
    std::size_t within = 0;
    for (std::size_t j = 0; j < g.size(); ++j)
        if (std::abs(avg.mean.values[j] - exact.values[j]) <= 3.0 * avg.stderr_field[j]) ++within;
    EXPECT_GE(static_cast<double>(within), 0.95 * g.size());
    EXPECT_LT(l2_distance(avg.mean, exact), 5.0 * avg.stderr_norm());
}

TEST(AverageAmplitude, StandardErrorScalesAsInverseRootN) {
    SpatialGrid g(-6.0, 6.0, 64);
    const auto psi0 = harmonic_ground_state(g, 1.0, 1.0);
    const auto cfg = evo(5e-3, 200);
    const auto spec = harmonic(0.3);
    const auto small = average_amplitude(psi0, spec, cfg, ens(250));
    const auto large = average_amplitude(psi0, spec, cfg, ens(1000));
    EXPECT_NEAR(small.stderr_norm() / large.stderr_norm(), 2.0, 0.5);
}

// Each trajectory is unitary; only the average loses norm.
TEST(AverageAmplitude, DissipationLivesInTheAverage) {
    SpatialGrid g(-8.0, 8.0, 128);
    const auto psi0 = harmonic_ground_state(g, 1.0, 1.0);
    const auto cfg = evo(4e-3, 500);
    const auto spec = harmonic(0.2);
    const auto avg = average_amplitude(psi0, spec, cfg, ens(400));
    const double delta = 1.0 - evolve(psi0, spec, cfg).norm2.back();
    EXPECT_GT(delta, 0.1);
    EXPECT_NEAR(avg.mean_sample_norm2, 1.0, 1e-10);
    EXPECT_LT(norm2(avg.mean), 1.0 - 0.5 * delta);
}

TEST(AverageAmplitude, FailingTrajectoryIsNamed) {
    SpatialGrid g(-4.0, 4.0, 32);
    SystemSpec s;
    RealField v(g.size(), 0.0);
    v[3] = std::nan("");
    s.potential = TabulatedPotential{v};
    try {
        average_amplitude(harmonic_ground_state(g, 1.0, 1.0), s, evo(1e-2, 5), ens(4));
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("trajectory 0"), std::string::npos);
    }
}

// ---------------------------------------------------------------------------

TEST(AverageDensity, DegenerateEnsembleIsPureProjector) {
    SpatialGrid g(-6.0, 6.0, 48);
    const auto psi0 = gaussian_packet(g, 0.5, 0.9, 0.3);
    const auto avg = average_density(psi0, harmonic(0.0), evo(5e-3, 100), ens(1));
    EXPECT_NEAR(avg.mean.purity(), 1.0, 1e-8);
    EXPECT_NEAR(avg.mean.trace().real(), 1.0, 1e-8);
}

TEST(AverageDensity, TraceKeptHermitianAndCoherencesDecay) {
    SpatialGrid g(-6.0, 6.0, 48);
    const auto psi0 = harmonic_ground_state(g, 1.0, 1.0);
    const auto spec = harmonic(0.5);
    // x_f ~ +1, x_i ~ -1
    const std::size_t f = 31, i = g.size() - 1 - f;
    double previous = std::abs(DensityMatrix::pure(psi0).values[f * g.size() + i]);
    for (std::size_t steps : {40, 80, 160}) {
        const auto avg = average_density(psi0, spec, evo(5e-3, steps), ens(300));
        EXPECT_NEAR(avg.mean.trace().real(), 1.0, 1e-10);
        EXPECT_NEAR(avg.mean.trace().imag(), 0.0, 1e-12);
        EXPECT_LT(avg.mean.hermiticity_defect(), 1e-14);
        const double coherence = std::abs(avg.mean.values[f * g.size() + i]);
        EXPECT_LT(coherence, previous) << "steps " << steps;
        previous = coherence;
    }
}

TEST(AverageDensity, WeightedMixtureOfOrthogonalStates) {
    SpatialGrid g(-6.0, 6.0, 64);
    const auto ground = harmonic_ground_state(g, 1.0, 1.0);
    WaveFunction excited(g);
    for (std::size_t j = 0; j < g.size(); ++j) excited.values[j] = std::sqrt(2.0) * g.x(j) * ground.values[j];
    const WeightedState mix[] = {{0.5, ground}, {0.5, excited}};
    const auto avg = average_density(mix, harmonic(0.0), evo(5e-3, 40), ens(1));
    EXPECT_NEAR(avg.mean.trace().real(), 1.0, 1e-8);
    EXPECT_NEAR(avg.mean.purity(), 0.5, 1e-8);
}

TEST(AverageDensity, BitwiseIndependentOfConcurrency) {
    SpatialGrid g(-6.0, 6.0, 32);
    const auto psi0 = harmonic_ground_state(g, 1.0, 1.0);
    const auto a = average_density(psi0, harmonic(0.5), evo(1e-2, 50), ens(40, 1));
    const auto b = average_density(psi0, harmonic(0.5), evo(1e-2, 50), ens(40, 4));
    EXPECT_EQ(a.mean.values, b.mean.values);
    EXPECT_EQ(a.stderr_field, b.stderr_field);
}
