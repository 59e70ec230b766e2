#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "noisyqd/oscillator.hpp"

using namespace noisyqd;

namespace {

const Complex I(0.0, 1.0);

// Composite Simpson rule on [a, b] with an even number of intervals.
template <class F>
auto simpson(F&& f, double a, double b, int intervals) {
    const double h = (b - a) / intervals;
    auto s = f(a) + f(b);
    for (int k = 1; k < intervals; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return s * (h / 3.0);
}

// Textbook real-frequency propagator, valid for 0 < omega t < pi.
Complex real_ho_propagator(double m, double w, double xp, double x, double t) {
    const double s = std::sin(w * t), c = std::cos(w * t);
    return std::sqrt(m * w / (2.0 * kPi * I * s)) * std::exp(I * m * w / (2.0 * s) * ((xp * xp + x * x) * c - 2.0 * xp * x));
}

}  // namespace

// ---------------------------------------------------------------------------

TEST(ComplexFrequency, NoiselessLimit) {
    const auto f = complex_frequency(1.0, 0.0);
    EXPECT_EQ(f.omega1, 1.0);
    EXPECT_EQ(f.omega2, 0.0);
}

TEST(ComplexFrequency, PureNoiseHasEqualParts) {
    const double s = 0.8;  // sigma-bar
    const auto f = complex_frequency(0.0, s * s);
    EXPECT_NEAR(f.omega1, s / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(f.omega2, s / std::sqrt(2.0), 1e-15);
}

TEST(ComplexFrequency, KnownRoot) {
    // Oracle: real and imaginary parts of sqrt(1 - 2i) from |z| = sqrt(5).
    const double r = std::sqrt(5.0);
    const auto f = complex_frequency(1.0, 2.0);
    EXPECT_NEAR(f.omega1, std::sqrt((r + 1.0) / 2.0), 1e-14);
    EXPECT_NEAR(f.omega2, std::sqrt((r - 1.0) / 2.0), 1e-14);
    EXPECT_NEAR(f.omega1, 1.2720, 5e-5);
    EXPECT_NEAR(f.omega2, 0.7862, 5e-5);
    EXPECT_LT(std::abs(f.squared() - Complex(1.0, -2.0)), 1e-12);
}

TEST(ComplexFrequency, FromOscillatorSpec) {
    OscillatorSpec spec;
    spec.omega = 1.0;
    spec.coupling_lambda = 2.0;
    spec.sigma2 = Schedule::constant(0.5);
    const auto f = complex_frequency(spec);
    EXPECT_LT(std::abs(f.squared() - Complex(1.0, -2.0)), 1e-12);
    spec.sigma2 = Schedule::piecewise({0.0, 1.0, 2.0}, {0.1, 0.2});
    EXPECT_THROW(complex_frequency(spec), ConfigError);
}

TEST(ComplexFrequency, BranchConsistencyOverRandomDraws) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> w(0.0, 5.0);
    std::uniform_real_distribution<double> s(0.0, 10.0);
    for (int k = 0; k < 1000; ++k) {
        const double omega = w(rng), noise = s(rng);
        const auto f = complex_frequency(omega, noise);
        ASSERT_GE(f.omega1, 0.0);
        ASSERT_GE(f.omega2, 0.0);
        const Complex target(omega * omega, -noise);
        ASSERT_LE(std::abs(f.squared() - target), 1e-12 * std::abs(target));
    }
}

// ---------------------------------------------------------------------------

TEST(HoPropagator, RealFrequencyMatchesTextbookFormula) {
    const ComplexFrequency f{1.3, 0.0};
    for (double t : {0.05, 0.4, 1.1, 2.3}) {
        for (double xp : {-1.2, 0.0, 0.9}) {
            for (double x : {-0.4, 0.3, 1.7}) {
                const Complex got = ho_propagator(0.8, f, xp, x, t);
                const Complex want = real_ho_propagator(0.8, 1.3, xp, x, t);
                EXPECT_LE(std::abs(got - want), 1e-10 * std::abs(want)) << "t=" << t;
            }
        }
    }
}

TEST(HoPropagator, FreeParticleLimit) {
    const Complex got = ho_propagator(1.0, ComplexFrequency{0.0, 0.0}, 0.5, -0.25, 0.7);
    const Complex want = std::sqrt(1.0 / (2.0 * kPi * I * 0.7)) * std::exp(I * 0.75 * 0.75 / (2.0 * 0.7));
    EXPECT_LT(std::abs(got - want), 1e-13);
}

TEST(HoPropagator, SmallTimeLimitIsFreePropagator) {
    const ComplexFrequency f{1.0, 0.4};
    const double t = 1e-4;
    const Complex got = ho_propagator(1.0, f, 0.01, 0.0, t);
    const Complex want = std::sqrt(1.0 / (2.0 * kPi * I * t)) * std::exp(I * 0.01 * 0.01 / (2.0 * t));
    EXPECT_LT(std::abs(got - want), 1e-3 * std::abs(want));
}

TEST(HoPropagator, CausticIsReported) {
    const ComplexFrequency f{1.0, 0.0};
    EXPECT_THROW(ho_propagator(1.0, f, 0.0, 0.0, kPi), CausticError);
    EXPECT_THROW(ho_propagator(1.0, f, 0.0, 0.0, -1.0), ConfigError);
    EXPECT_NO_THROW(ho_propagator(1.0, ComplexFrequency{1.0, 0.1}, 0.0, 0.0, kPi));
}

// Oracle: a brute-force Trotter product with a dense kinetic matrix (built
// from an explicit plane-wave sum, not an FFT), applied to a narrow Gaussian.
TEST(HoPropagator, MatchesTrotterizedMatrixProduct) {
    const double m = 1.0;
    const ComplexFrequency f{1.0, 0.2};
    const Complex w2 = f.squared();
    const std::size_t n = 192;
    const double x_min = -8.0, x_max = 8.0;
    const double dx = (x_max - x_min) / (n - 1);
    const double period = n * dx;
    const double t = 0.5;
    const int steps = 1 << 14;
    const double dt = t / steps;

    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = x_min + j * dx;
    std::vector<double> k(n);
    for (std::size_t q = 0; q < n; ++q) {
        long mq = static_cast<long>(q);
        if (mq > static_cast<long>((n - 1) / 2)) mq -= static_cast<long>(n);
        k[q] = 2.0 * kPi * mq / period;
    }
    std::vector<Complex> kin(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            Complex s = 0.0;
            for (std::size_t q = 0; q < n; ++q) s += std::exp(I * k[q] * (x[a] - x[b]) - I * k[q] * k[q] * dt / (2.0 * m));
            kin[a * n + b] = s / static_cast<double>(n);
        }
    std::vector<Complex> half(n);
    for (std::size_t j = 0; j < n; ++j) half[j] = std::exp(-I * 0.5 * m * w2 * x[j] * x[j] * 0.5 * dt);

    const double width = 0.3, x0 = 0.4;
    std::vector<Complex> psi0(n), psi(n), tmp(n);
    for (std::size_t j = 0; j < n; ++j) psi0[j] = std::exp(-(x[j] - x0) * (x[j] - x0) / (4.0 * width * width));
    psi = psi0;
    for (int s = 0; s < steps; ++s) {
        for (std::size_t j = 0; j < n; ++j) tmp[j] = half[j] * psi[j];
        for (std::size_t a = 0; a < n; ++a) {
            Complex acc = 0.0;
            const Complex* row = &kin[a * n];
            for (std::size_t b = 0; b < n; ++b) acc += row[b] * tmp[b];
            psi[a] = half[a] * acc;
        }
    }

    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        if (std::abs(x[a]) > 4.0) continue;
        Complex analytic = 0.0;
        for (std::size_t b = 0; b < n; ++b) analytic += ho_propagator(m, f, x[a], x[b], t) * psi0[b] * dx;
        err2 += std::norm(analytic - psi[a]);
        ref2 += std::norm(analytic);
    }
    EXPECT_LT(std::sqrt(err2 / ref2), 1e-4);
}

// Oracle: trapezoid quadrature of the intermediate coordinate.
TEST(HoPropagator, SemigroupComposition) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> w1(0.5, 1.5), w2(0.2, 1.0), tt(0.3, 1.2), xx(-1.0, 1.0), mm(0.5, 1.5);
    for (int draw = 0; draw < 10; ++draw) {
        const double m = mm(rng);
        const ComplexFrequency f{w1(rng), w2(rng)};
        const double t1 = tt(rng), t2 = tt(rng);
        const double xa = xx(rng), xb = xx(rng);
        const double L = 15.0;
        const int nq = 24000;
        const double h = 2.0 * L / nq;
        Complex s = 0.0;
        for (int q = 0; q <= nq; ++q) {
            const double y = -L + q * h;
            const double wgt = (q == 0 || q == nq) ? 0.5 : 1.0;
            s += wgt * ho_propagator(m, f, xb, y, t2) * ho_propagator(m, f, y, xa, t1);
        }
        s *= h;
        const Complex direct = ho_propagator(m, f, xb, xa, t1 + t2);
        EXPECT_LT(std::abs(s - direct), 1e-6 * std::abs(direct)) << "draw " << draw;
    }
}

// ---------------------------------------------------------------------------

TEST(PointSource, AgreesWithPropagatorAtReferencePoint) {
    const ComplexFrequency f{1.0, 0.2};
    const Complex a = point_source_psi(1.0, f, 0.7, 1.3);
    const Complex b = ho_propagator(1.0, f, 0.7, 0.0, 1.3);
    EXPECT_LE(std::abs(a - b), 1e-10 * std::abs(b));
}

TEST(PointSource, IdenticalToPropagatorOnLattice) {
    for (const ComplexFrequency f : {ComplexFrequency{1.0, 0.2}, ComplexFrequency{1.0, 1.0}, ComplexFrequency{0.7, 0.05},
                                     ComplexFrequency{2.0, 0.6}}) {
        for (int a = 0; a < 50; ++a) {
            const double x = -3.0 + 6.0 * a / 49.0;
            for (int b = 0; b < 50; ++b) {
                const double t = 0.1 + 7.9 * b / 49.0;
                const Complex p = point_source_psi(1.3, f, x, t);
                const Complex u = ho_propagator(1.3, f, x, 0.0, t);
                ASSERT_LE(std::abs(p - u), 1e-10 * std::abs(u)) << "x=" << x << " t=" << t << " w2=" << f.omega2;
            }
        }
    }
}

TEST(PointSource, LargeTimeMatchesAsymptoticForm) {
    for (const ComplexFrequency f : {ComplexFrequency{1.0, 0.2}, ComplexFrequency{1.0, 1.0}}) {
        const double t = 6.0 / f.omega2;
        for (int a = 0; a <= 200; ++a) {
            const double x = -4.0 + 8.0 * a / 200.0;
            const Complex exact = point_source_psi(1.0, f, x, t);
            if (std::abs(exact) <= 1e-8) continue;
            const Complex asym = asymptotic_psi(1.0, f, x, t);
            EXPECT_LT(std::abs(asym - exact) / std::abs(exact), 0.01) << "x=" << x;
        }
    }
}

// Oracle: least-squares fit of log|psi|^2 against x^2.
TEST(PointSource, DensityIsGaussianWithKnownCurvature) {
    const double m = 1.2;
    const ComplexFrequency f{0.9, 0.35};
    for (double t : {0.3, 1.0, 2.5, 4.0}) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const int np = 41;
        for (int a = 0; a < np; ++a) {
            const double x = -1.5 + 3.0 * a / (np - 1);
            const double u = x * x;
            const double y = std::log(std::norm(point_source_psi(m, f, x, t)));
            sx += u, sy += y, sxx += u * u, sxy += u * y;
        }
        const double slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
        const double s1 = std::sin(f.omega1 * t), c1 = std::cos(f.omega1 * t);
        const double ch = std::cosh(f.omega2 * t), sh = std::sinh(f.omega2 * t);
        const double expected = 0.5 * m * (f.omega2 * std::sin(2 * f.omega1 * t) - f.omega1 * std::sinh(2 * f.omega2 * t)) /
                                (s1 * s1 * ch * ch + c1 * c1 * sh * sh);
        EXPECT_NEAR(slope, expected, 1e-9 * std::abs(expected));
        EXPECT_NEAR(log_density_curvature(m, f, t), expected, 1e-12 * std::abs(expected));
    }
}

// ---------------------------------------------------------------------------

TEST(AsymptoticPsi, TimeDecay) {
    const ComplexFrequency f{1.0, 0.3};
    const double t = 2.0, d = 1.7;
    const double ratio = std::abs(asymptotic_psi(1.0, f, 0.0, t + d)) / std::abs(asymptotic_psi(1.0, f, 0.0, t));
    EXPECT_NEAR(ratio, std::exp(-0.5 * f.omega2 * d), 1e-14);
}

TEST(AsymptoticPsi, SpaceDecaySetsPenetrationDepth) {
    const double m = 1.5;
    const ComplexFrequency f{0.8, 0.3};
    const double t = 1.0;
    const double depth = localisation_scales(m, f).depth;
    // |psi|^2 ~ exp(-m omega1 x^2): drops by e^{-2} at x = depth.
    const double r = std::norm(asymptotic_psi(m, f, depth, t)) / std::norm(asymptotic_psi(m, f, 0.0, t));
    EXPECT_NEAR(r, std::exp(-2.0), 1e-14);
    EXPECT_NEAR(depth, std::sqrt(2.0 / (m * f.omega1)), 1e-15);
}

TEST(AsymptoticPsi, NoDampingMeansConstantModulus) {
    const ComplexFrequency f{1.0, 0.0};
    for (double x : {0.0, 0.5, 1.5})
        EXPECT_NEAR(std::abs(asymptotic_psi(1.0, f, x, 0.5)), std::abs(asymptotic_psi(1.0, f, x, 9.0)), 1e-15);
}

// ---------------------------------------------------------------------------

TEST(LocalisationScales, LifetimeAndDepth) {
    EXPECT_DOUBLE_EQ(localisation_scales(1.0, ComplexFrequency{1.0, 0.05}).tau, 40.0);
    EXPECT_DOUBLE_EQ(localisation_scales(1.0, ComplexFrequency{1.0, 0.05}).depth, std::sqrt(2.0));
    EXPECT_TRUE(std::isinf(localisation_scales(1.0, ComplexFrequency{1.0, 0.0}).tau));
    EXPECT_TRUE(std::isinf(localisation_scales(1.0, ComplexFrequency{0.0, 0.0}).depth));
}

TEST(LocalisationScales, SmallWidthLimit) {
    // omega = 1, sigma-bar^2 = 0.1: tau ~ 4 omega / sigma-bar^2 = 40.
    const auto f = complex_frequency(1.0, 0.1);
    EXPECT_NEAR(localisation_scales(1.0, f).tau, 40.0, 0.01 * 40.0);
}

TEST(LocalizationCondition, EqualPartsAlwaysLocalised) {
    const ComplexFrequency f{1.0, 1.0};
    for (int k = 1; k <= 500; ++k) EXPECT_TRUE(localization_condition(f, 0.02 * k));
}

TEST(LocalizationCondition, NoDampingNeverLocalised) {
    const ComplexFrequency f{1.0, 0.0};
    for (int k = 0; k <= 100; ++k) EXPECT_FALSE(localization_condition(f, 0.1 * k));
    EXPECT_THROW(localization_condition(f, -1.0), ConfigError);
}

TEST(LocalizationCondition, HoldsFromSomeFiniteTimeOn) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> w(0.05, 3.0);
    for (int draw = 0; draw < 20; ++draw) {
        const ComplexFrequency f{w(rng), w(rng)};
        // Scan oracle: last time on a fine grid where the condition fails.
        double t_star = 0.0;
        for (int k = 0; k <= 4000; ++k) {
            const double t = 0.005 * k;
            if (!localization_condition(f, t)) t_star = t;
        }
        EXPECT_LT(t_star, 20.0);
        EXPECT_TRUE(localization_condition(f, 20.0));
    }
}

// ---------------------------------------------------------------------------

TEST(Spectrum, StableGroundConvention) {
    const ComplexFrequency f{1.5, 1.0};
    EXPECT_DOUBLE_EQ(spectrum(1, f, WidthConvention::stable_ground).width, 2.0);
    EXPECT_DOUBLE_EQ(spectrum(2, f, WidthConvention::stable_ground).width, 4.0);
    EXPECT_DOUBLE_EQ(spectrum(3, f, WidthConvention::stable_ground).width, 6.0);
    const auto g = spectrum(0, f, WidthConvention::stable_ground);
    EXPECT_EQ(g.width, 0.0);
    EXPECT_TRUE(std::isinf(g.lifetime));
    EXPECT_DOUBLE_EQ(spectrum(2, f, WidthConvention::stable_ground).energy_re, 2.5 * 1.5);
}

TEST(Spectrum, FullConvention) {
    const ComplexFrequency f{1.0, 0.5};
    const auto l0 = spectrum(0, f, WidthConvention::full);
    EXPECT_DOUBLE_EQ(l0.width, 0.5);
    EXPECT_DOUBLE_EQ(l0.lifetime * l0.width, 1.0);
    for (int n = 0; n < 6; ++n) {
        EXPECT_DOUBLE_EQ(spectrum(n + 1, f, WidthConvention::full).width - spectrum(n, f, WidthConvention::full).width, 1.0);
        EXPECT_DOUBLE_EQ(spectrum(n, f, WidthConvention::full).energy_re, (n + 0.5) * 1.0);
    }
    EXPECT_THROW(spectrum(-1, f, WidthConvention::full), ConfigError);
}

TEST(CoherentUncertainty, Values) {
    EXPECT_DOUBLE_EQ(coherent_uncertainty(ComplexFrequency{1.0, 0.0}), 0.5);
    EXPECT_NEAR(coherent_uncertainty(ComplexFrequency{0.7, 0.7}), std::sqrt(2.0) / 2.0, 1e-15);
    EXPECT_NEAR(coherent_uncertainty(ComplexFrequency{0.7, 0.7}), 0.70711, 1e-5);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1e-3, 4.0);
    for (int k = 0; k < 100; ++k) EXPECT_GT(coherent_uncertainty(ComplexFrequency{u(rng), u(rng)}), 0.5);
    EXPECT_THROW(coherent_uncertainty(ComplexFrequency{0.0, 1.0}), ConfigError);
}

// ---------------------------------------------------------------------------

TEST(TimeDepEigenfunction, PrefactorLimitWithoutDamping) {
    EXPECT_DOUBLE_EQ(std::abs(eigen_time_factor(3, ComplexFrequency{1.0, 0.0}, 5.0, 0.0)), 1.0);
    EXPECT_NEAR(std::abs(eigen_time_factor(3, ComplexFrequency{1.0, 1e-12}, 5.0, 0.0)), 1.0, 1e-10);
}

// Oracle: Simpson quadrature of |time factor|^2 over [0, T], divided by T.
TEST(TimeDepEigenfunction, TimeNormIsOne) {
    const ComplexFrequency f{1.1, 0.3};
    const double T = 5.0;
    const double integral = simpson([&](double t) { return std::norm(eigen_time_factor(2, f, T, t)); }, 0.0, T, 4000);
    EXPECT_NEAR(integral / T, 1.0, 1e-8);
}

TEST(TimeDepEigenfunction, DecaysMonotonically) {
    const ComplexFrequency f{1.0, 0.25};
    double prev = kInfinity;
    for (int k = 0; k <= 100; ++k) {
        const double t = 0.1 * k;
        const double v = std::abs(timedep_eigenfunction(1, 1.0, f, 10.0, 0.6, t));
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_THROW(timedep_eigenfunction(1, 1.0, f, 10.0, 0.6, 11.0), ConfigError);
}

TEST(TimeDepEigenfunction, ReducesToHarmonicOscillatorFunctions) {
    const double m = 1.0, w = 1.0;
    const ComplexFrequency f{w, 0.0};
    const double c = std::pow(m * w / kPi, 0.25);
    for (double x : {-1.3, 0.0, 0.4, 2.2}) {
        const double g = std::exp(-0.5 * m * w * x * x);
        EXPECT_NEAR(std::abs(complex_hermite_function(0, m, f, x) - c * g), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(complex_hermite_function(1, m, f, x) - c * std::sqrt(2.0) * x * g), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(complex_hermite_function(2, m, f, x) - c * (2 * x * x - 1) / std::sqrt(2.0) * g), 0.0, 1e-14);
    }
}
