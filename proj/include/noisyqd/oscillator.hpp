#pragma once

// Closed-form results for the harmonic oscillator with complex frequency
// Omega = omega1 - i omega2 (omega2 >= 0 damps), obtained after the white
// noise coupled to x has been integrated out of the amplitude.

#include <cmath>
#include <complex>
#include <cstddef>

#include "noisyqd/core.hpp"

namespace noisyqd {

struct CausticError : NumericalError {
    using NumericalError::NumericalError;
};

inline constexpr double kCausticTolerance = 1e-12;

// Omega from Omega^2 = omega^2 - i * noise_strength, noise_strength = lambda^2 sigma^2.
// Fourth-quadrant root so that omega1, omega2 >= 0.
inline ComplexFrequency complex_frequency(double omega, double noise_strength) {
    if (!(omega >= 0.0) || !(noise_strength >= 0.0)) throw ConfigError("complex_frequency: need omega >= 0 and lambda^2 sigma^2 >= 0");
    const Complex root = std::sqrt(Complex(omega * omega, -noise_strength));
    return {root.real(), root.imag() == 0.0 ? 0.0 : -root.imag()};
}

inline ComplexFrequency complex_frequency(const OscillatorSpec& spec) {
    if (!spec.sigma2.is_constant()) throw ConfigError("complex_frequency: needs a time-independent sigma^2");
    const double l2s2 = spec.coupling_lambda * spec.coupling_lambda * spec.sigma2.values().front();
    return complex_frequency(spec.omega, l2s2);
}

namespace detail {

// e^z - 1 without cancellation for small |z|.
inline Complex expm1(Complex z) {
    const double a = z.real();
    const double b = z.imag();
    const double s = std::sin(0.5 * b);
    return {std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b)};
}

// log sin(Omega t), continued from the principal value at t -> 0+.
// sin(Omega t) = e^{i Omega t} (1 - e^{-2 i Omega t}) / (2i) and |e^{-2 i Omega t}| <= 1
// for omega2 >= 0, so the principal log of the last factor never jumps.
inline Complex log_sin(Complex omega, double t) {
    const Complex i(0.0, 1.0);
    const Complex one_minus_v = -expm1(-2.0 * i * omega * t);
    return i * omega * t - Complex(std::log(2.0), 0.5 * kPi) + std::log(one_minus_v);
}

}  // namespace detail

// U(x_to, dt; x_from, 0) for H = p^2/2m + m Omega^2 x^2 / 2.
inline Complex ho_propagator(double mass, const ComplexFrequency& freq, double x_to, double x_from, double dt) {
    if (!(dt > 0.0)) throw ConfigError("ho_propagator: dt must be > 0");
    const Complex i(0.0, 1.0);
    const Complex w = freq.value();
    if (w == Complex(0.0)) {
        const double d = x_to - x_from;
        return std::sqrt(mass / (2.0 * kPi * i * dt)) * std::exp(i * mass * d * d / (2.0 * dt));
    }
    const Complex ls = detail::log_sin(w, dt);
    if (std::exp(ls.real()) < kCausticTolerance) throw CausticError("ho_propagator: sin(Omega dt) vanishes (focal time)");

    const Complex log_prefactor = std::log(mass) + std::log(w) - 0.5 * kPi * i - std::log(2.0 * kPi) - ls;
    const Complex prefactor = std::exp(0.5 * log_prefactor);

    const Complex one_minus_v = -detail::expm1(-2.0 * i * w * dt);
    const Complex cot = i * (2.0 - one_minus_v) / one_minus_v;
    const Complex csc = 2.0 * i * std::exp(-i * w * dt) / one_minus_v;
    const Complex bracket = (x_to * x_to + x_from * x_from) * cot - 2.0 * x_to * x_from * csc;
    return prefactor * std::exp(0.5 * i * mass * w * bracket);
}

// Particle created at x = 0, t = 0, written with omega1 and omega2 separated.
inline Complex point_source_psi(double mass, const ComplexFrequency& freq, double x, double t) {
    if (!(t > 0.0)) throw ConfigError("point_source_psi: t must be > 0");
    const double w1 = freq.omega1;
    const double w2 = freq.omega2;
    const Complex i(0.0, 1.0);

    const double s1 = std::sin(w1 * t), c1 = std::cos(w1 * t);
    const double ch = std::cosh(w2 * t), sh = std::sinh(w2 * t);
    const Complex denom(s1 * ch, -c1 * sh);
    if (std::abs(denom) < kCausticTolerance) throw CausticError("point_source_psi: focal time");

    // Winding of sin(Omega t) fixes which square root is meant.
    const double continuous_arg = detail::log_sin(freq.value(), t).imag();
    const double principal_arg = std::arg(denom);
    const double winding = std::round((continuous_arg - principal_arg) / (2.0 * kPi));
    const double arg_denom = principal_arg + 2.0 * kPi * winding;

    const Complex num = mass * Complex(w1, -w2);
    const double mag = std::sqrt(std::abs(num) / (2.0 * kPi * std::abs(denom)));
    const double phase = 0.5 * (std::arg(num) - 0.5 * kPi - arg_denom);
    const Complex prefactor = std::polar(mag, phase);

    const double q = s1 * s1 * ch * ch + c1 * c1 * sh * sh;
    const double s2 = std::sin(2.0 * w1 * t), sh2 = std::sinh(2.0 * w2 * t);
    const Complex ratio(w2 * s2 - w1 * sh2, w2 * sh2 + w1 * s2);
    return prefactor * std::exp(0.25 * mass * x * x * ratio / q);
}

// Large-time form of point_source_psi.
inline Complex asymptotic_psi(double mass, const ComplexFrequency& freq, double x, double t) {
    if (!(t > 0.0)) throw ConfigError("asymptotic_psi: t must be > 0");
    const double w1 = freq.omega1;
    const double w2 = freq.omega2;
    const Complex amplitude = std::sqrt(mass * Complex(w1, -w2) / kPi);
    return amplitude * std::polar(std::exp(-0.5 * w2 * t), -0.5 * w1 * t) *
           std::exp(0.5 * mass * x * x * Complex(-w1, w2));
}

// Coefficient b in log|psi(x,t)|^2 = a + b x^2 for the point-source state.
inline double log_density_curvature(double mass, const ComplexFrequency& freq, double t) {
    const double w1 = freq.omega1;
    const double w2 = freq.omega2;
    const double s1 = std::sin(w1 * t), c1 = std::cos(w1 * t);
    const double ch = std::cosh(w2 * t), sh = std::sinh(w2 * t);
    const double q = s1 * s1 * ch * ch + c1 * c1 * sh * sh;
    return 0.5 * mass * (w2 * std::sin(2.0 * w1 * t) - w1 * std::sinh(2.0 * w2 * t)) / q;
}

struct LocalisationScales {
    double tau;    // mean lifetime 2/omega2, +inf when omega2 = 0
    double depth;  // penetration depth sqrt(2/(m omega1)), +inf when omega1 = 0
};

inline LocalisationScales localisation_scales(double mass, const ComplexFrequency& freq) {
    const double tau = freq.omega2 > 0.0 ? 2.0 / freq.omega2 : kInfinity;
    const double depth = freq.omega1 > 0.0 ? std::sqrt(2.0 / (mass * freq.omega1)) : kInfinity;
    return {tau, depth};
}

// True iff the point-source density is a normalizable Gaussian in x at time t.
inline bool localization_condition(const ComplexFrequency& freq, double t) {
    if (t < 0.0) throw ConfigError("localization_condition: t must be >= 0");
    const double w1 = freq.omega1;
    const double w2 = freq.omega2;
    return w2 * std::sin(2.0 * w1 * t) - w1 * std::sinh(2.0 * w2 * t) < 0.0;
}

// Resonance width conventions: full uses (2n+1) omega2; stable_ground drops the
// zero-point contribution so the ground state has zero width.
enum class WidthConvention { full, stable_ground };

struct ResonanceLevel {
    int n = 0;
    double energy_re = 0.0;
    double width = 0.0;
    double lifetime = kInfinity;
};

inline ResonanceLevel spectrum(int n, const ComplexFrequency& freq, WidthConvention convention) {
    if (n < 0) throw ConfigError("spectrum: level must be >= 0");
    ResonanceLevel level;
    level.n = n;
    level.energy_re = (n + 0.5) * freq.omega1;
    level.width = (convention == WidthConvention::full ? 2.0 * n + 1.0 : 2.0 * n) * freq.omega2;
    level.lifetime = level.width > 0.0 ? 1.0 / level.width : kInfinity;
    return level;
}

// Delta x Delta p of the coherent states, in units of hbar.
inline double coherent_uncertainty(const ComplexFrequency& freq) {
    if (!(freq.omega1 > 0.0)) throw ConfigError("coherent_uncertainty: undefined for omega1 = 0");
    const double r = freq.omega2 / freq.omega1;
    return 0.5 * std::sqrt(1.0 + r * r);
}

// Normalised time factor of the n-th time-dependent eigenfunction on [0, T]:
// (1/T) * integral_0^T |f(t)|^2 dt = 1.
inline Complex eigen_time_factor(int n, const ComplexFrequency& freq, double interval, double t) {
    if (n < 0) throw ConfigError("eigen_time_factor: level must be >= 0");
    if (!(interval > 0.0) || t < 0.0 || t > interval) throw ConfigError("eigen_time_factor: need 0 <= t <= T");
    const double nu = n + 0.5;
    const double u = 2.0 * interval * freq.omega2 * nu;
    const double norm = u > 0.0 ? std::sqrt(u / -std::expm1(-u)) : 1.0;
    return norm * std::exp(Complex(0.0, -1.0) * freq.value() * nu * t);
}

// Hermite-Gauss function with complex width parameter m*Omega (principal root).
// Not orthogonal for omega2 > 0; reduces to the usual eigenfunctions as omega2 -> 0.
inline Complex complex_hermite_function(int n, double mass, const ComplexFrequency& freq, double x) {
    const Complex a2 = mass * freq.value();
    const Complex a = std::sqrt(a2);
    const Complex z = a * x;
    // Normalised recurrence: h_k = sqrt(2/k) z h_{k-1} - sqrt((k-1)/k) h_{k-2}.
    Complex h_prev = 0.0;
    Complex h = 1.0;
    for (int k = 1; k <= n; ++k) {
        const Complex next = std::sqrt(2.0 / k) * z * h - std::sqrt((k - 1.0) / k) * h_prev;
        h_prev = h;
        h = next;
    }
    return std::pow(a2 / kPi, 0.25) * h * std::exp(-0.5 * z * z);
}

inline Complex timedep_eigenfunction(int n, double mass, const ComplexFrequency& freq, double interval, double x, double t) {
    return eigen_time_factor(n, freq, interval, t) * complex_hermite_function(n, mass, freq, x);
}

}  // namespace noisyqd
