#pragma once

// Independent oracles for the test suite. Everything here works in plain
// radial / 1-d terms and never touches the gauge-polar machinery it checks.

#include <cmath>
#include <functional>

namespace oracle {

// composite Simpson with doubling until two consecutive levels agree
inline double integrate1d(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-11, int n0 = 64, int max_doublings = 14) {
    auto simpson = [&](int n) {
        const double h = (b - a) / n;
        double acc = f(a) + f(b);
        for (int i = 1; i < n; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
        return acc * h / 3.0;
    };
    double prev = simpson(n0);
    int n = 2 * n0;
    for (int d = 0; d < max_doublings; ++d, n *= 2) {
        const double cur = simpson(n);
        if (std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

// --- radial reduction for bessel3 (m=2, k=1, alpha=0; Q=3) -------------------
//
// On this configuration every sphere functional reduces to 1-d formulas with
// the sphere mass S(t) = 2 pi t^2 and the radial profile f = sin(t)/t.

inline double sphere_mass(double t) { return 2.0 * M_PI * t * t; }

inline double bessel_u(double ell, double t) { return std::pow(t, ell - 1.0) * std::sin(t); }

inline double bessel_du(double ell, double t) {
    return (ell - 1.0) * std::pow(t, ell - 2.0) * std::sin(t) +
           std::pow(t, ell - 1.0) * std::cos(t);
}

inline double F_bessel(double ell, double t) {
    const double u = bessel_u(ell, t);
    const double du = bessel_du(ell, t);
    return sphere_mass(t) *
           (du * du + u * u - u * u / t + ell * (ell - 1.0) * u * u / (t * t));
}

inline double G_bessel(double t) { return sphere_mass(t); } // integrand is cos^2 + sin^2

inline double flux_bessel(double t) {
    // w = sin t on S_t, Z(w^2) = t d/dt sin^2 t = t sin(2t)
    return sphere_mass(t) * t * std::sin(2.0 * t);
}

inline double surface_mass_bessel(double t) {
    const double f = std::sin(t) / t;
    return sphere_mass(t) * f * f;
}

inline double ring_mass_bessel(double R) {
    // 2 pi int_R^{2R} sin^2 t dt, closed form
    auto anti = [](double t) { return 0.5 * t - 0.25 * std::sin(2.0 * t); };
    return 2.0 * M_PI * (anti(2.0 * R) - anti(R));
}

inline double lp_increment_bessel(double p, double r1, double r2) {
    return integrate1d(
        [p](double t) {
            return 2.0 * M_PI * std::pow(std::abs(std::sin(t)), p) * std::pow(t, 2.0 - p);
        },
        r1, r2, 1e-10, 1 << 12);
}

inline double energy_numerator_bessel(double R) {
    return integrate1d(
        [](double t) {
            const double d = std::cos(t) - std::sin(t) / t;
            return 2.0 * M_PI * d * d;
        },
        1.25 * R, 1.75 * R, 1e-10, 1 << 10);
}

// --- extension problem oracles ----------------------------------------------

/// (-Delta)^s of exp(-sigma^2/2) at sigma = 0 via the Fourier side:
/// sqrt(2/pi) * int_0^inf xi^{2s} exp(-xi^2/2) dxi.
inline double fractional_laplacian_gaussian_at0(double s) {
    const double val = integrate1d(
        [s](double xi) { return std::pow(xi, 2.0 * s) * std::exp(-0.5 * xi * xi); }, 0.0, 40.0,
        1e-12, 1 << 12);
    return std::sqrt(2.0 / M_PI) * val;
}

/// Half-plane Poisson extension of exp(-y^2/2) evaluated at (z, 0).
inline double poisson_extension_gaussian(double z) {
    return integrate1d(
        [z](double y) {
            return (z / M_PI) * std::exp(-0.5 * y * y) / (z * z + y * y);
        },
        -40.0, 40.0, 1e-12, 1 << 12);
}

} // namespace oracle
