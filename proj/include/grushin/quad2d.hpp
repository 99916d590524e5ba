#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <tuple>

#include "grushin/params.hpp"

namespace grushin {

// ---------------------------------------------------------------------------
// Direct quadrature in the (r, s) plane. Independent of the gauge-polar
// parameterisation on purpose: these routines slice gauge balls and rings by
// s-levels and integrate r on each slice, and they anchor the sphere-rule and
// coarea checks.
// ---------------------------------------------------------------------------

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-11, int depth = 40) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Integral over the ring {t1 < rho < t2} (ball for t1 = 0) of a cylindrically
/// symmetric h, as an iterated (r, s) quadrature with the product measure
/// omega_{m-1} omega_{k-1} r^{m-1} s^{k-1} dr ds.
inline double ring_integral_2d(const GrushinParams& gp, double t1, double t2,
                               const std::function<double(CylPoint)>& h, double tol = 1e-10) {
    if (!(t2 > t1) || t1 < 0.0) throw ArgumentError("ring_integral_2d: need 0 <= t1 < t2");
    const double a1 = gp.a1();
    const double p2 = 2.0 * a1;
    const double s_max2 = std::pow(t2, a1) / (2.0 * a1);
    const double s_max1 = (t1 > 0.0) ? std::pow(t1, a1) / (2.0 * a1) : 0.0;

    auto r_of = [&](double t, double s) {
        const double v = std::pow(t, p2) - 4.0 * a1 * a1 * s * s;
        return v <= 0.0 ? 0.0 : std::pow(v, 1.0 / p2);
    };

    // inner integral over r at fixed s, 32-point composite Gauss-Legendre
    static const double gl_x[4] = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281,
                                   0.9305681557970263};
    static const double gl_w[4] = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                                   0.1739274225687269};
    auto inner = [&](double s) {
        const double r_lo = (s < s_max1) ? r_of(t1, s) : 0.0;
        const double r_hi = r_of(t2, s);
        if (!(r_hi > r_lo)) return 0.0;
        const int panels = 8;
        const double hr = (r_hi - r_lo) / panels;
        double acc = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double a = r_lo + p * hr;
            for (int g = 0; g < 4; ++g) {
                const double r = a + gl_x[g] * hr;
                acc += gl_w[g] * hr * std::pow(r, gp.m - 1) * h({r, s});
            }
        }
        return acc;
    };

    const double wconst = unit_sphere_area(gp.m) * unit_sphere_area(gp.k);
    auto outer = [&](double s) {
        const double sval = (gp.k == 1) ? 1.0 : std::pow(s, gp.k - 1);
        return wconst * sval * inner(s);
    };

    // split at the inner-boundary corner; substitute s = smax * sin(theta) on
    // the outer piece to soften the fractional endpoint of r_of(t2, s)
    double total = 0.0;
    if (s_max1 > 0.0) total += adaptive_simpson(outer, 0.0, s_max1, tol);
    auto outer_sub = [&](double theta) {
        const double s = s_max2 * std::sin(theta);
        return outer(s) * s_max2 * std::cos(theta);
    };
    const double th0 = (s_max1 > 0.0) ? std::asin(std::min(1.0, s_max1 / s_max2)) : 0.0;
    total += adaptive_simpson(outer_sub, th0, M_PI_2, tol);
    return total;
}

/// Volume of the unit gauge ball, cached per parameter triple.
inline double unit_ball_volume(const GrushinParams& gp) {
    static std::map<std::tuple<int, int, double>, double> cache;
    const auto key = std::make_tuple(gp.m, gp.k, gp.alpha);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double v =
        ring_integral_2d(gp, 0.0, 1.0, [](CylPoint) { return 1.0; }, 1e-12);
    cache[key] = v;
    return v;
}

/// d/dt of the ball integral of h at radius t, by central differences with
/// one Richardson step; a thin-shell reference for sphere integrals.
inline double shell_integral_2d(const GrushinParams& gp, double t,
                                const std::function<double(CylPoint)>& h, double rel_h = 1e-3) {
    auto ball = [&](double radius) { return ring_integral_2d(gp, 0.0, radius, h, 1e-12); };
    auto diff = [&](double eps) { return (ball(t + eps) - ball(t - eps)) / (2.0 * eps); };
    const double e = rel_h * t;
    const double d1 = diff(e), d2 = diff(0.5 * e);
    return (4.0 * d2 - d1) / 3.0;
}

} // namespace grushin
