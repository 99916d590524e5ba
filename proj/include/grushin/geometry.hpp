#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "grushin/dual.hpp"
#include "grushin/params.hpp"

namespace grushin {

// ---------------------------------------------------------------------------
// Gauge, degeneracy weight, dilations
// ---------------------------------------------------------------------------

/// Anisotropic gauge rho(r, s) = (r^{2(alpha+1)} + 4(alpha+1)^2 s^2)^{1/(2(alpha+1))}.
/// Total: rho(0, 0) = 0. Homogeneous of degree one under dilate().
inline double gauge(const GrushinParams& gp, const CylPoint& p) {
    require_valid(p);
    const double a1 = gp.a1();
    const double inner = std::pow(p.r, 2.0 * a1) + 4.0 * a1 * a1 * p.s * p.s;
    return std::pow(inner, 1.0 / (2.0 * a1));
}

template <class T>
T gauge_expr(const GrushinParams& gp, const T& r, const T& s) {
    const double a1 = gp.a1();
    return pow(pow(r, 2.0 * a1) + (4.0 * a1 * a1) * s * s, 1.0 / (2.0 * a1));
}

/// Exact first/second partials of the gauge; undefined at the origin.
inline Jet2 gauge_jet(const GrushinParams& gp, const CylPoint& p) {
    require_valid(p);
    if (p.is_origin()) throw DomainError("gauge_jet: undefined at the origin");
    const double a1 = gp.a1();
    const double a = gp.alpha;
    const double rho = gauge(gp, p);
    const double rho_pow = std::pow(rho, 2.0 * a + 1.0); // rho^{2 alpha + 1}
    const double rp = std::pow(p.r, 2.0 * a + 1.0);      // r^{2 alpha + 1}

    Jet2 j;
    j.v = rho;
    j.dr = rp / rho_pow;
    j.ds = 4.0 * a1 * p.s / rho_pow;
    const double c = (2.0 * a + 1.0) / (rho_pow * rho); // (2a+1) rho^{-(2a+2)}
    j.drr = (2.0 * a + 1.0) * std::pow(p.r, 2.0 * a) / rho_pow - c * rp * j.dr;
    j.drs = -c * rp * j.ds;
    j.dss = 4.0 * a1 / rho_pow - c * 4.0 * a1 * p.s * j.ds;
    return j;
}

/// Degeneracy weight psi = |grad_alpha rho|^2 = r^{2 alpha} / rho^{2 alpha} in [0, 1].
inline double psi(const GrushinParams& gp, const CylPoint& p) {
    require_valid(p);
    if (p.is_origin()) throw DomainError("psi: undefined at the origin");
    if (gp.alpha == 0.0) return 1.0;
    const double rho = gauge(gp, p);
    return std::pow(p.r / rho, 2.0 * gp.alpha);
}

/// Anisotropic dilation delta_lambda(r, s) = (lambda r, lambda^{alpha+1} s).
inline CylPoint dilate(const GrushinParams& gp, double lambda, const CylPoint& p) {
    require_valid(p);
    if (!(lambda > 0.0)) throw ArgumentError("dilate: lambda must be > 0");
    return {lambda * p.r, std::pow(lambda, gp.a1()) * p.s};
}

// ---------------------------------------------------------------------------
// Gauge-polar coordinates
//
//   r = t cos(phi)^{1/(alpha+1)},   s = t^{alpha+1} sin(phi) / (2(alpha+1)),
//
// so that rho(r, s) = t identically and the gauge spheres are the lines
// t = const. The map diagonalises the alpha-metric: the Jacobian is
// J = t^{alpha+1} cos(phi)^{beta-1} / (2(alpha+1)), beta = 1/(alpha+1),
// which is validated against a finite-difference Jacobian in run_self_checks.
// ---------------------------------------------------------------------------

inline CylPoint from_gauge_coords(const GrushinParams& gp, const GaugeCoords& g) {
    if (!(g.t > 0.0)) throw ArgumentError("from_gauge_coords: t must be > 0");
    if (!(g.phi >= 0.0 && g.phi <= M_PI_2))
        throw ArgumentError("from_gauge_coords: phi must lie in [0, pi/2]");
    const double a1 = gp.a1();
    const double cphi = (g.phi >= M_PI_2) ? 0.0 : std::cos(g.phi); // phi = pi/2 <=> r = 0
    return {g.t * std::pow(cphi, gp.beta()), std::pow(g.t, a1) * std::sin(g.phi) / (2.0 * a1)};
}

inline GaugeCoords to_gauge_coords(const GrushinParams& gp, const CylPoint& p) {
    require_valid(p);
    if (p.is_origin()) throw DomainError("to_gauge_coords: undefined at the origin");
    const double a1 = gp.a1();
    const double t = gauge(gp, p);
    const double phi = std::atan2(2.0 * a1 * p.s, std::pow(p.r, a1));
    return {t, phi};
}

/// det d(r,s)/d(t,phi) of the gauge-polar map (closed form, derived data).
inline double polar_jacobian(const GrushinParams& gp, double t, double phi) {
    const double a1 = gp.a1();
    return std::pow(t, a1) * std::pow(std::cos(phi), gp.beta() - 1.0) / (2.0 * a1);
}

// ---------------------------------------------------------------------------
// Frame on a gauge sphere: everything needed to convert (d/dt, d/dphi)
// derivatives into the alpha-gradient. The inverse-map coefficients are the
// exact closed forms
//   dt/dr   = cos^{2-beta},            dt/ds   = 2 sin(phi) / t^alpha,
//   dphi/dr = -(alpha+1) sin cos^{1-beta} / t, dphi/ds = 2(alpha+1) cos / t^{alpha+1}.
// ---------------------------------------------------------------------------

struct SphereFrame {
    double t, phi;
    double cphi, sphi;
    double r, s;
    double psi;      // cos^{2-2 beta}
    double t_r, t_s; // dt/dr, dt/ds
    double p_r, p_s; // dphi/dr, dphi/ds
    double r2a_quarter; // r^{2 alpha} / 4

    /// |grad_alpha u|^2 from sphere derivatives (u_t, u_phi).
    double grad_alpha_sq(double ut, double uphi) const {
        const double ur = ut * t_r + uphi * p_r;
        const double us = ut * t_s + uphi * p_s;
        return ur * ur + r2a_quarter * us * us;
    }
};

/// Frame from precomputed (cos phi, sin phi); pass exact values near phi = pi/2.
inline SphereFrame sphere_frame(const GrushinParams& gp, double t, double phi, double cphi,
                                double sphi) {
    const double a1 = gp.a1();
    const double beta = gp.beta();
    SphereFrame f;
    f.t = t;
    f.phi = phi;
    f.cphi = cphi;
    f.sphi = sphi;
    f.r = t * std::pow(cphi, beta);
    f.s = std::pow(t, a1) * sphi / (2.0 * a1);
    f.psi = (gp.alpha == 0.0) ? 1.0 : std::pow(cphi, 2.0 - 2.0 * beta);
    f.t_r = std::pow(cphi, 2.0 - beta);
    f.t_s = 2.0 * sphi / std::pow(t, gp.alpha);
    f.p_r = -a1 * sphi * std::pow(cphi, 1.0 - beta) / t;
    f.p_s = 2.0 * a1 * cphi / std::pow(t, a1);
    f.r2a_quarter = std::pow(f.r, 2.0 * gp.alpha) / 4.0;
    return f;
}

inline SphereFrame sphere_frame(const GrushinParams& gp, double t, double phi) {
    return sphere_frame(gp, t, phi, std::cos(phi), std::sin(phi));
}

// ---------------------------------------------------------------------------
// Quadrature on gauge spheres.
//
// For cylindrically symmetric h the surface integral with the coarea measure
// reduces to a weighted phi-integral:
//
//   int_{S_t} h dsigma/|grad rho|
//     = omega_{m-1} omega_{k-1} / (2(alpha+1))^k
//       * t^{Q-1} int_0^{pi/2} h(t,phi) cos^{beta m - 1} sin^{k-1} dphi.
//
// The cos-exponent beta*m - 1 lies in (-1, 0) when m < alpha + 1, an
// integrable endpoint singularity at phi = pi/2. Nodes and weights come from
// a tanh-sinh (double-exponential) rule, which absorbs algebraic endpoint
// singularities of the integrand as well (psi carries cos^{2 alpha/(alpha+1)}
// factors). Truncation points are chosen from the endpoint exponents so the
// discarded tails sit below 1e-15 relative.
// ---------------------------------------------------------------------------

struct SphereRule {
    double t = 1.0;
    std::vector<double> nodes;   // phi values in (0, pi/2)
    std::vector<double> weights; // all > 0
    std::vector<double> cphi;    // cos(node), computed cancellation-free
    std::vector<double> sphi;    // sin(node)

    template <class F>
    double integrate(F&& h) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * h(nodes[i]);
        return acc;
    }
};

inline SphereRule sphere_rule(const GrushinParams& gp, double t, int n_phi) {
    if (!(t > 0.0)) throw ArgumentError("sphere_rule: t must be > 0");
    if (n_phi < 4) throw ArgumentError("sphere_rule: n_phi must be >= 4");

    const double beta = gp.beta();
    const double exp_c = beta * gp.m - 1.0; // cos exponent, > -1
    const double exp_s = gp.k - 1.0;        // sin exponent, >= 0
    const double measure_const = unit_sphere_area(gp.m) * unit_sphere_area(gp.k) /
                                 std::pow(2.0 * gp.a1(), gp.k) * std::pow(t, gp.q - 1.0);

    // Decay rates of the transformed integrand are exp(-gamma * pi * sinh x)
    // with gamma = exponent + 1 at each end; truncate where the tail < 1e-15.
    const double gamma_right = exp_c + 1.0; // phi -> pi/2
    const double gamma_left = exp_s + 1.0;  // phi -> 0
    const double x_right = std::asinh(34.5 / (M_PI * gamma_right));
    const double x_left = std::asinh(34.5 / (M_PI * gamma_left));

    const int n = n_phi;
    const double h = (x_left + x_right) / (n - 1);

    SphereRule rule;
    rule.t = t;
    rule.nodes.reserve(n);
    rule.weights.reserve(n);
    rule.cphi.reserve(n);
    rule.sphi.reserve(n);

    for (int i = 0; i < n; ++i) {
        const double x = -x_left + i * h;
        const double u = M_PI_2 * std::sinh(x);
        // phi = (pi/4)(1 + tanh u) and its distance to the endpoints, both
        // computed without cancellation.
        const double e2u = std::exp(-2.0 * std::abs(u));
        const double dist = M_PI_2 * e2u / (1.0 + e2u); // distance to nearest endpoint
        const double phi = (u >= 0.0) ? M_PI_2 - dist : dist;
        const double cphi = (u >= 0.0) ? std::sin(dist) : std::cos(dist);
        const double sphi = (u >= 0.0) ? std::cos(dist) : std::sin(dist);
        const double sech = 2.0 * std::sqrt(e2u) / (1.0 + e2u); // sech(u)
        const double dphi_dx = (M_PI * M_PI / 8.0) * std::cosh(x) * sech * sech;
        const double w = h * dphi_dx * measure_const * std::pow(cphi, exp_c) *
                         std::pow(sphi, exp_s);
        if (!(w > 0.0)) continue; // underflowed tail node
        rule.nodes.push_back(phi);
        rule.weights.push_back(w);
        rule.cphi.push_back(cphi);
        rule.sphi.push_back(sphi);
    }
    return rule;
}

// ---------------------------------------------------------------------------
// Ring integrals by the coarea formula: composite Simpson in t of the
// sphere-rule integrals.
// ---------------------------------------------------------------------------

/// Integrand receives the frame of the sphere node it is evaluated at.
using RingIntegrand = std::function<double(const SphereFrame&)>;

inline double ring_integral(const GrushinParams& gp, const GaugeAnnulus& ann,
                            const RingIntegrand& h, int n_t, int n_phi) {
    if (n_t < 2) throw ArgumentError("ring_integral: n_t must be >= 2");
    if (n_t % 2 != 0) ++n_t;
    const double ht = (ann.t_outer - ann.t_inner) / n_t;

    auto shell = [&](double t) {
        const SphereRule rule = sphere_rule(gp, t, n_phi);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const SphereFrame f = sphere_frame(gp, t, rule.nodes[i], rule.cphi[i], rule.sphi[i]);
            acc += rule.weights[i] * h(f);
        }
        return acc;
    };

    double acc = shell(ann.t_inner) + shell(ann.t_outer);
    for (int i = 1; i < n_t; ++i) {
        const double t = ann.t_inner + i * ht;
        acc += (i % 2 == 1 ? 4.0 : 2.0) * shell(t);
    }
    return acc * ht / 3.0;
}

/// Convenience overload for pointwise integrands h(r, s).
inline double ring_integral(const GrushinParams& gp, const GaugeAnnulus& ann,
                            const std::function<double(CylPoint)>& h, int n_t, int n_phi) {
    return ring_integral(
        gp, ann, [&](const SphereFrame& f) { return h(CylPoint{f.r, f.s}); }, n_t, n_phi);
}

// ---------------------------------------------------------------------------
// Startup self-checks. The closed-form Jacobian and the Z u / rho = d/dt u
// identity are treated as derived data: both are validated numerically and a
// mismatch is a hard failure.
// ---------------------------------------------------------------------------

inline void run_self_checks(const GrushinParams& gp) {
    // (1) closed-form Jacobian vs central differences of the polar map
    for (double t : {0.7, 2.0}) {
        for (double phi : {0.3, 1.0, 1.4}) {
            const double dt = 1e-5, dp = 1e-5;
            auto map = [&](double tt, double pp) { return from_gauge_coords(gp, {tt, pp}); };
            const CylPoint pt1 = map(t + dt, phi), pt0 = map(t - dt, phi);
            const CylPoint pp1 = map(t, phi + dp), pp0 = map(t, phi - dp);
            const double rt = (pt1.r - pt0.r) / (2 * dt), st = (pt1.s - pt0.s) / (2 * dt);
            const double rp = (pp1.r - pp0.r) / (2 * dp), sp = (pp1.s - pp0.s) / (2 * dp);
            const double j_fd = std::abs(rt * sp - rp * st);
            const double j_cf = polar_jacobian(gp, t, phi);
            if (std::abs(j_fd - j_cf) > 1e-6 * std::abs(j_cf))
                throw Error("self-check failed: closed-form polar Jacobian disagrees with "
                            "finite differences");
        }
    }
    // (2) the polar map lands on the gauge sphere
    for (double t : {0.5, 1.0, 7.0})
        for (double phi : {0.0, 0.4, 1.2, M_PI_2})
            if (std::abs(gauge(gp, from_gauge_coords(gp, {t, phi})) - t) > 1e-12 * t)
                throw Error("self-check failed: gauge(from_gauge_coords(t, phi)) != t");
    // (3) sphere measure scales like t^{Q-1}
    {
        const double m1 = sphere_rule(gp, 0.7, 64).integrate([](double) { return 1.0; });
        const double m2 = sphere_rule(gp, 3.0, 64).integrate([](double) { return 1.0; });
        const double r1 = m1 / std::pow(0.7, gp.q - 1.0);
        const double r2 = m2 / std::pow(3.0, gp.q - 1.0);
        if (std::abs(r1 - r2) > 1e-10 * std::abs(r2))
            throw Error("self-check failed: sphere measure does not scale like t^{Q-1}");
    }
    // (4) d/dt along the polar map equals Z u / rho (test on a Gaussian)
    for (double t : {0.9, 2.3}) {
        for (double phi : {0.2, 0.9, 1.3}) {
            auto g = [&](double tt) {
                const CylPoint p = from_gauge_coords(gp, {tt, phi});
                return std::exp(-(p.r * p.r + p.s * p.s) / 2.0);
            };
            const double dt = 1e-6 * t;
            const double fd = (g(t + dt) - g(t - dt)) / (2 * dt);
            const CylPoint p = from_gauge_coords(gp, {t, phi});
            const double gv = std::exp(-(p.r * p.r + p.s * p.s) / 2.0);
            const double zu = p.r * (-p.r * gv) + gp.a1() * p.s * (-p.s * gv);
            if (std::abs(fd - zu / t) > 1e-6 * (std::abs(zu / t) + 1e-3))
                throw Error("self-check failed: d/dt u along the polar map != Z u / rho");
        }
    }
}

} // namespace grushin
