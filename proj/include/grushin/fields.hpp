#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "grushin/dual.hpp"
#include "grushin/geometry.hpp"
#include "grushin/params.hpp"

namespace grushin {

// ---------------------------------------------------------------------------
// Catalog of analytic reference fields. Every entry carries hand-coded exact
// partials (jet) plus an independent nested-dual evaluation (jet_ad) of the
// same expression; the two routes are cross-checked in the test suite.
// ---------------------------------------------------------------------------

struct AnalyticField {
    std::string name;
    GrushinParams params;
    std::optional<double> kappa;       // satisfies B_alpha f = -kappa^2 f when set
    std::optional<double> homogeneity; // dilation degree, when homogeneous
    std::string domain_note;
    std::function<double(CylPoint)> value;
    std::function<Jet2(CylPoint)> jet;    // hand-coded closed forms
    std::function<Jet2(CylPoint)> jet_ad; // dual-number route, for cross-checks
};

// --- power of the gauge: rho^ell ------------------------------------------

inline Jet2 gauge_power_jet(const GrushinParams& gp, double ell, const CylPoint& p) {
    const Jet2 g = gauge_jet(gp, p);
    const double f0 = std::pow(g.v, ell);
    const double f1 = ell * std::pow(g.v, ell - 1.0);
    const double f2 = ell * (ell - 1.0) * std::pow(g.v, ell - 2.0);
    return jet_compose(f0, f1, f2, g);
}

inline AnalyticField make_power_gauge(const GrushinParams& gp, double ell,
                                      std::string name = "power_gauge") {
    AnalyticField f;
    f.name = std::move(name);
    f.params = gp;
    f.homogeneity = ell;
    f.domain_note = "smooth off the origin";
    f.value = [gp, ell](CylPoint p) { return std::pow(gauge(gp, p), ell); };
    f.jet = [gp, ell](CylPoint p) { return gauge_power_jet(gp, ell, p); };
    f.jet_ad = [gp, ell](CylPoint p) {
        return jet_from_ad([&](auto r, auto s) { return pow(gauge_expr(gp, r, s), ell); }, p.r,
                           p.s);
    };
    return f;
}

/// Fundamental-solution profile rho^{2-Q} (normalisation constant left out).
inline AnalyticField make_fundamental_solution(const GrushinParams& gp) {
    AnalyticField f = make_power_gauge(gp, 2.0 - gp.q, "fundamental_solution");
    f.kappa = 0.0;
    return f;
}

// --- homogeneous polynomial r^{2(alpha+1)} - A s^2 -------------------------

/// Constant making the polynomial B_alpha-harmonic under the |z|^{2alpha}/4
/// normalisation of the operator.
inline double poly_constant_corrected(const GrushinParams& gp) {
    return 4.0 * gp.a1() * (2.0 * gp.alpha + gp.m) / gp.k;
}

/// The constant as printed in the source material (differs by the factor 4).
inline double poly_constant_reference(const GrushinParams& gp) {
    return gp.a1() * (2.0 * gp.alpha + gp.m) / gp.k;
}

inline AnalyticField make_homogeneous_poly(const GrushinParams& gp, double A,
                                           std::string name = "homogeneous_poly") {
    AnalyticField f;
    f.name = std::move(name);
    f.params = gp;
    f.homogeneity = 2.0 * gp.a1();
    f.domain_note = "entire";
    if (A == poly_constant_corrected(gp)) f.kappa = 0.0;
    const double e = 2.0 * gp.a1();
    f.value = [A, e](CylPoint p) { return std::pow(p.r, e) - A * p.s * p.s; };
    f.jet = [A, e](CylPoint p) {
        Jet2 j;
        j.v = std::pow(p.r, e) - A * p.s * p.s;
        j.dr = e * std::pow(p.r, e - 1.0);
        j.drr = e * (e - 1.0) * std::pow(p.r, e - 2.0);
        j.ds = -2.0 * A * p.s;
        j.dss = -2.0 * A;
        j.drs = 0.0;
        return j;
    };
    f.jet_ad = [A, e](CylPoint p) {
        return jet_from_ad([&](auto r, auto s) { return pow(r, e) - A * (s * s); }, p.r, p.s);
    };
    return f;
}

// --- Bessel sharpness example (m=2, k=1, alpha=0, Q=3) ----------------------
//
// f = sin(kappa rho_0)/(kappa rho_0) with rho_0 = sqrt(r^2 + 4 s^2) solves
// B_0 f = -kappa^2 f: on cylindrically symmetric functions with m=2, k=1 the
// alpha = 0 operator is the radial 3-d Laplacian in rho_0, and sinc is the
// spherical Bessel function j_0 (the J_{1/2} reduction of the classical
// example).

template <class T>
T sinc_expr(const T& y) {
    return sin(y) / y;
}

inline void sinc_derivs(double y, double& f0, double& f1, double& f2) {
    if (std::abs(y) < 1e-4) {
        const double y2 = y * y;
        f0 = 1.0 - y2 / 6.0 + y2 * y2 / 120.0;
        f1 = -y / 3.0 + y * y2 / 30.0;
        f2 = -1.0 / 3.0 + y2 / 10.0;
        return;
    }
    f0 = std::sin(y) / y;
    f1 = (std::cos(y) - f0) / y;
    f2 = -f0 - 2.0 * f1 / y; // spherical Bessel ODE: f'' = -f - 2 f'/y
}

inline AnalyticField make_bessel3(double kappa_freq = 1.0) {
    if (!(kappa_freq > 0.0)) throw ArgumentError("make_bessel3: kappa must be > 0");
    const GrushinParams gp = GrushinParams::make(2, 1, 0.0);
    AnalyticField f;
    f.name = "bessel3";
    f.params = gp;
    f.kappa = kappa_freq;
    f.domain_note = "entire (removable singularity at the origin)";
    const double kap = kappa_freq;
    f.value = [kap](CylPoint p) {
        const double y = kap * std::sqrt(p.r * p.r + 4.0 * p.s * p.s);
        double f0, f1, f2;
        sinc_derivs(y, f0, f1, f2);
        return f0;
    };
    f.jet = [kap](CylPoint p) {
        const double rho0 = std::sqrt(p.r * p.r + 4.0 * p.s * p.s);
        if (rho0 == 0.0) return Jet2{1.0, 0, 0, 0, 0, 0};
        Jet2 g; // jet of kappa * rho0
        g.v = kap * rho0;
        g.dr = kap * p.r / rho0;
        g.ds = kap * 4.0 * p.s / rho0;
        g.drr = kap * (1.0 / rho0 - p.r * p.r / (rho0 * rho0 * rho0));
        g.dss = kap * (4.0 / rho0 - 16.0 * p.s * p.s / (rho0 * rho0 * rho0));
        g.drs = kap * (-4.0 * p.r * p.s / (rho0 * rho0 * rho0));
        double f0, f1, f2;
        sinc_derivs(g.v, f0, f1, f2);
        return jet_compose(f0, f1, f2, g);
    };
    f.jet_ad = [kap](CylPoint p) {
        return jet_from_ad(
            [&](auto r, auto s) { return sinc_expr(kap * sqrt(r * r + 4.0 * s * s)); }, p.r, p.s);
    };
    return f;
}

// --- plain smooth test fields ----------------------------------------------

inline AnalyticField make_gaussian(const GrushinParams& gp) {
    AnalyticField f;
    f.name = "gaussian";
    f.params = gp;
    f.domain_note = "entire";
    f.value = [](CylPoint p) { return std::exp(-(p.r * p.r + p.s * p.s) / 2.0); };
    f.jet = [](CylPoint p) {
        const double g = std::exp(-(p.r * p.r + p.s * p.s) / 2.0);
        Jet2 j;
        j.v = g;
        j.dr = -p.r * g;
        j.ds = -p.s * g;
        j.drr = (p.r * p.r - 1.0) * g;
        j.dss = (p.s * p.s - 1.0) * g;
        j.drs = p.r * p.s * g;
        return j;
    };
    f.jet_ad = [](CylPoint p) {
        return jet_from_ad([&](auto r, auto s) { return exp(-(r * r + s * s) / 2.0); }, p.r, p.s);
    };
    return f;
}

/// exp(-rho): radial in the gauge, realises the equality case of the
/// tangential inequality at alpha = 0.
inline AnalyticField make_exp_gauge(const GrushinParams& gp) {
    AnalyticField f;
    f.name = "exp_gauge";
    f.params = gp;
    f.domain_note = "smooth off the origin";
    f.value = [gp](CylPoint p) { return std::exp(-gauge(gp, p)); };
    f.jet = [gp](CylPoint p) {
        const Jet2 g = gauge_jet(gp, p);
        const double e = std::exp(-g.v);
        return jet_compose(e, -e, e, g);
    };
    f.jet_ad = [gp](CylPoint p) {
        return jet_from_ad([&](auto r, auto s) { return exp(-gauge_expr(gp, r, s)); }, p.r, p.s);
    };
    return f;
}

inline AnalyticField make_constant(const GrushinParams& gp, double c) {
    AnalyticField f;
    f.name = "constant";
    f.params = gp;
    f.kappa = 0.0;
    f.homogeneity = 0.0;
    f.domain_note = "entire";
    f.value = [c](CylPoint) { return c; };
    f.jet = [c](CylPoint) { return jet_constant(c); };
    f.jet_ad = [c](CylPoint) { return jet_constant(c); };
    return f;
}

// --- wrappers ---------------------------------------------------------------

/// Weighted field rho^ell * f.
inline AnalyticField make_weighted(const AnalyticField& base, double ell) {
    AnalyticField f;
    f.name = "weighted_" + base.name;
    f.params = base.params;
    if (base.homogeneity) f.homogeneity = *base.homogeneity + ell;
    f.domain_note = "smooth off the origin";
    const GrushinParams gp = base.params;
    auto bval = base.value;
    auto bjet = base.jet;
    auto bad = base.jet_ad;
    f.value = [gp, ell, bval](CylPoint p) { return std::pow(gauge(gp, p), ell) * bval(p); };
    f.jet = [gp, ell, bjet](CylPoint p) {
        return jet_mul(gauge_power_jet(gp, ell, p), bjet(p));
    };
    f.jet_ad = [gp, ell, bad](CylPoint p) {
        return jet_mul(gauge_power_jet(gp, ell, p), bad(p));
    };
    return f;
}

/// Composition with the dilation: (f o delta_lambda)(p).
inline AnalyticField make_dilated(const AnalyticField& base, double lambda) {
    if (!(lambda > 0.0)) throw ArgumentError("make_dilated: lambda must be > 0");
    AnalyticField f;
    f.name = base.name + "_dilated";
    f.params = base.params;
    f.homogeneity = base.homogeneity;
    f.domain_note = base.domain_note;
    const GrushinParams gp = base.params;
    const double ls = std::pow(lambda, gp.a1());
    auto bval = base.value;
    auto bjet = base.jet;
    f.value = [lambda, ls, bval](CylPoint p) { return bval({lambda * p.r, ls * p.s}); };
    f.jet = [lambda, ls, bjet](CylPoint p) {
        Jet2 j = bjet({lambda * p.r, ls * p.s});
        j.dr *= lambda;
        j.ds *= ls;
        j.drr *= lambda * lambda;
        j.dss *= ls * ls;
        j.drs *= lambda * ls;
        return j;
    };
    f.jet_ad = f.jet;
    return f;
}

/// Rescale x -> f(delta_{1/kappa} x); maps a kappa-eigenfunction to a
/// kappa = 1 eigenfunction.
inline AnalyticField make_kappa_normalized(const AnalyticField& base, double kappa) {
    if (!(kappa > 0.0)) throw ArgumentError("kappa_normalize: kappa must be > 0");
    AnalyticField f = make_dilated(base, 1.0 / kappa);
    f.name = base.name + "_normalized";
    if (base.kappa) f.kappa = *base.kappa / kappa;
    return f;
}

// ---------------------------------------------------------------------------
// catalog(): the reference set used across the test and experiment suites.
// bessel3 only exists at (m, k, alpha) = (2, 1, 0).
// ---------------------------------------------------------------------------

inline std::vector<AnalyticField> catalog(const GrushinParams& gp) {
    std::vector<AnalyticField> fields;
    fields.push_back(make_constant(gp, 1.0));
    fields.push_back(make_fundamental_solution(gp));
    fields.push_back(make_power_gauge(gp, 2.0));
    fields.push_back(make_homogeneous_poly(gp, poly_constant_corrected(gp)));
    fields.push_back(make_gaussian(gp));
    fields.push_back(make_exp_gauge(gp));
    fields.push_back(make_weighted(make_gaussian(gp), 2.0));
    if (gp.m == 2 && gp.k == 1 && gp.alpha == 0.0) fields.push_back(make_bessel3(1.0));
    return fields;
}

inline const AnalyticField& find_field(const std::vector<AnalyticField>& fields,
                                       const std::string& name) {
    for (const auto& f : fields)
        if (f.name == name) return f;
    throw ArgumentError("no catalog field named '" + name + "'");
}

// ---------------------------------------------------------------------------
// Pointwise operator evaluation in cylindrical coordinates:
//   B_alpha g = g_rr + (m-1) g_r / r + (r^{2 alpha}/4)(g_ss + (k-1) g_s / s).
// On the axes the even-extension limits g_r/r -> g_rr and g_s/s -> g_ss apply.
// ---------------------------------------------------------------------------

inline double balpha_of_jet(const GrushinParams& gp, const Jet2& j, const CylPoint& p) {
    const double rad_z = (p.r > 0.0) ? (gp.m - 1) * j.dr / p.r : (gp.m - 1) * j.drr;
    const double rad_s = (p.s > 0.0) ? (gp.k - 1) * j.ds / p.s : (gp.k - 1) * j.dss;
    const double r2a = (gp.alpha == 0.0) ? 1.0 : std::pow(p.r, 2.0 * gp.alpha);
    return j.drr + rad_z + 0.25 * r2a * (j.dss + rad_s);
}

/// Magnitude scale of the operator terms, for relative residual reporting.
inline double balpha_scale(const GrushinParams& gp, const Jet2& j, const CylPoint& p,
                           double kappa) {
    const double rad_z = (p.r > 0.0) ? (gp.m - 1) * j.dr / p.r : (gp.m - 1) * j.drr;
    const double rad_s = (p.s > 0.0) ? (gp.k - 1) * j.ds / p.s : (gp.k - 1) * j.dss;
    const double r2a = (gp.alpha == 0.0) ? 1.0 : std::pow(p.r, 2.0 * gp.alpha);
    return std::abs(j.drr) + std::abs(rad_z) + 0.25 * r2a * (std::abs(j.dss) + std::abs(rad_s)) +
           kappa * kappa * std::abs(j.v);
}

/// Helmholtz residual B_alpha f + kappa^2 f with kappa from the field entry.
inline double balpha_residual(const GrushinParams& gp, const AnalyticField& field,
                              const CylPoint& p) {
    require_valid(p);
    if (p.is_origin()) throw DomainError("balpha_residual: undefined at the origin");
    const double kap = field.kappa.value_or(0.0);
    const Jet2 j = field.jet(p);
    return balpha_of_jet(gp, j, p) + kap * kap * j.v;
}

// ---------------------------------------------------------------------------
// Pointwise identity suite. Residuals are scaled by the local magnitude of
// the terms involved; failures are reported, never thrown.
// ---------------------------------------------------------------------------

struct IdentityReport {
    double eikonal = 0.0;         // |grad rho|^2 = psi
    double pairing = 0.0;         // <grad u, grad rho> = (Zu/rho) psi
    double tangential_slack = 0.0;// worst negative slack of |grad u|^2 >= (Zu/rho)^2 psi
    double euler = 0.0;           // Z rho^kappa = kappa rho^kappa (kappa = 2)
    double weighted = 0.0;        // the rho^{2l} factorisation for u = rho^l f
    double euler_negq = 0.0;      // Z rho^{-Q} = -Q rho^{-Q}
    double dilation = 0.0;        // B(u o delta_lambda) = lambda^2 (B u) o delta_lambda

    double worst() const {
        double w = std::max({eikonal, pairing, euler, weighted, euler_negq, dilation});
        return std::max(w, std::max(0.0, -tangential_slack));
    }
};

inline IdentityReport check_identities(const GrushinParams& gp, const AnalyticField& field,
                                       const std::vector<CylPoint>& points, double ell = 2.5) {
    IdentityReport rep;
    rep.tangential_slack = 0.0;
    const AnalyticField weighted = make_weighted(field, ell);
    const double lambda = 2.0;
    const AnalyticField dilated = make_dilated(field, lambda);

    for (const CylPoint& p : points) {
        if (p.is_origin()) continue;
        const Jet2 f = field.jet(p);
        const Jet2 rho = gauge_jet(gp, p);
        const double ps = psi(gp, p);
        const double r2a4 = 0.25 * ((gp.alpha == 0.0) ? 1.0 : std::pow(p.r, 2.0 * gp.alpha));

        // (nara) eikonal
        {
            const double lhs = rho.dr * rho.dr + r2a4 * rho.ds * rho.ds;
            rep.eikonal = std::max(rep.eikonal, std::abs(lhs - ps) / std::max(1.0, std::abs(ps)));
        }
        const double zf = p.r * f.dr + gp.a1() * p.s * f.ds;
        const double grad2 = f.dr * f.dr + r2a4 * f.ds * f.ds;
        // (nara2) pairing
        {
            const double lhs = f.dr * rho.dr + r2a4 * f.ds * rho.ds;
            const double rhs = (zf / rho.v) * ps;
            const double scale = std::abs(lhs) + std::abs(rhs) + grad2 + 1e-300;
            rep.pairing = std::max(rep.pairing, std::abs(lhs - rhs) / std::max(1.0, scale));
        }
        // tangential inequality
        {
            const double slack = grad2 - (zf / rho.v) * (zf / rho.v) * ps;
            const double scale = std::max(1.0, grad2);
            rep.tangential_slack = std::min(rep.tangential_slack, slack / scale);
        }
        // Euler identity on rho^2
        {
            const Jet2 r2 = gauge_power_jet(gp, 2.0, p);
            const double z = p.r * r2.dr + gp.a1() * p.s * r2.ds;
            rep.euler = std::max(rep.euler, std::abs(z - 2.0 * r2.v) / std::max(1.0, std::abs(r2.v)));
        }
        // weighted identity (u = rho^ell f)
        {
            const Jet2 u = weighted.jet(p);
            const double zu = p.r * u.dr + gp.a1() * p.s * u.ds;
            const double gu2 = u.dr * u.dr + r2a4 * u.ds * u.ds;
            const double lhs = (zu / rho.v) * (zu / rho.v) * ps - gu2;
            const double rhs = std::pow(rho.v, 2.0 * ell) * ((zf / rho.v) * (zf / rho.v) * ps - grad2);
            const double scale = std::abs(lhs) + std::abs(rhs) + std::pow(rho.v, 2.0 * ell) * (grad2 + 1.0);
            rep.weighted = std::max(rep.weighted, std::abs(lhs - rhs) / std::max(1.0, scale));
        }
        // Z(rho^{-Q}) = -Q rho^{-Q}
        {
            const Jet2 rq = gauge_power_jet(gp, -gp.q, p);
            const double z = p.r * rq.dr + gp.a1() * p.s * rq.ds;
            rep.euler_negq =
                std::max(rep.euler_negq, std::abs(z + gp.q * rq.v) / std::max(1.0, std::abs(gp.q * rq.v)));
        }
        // dilation covariance of the operator
        {
            const Jet2 jd = dilated.jet(p);
            const double lhs = balpha_of_jet(gp, jd, p);
            const CylPoint pl = dilate(gp, lambda, p);
            const Jet2 jfl = field.jet(pl);
            const double rhs = lambda * lambda * balpha_of_jet(gp, jfl, pl);
            const double scale = std::abs(lhs) + std::abs(rhs);
            rep.dilation = std::max(rep.dilation, std::abs(lhs - rhs) / std::max(1.0, scale));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Interior rescaling f~(r, s) = f(r, s0 + z0^alpha s). Composition with an
// affine shift in the sigma direction; the rescaled operator
//   Delta_z + r^{2 alpha} / (4 z0^{2 alpha}) d_ss
// annihilates f~ + kappa^2 f~ wherever f solves the Helmholtz equation.
// ---------------------------------------------------------------------------

inline AnalyticField make_moser_rescaled(const AnalyticField& base, double z0_r, double s0) {
    if (!(z0_r > 0.0)) throw ArgumentError("moser_rescale: z0_r must be > 0");
    AnalyticField f;
    f.name = base.name + "_rescaled";
    f.params = base.params;
    f.domain_note = "smooth where s0 + z0^alpha s != 0";
    const double c = std::pow(z0_r, base.params.alpha);
    auto bval = base.value;
    auto bjet = base.jet;
    f.value = [c, s0, bval](CylPoint p) { return bval({p.r, std::abs(s0 + c * p.s)}); };
    f.jet = [c, s0, bjet](CylPoint p) {
        const double inner = s0 + c * p.s;
        if (inner == 0.0) throw DomainError("moser field: kink at s0 + z0^alpha s = 0");
        const double sign = inner > 0.0 ? 1.0 : -1.0;
        Jet2 j = bjet({p.r, std::abs(inner)});
        j.ds *= sign * c;
        j.dss *= c * c;
        j.drs *= sign * c;
        return j;
    };
    f.jet_ad = f.jet;
    return f;
}

/// Residual of the rescaled operator on the rescaled field (k = 1 geometry).
inline double moser_residual(const GrushinParams& gp, const AnalyticField& base, double z0_r,
                             double s0, const CylPoint& p) {
    if (gp.k != 1)
        throw ArgumentError("moser_residual: the scalar shift is defined for k = 1");
    const AnalyticField tilde = make_moser_rescaled(base, z0_r, s0);
    const Jet2 j = tilde.jet(p);
    const double rad_z = (p.r > 0.0) ? (gp.m - 1) * j.dr / p.r : (gp.m - 1) * j.drr;
    const double coeff = ((gp.alpha == 0.0) ? 1.0 : std::pow(p.r, 2.0 * gp.alpha)) /
                         (4.0 * ((gp.alpha == 0.0) ? 1.0 : std::pow(z0_r, 2.0 * gp.alpha)));
    const double kap = base.kappa.value_or(0.0);
    return j.drr + rad_z + coeff * j.dss + kap * kap * j.v;
}

} // namespace grushin
