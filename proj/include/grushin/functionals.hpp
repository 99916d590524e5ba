#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "grushin/fields.hpp"
#include "grushin/geometry.hpp"
#include "grushin/params.hpp"

namespace grushin {

// ---------------------------------------------------------------------------
// Field access on gauge spheres. A sphere evaluator returns the value and the
// (d/dt, d/dphi) derivatives of the bare field f at a frame point; everything
// downstream (weighted fields u = rho^ell f, gradients, Z u / rho = d/dt u)
// is assembled from these. For analytic fields d/dt u is the exact Z u / rho;
// for grid fields it is the stencil derivative along t.
// ---------------------------------------------------------------------------

struct SphereSample {
    double f = 0.0;
    double ft = 0.0;   // d/dt of f along the polar map (= Z f / rho)
    double fphi = 0.0; // d/dphi of f
};

using SphereEvaluator = std::function<SphereSample(const SphereFrame&)>;

inline SphereEvaluator make_evaluator(const AnalyticField& field) {
    const GrushinParams gp = field.params;
    auto jet = field.jet;
    return [gp, jet](const SphereFrame& fr) {
        const Jet2 j = jet(CylPoint{fr.r, fr.s});
        SphereSample s;
        s.f = j.v;
        const double zf = fr.r * j.dr + gp.a1() * fr.s * j.ds;
        s.ft = zf / fr.t;
        // dr/dphi, ds/dphi of the polar map
        const double drdphi = -fr.t * gp.beta() * std::pow(fr.cphi, gp.beta() - 1.0) * fr.sphi;
        const double dsdphi = std::pow(fr.t, gp.a1()) * fr.cphi / (2.0 * gp.a1());
        s.fphi = j.dr * drdphi + j.ds * dsdphi;
        return s;
    };
}

// ---------------------------------------------------------------------------
// One-pass sphere integrals of the weighted field u = rho^ell f on S_t.
// All integrals are against the coarea measure dsigma / |grad rho|.
// ---------------------------------------------------------------------------

struct SphereIntegrals {
    double u2 = 0.0;     // int u^2
    double u2psi = 0.0;  // int u^2 psi
    double ut2psi = 0.0; // int (Z u / rho)^2 psi
    double grad2 = 0.0;  // int |grad_alpha u|^2
    double flux = 0.0;   // int Z(u^2) psi = int 2 u (t du/dt) psi
    double f2psi = 0.0;  // int f^2 psi (unweighted field)
};

inline SphereIntegrals sphere_integrals(const GrushinParams& gp, const SphereEvaluator& eval,
                                        double t, double ell, int n_phi = 64,
                                        bool unit_weight = false) {
    const SphereRule rule = sphere_rule(gp, t, n_phi);
    // unit_weight drops the common t^ell factor (all integrals scale by
    // t^{2 ell} on a single sphere), keeping large ell overflow-free
    const double tl = unit_weight ? 1.0 : std::pow(t, ell);
    SphereIntegrals out;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const SphereFrame fr = sphere_frame(gp, t, rule.nodes[i], rule.cphi[i], rule.sphi[i]);
        const SphereSample s = eval(fr);
        const double u = tl * s.f;
        const double ut = ell * tl / t * s.f + tl * s.ft;
        const double uphi = tl * s.fphi;
        const double w = rule.weights[i];
        out.u2 += w * u * u;
        out.u2psi += w * u * u * fr.psi;
        out.ut2psi += w * ut * ut * fr.psi;
        out.grad2 += w * fr.grad_alpha_sq(ut, uphi);
        out.flux += w * 2.0 * u * (t * ut) * fr.psi;
        out.f2psi += w * s.f * s.f * fr.psi;
    }
    return out;
}

// ---------------------------------------------------------------------------
// The two sphere functionals. F acts on u = rho^ell f,
//
//   F(ell, t) = int 2 (Zu/rho)^2 psi - |grad u|^2 + u^2 - (u^2/rho) psi
//               + ell (ell - Q + 2) (u/rho)^2 psi,
//
// and G acts on w = rho^{(Q-1)/2} f with the (Q-1)(Q-3)/4 zero-order weight.
// G requires Q >= 3.
// ---------------------------------------------------------------------------

inline double F_functional(const GrushinParams& gp, const SphereEvaluator& eval, double ell,
                           double t, int n_phi = 64) {
    if (!(t > 0.0)) throw ArgumentError("F_functional: t must be > 0");
    const SphereIntegrals I = sphere_integrals(gp, eval, t, ell, n_phi);
    return 2.0 * I.ut2psi - I.grad2 + I.u2 - I.u2psi / t +
           ell * (ell - gp.q + 2.0) * I.u2psi / (t * t);
}

inline double G_functional(const GrushinParams& gp, const SphereEvaluator& eval, double t,
                           int n_phi = 64) {
    gp.require_q_at_least(3.0);
    const double ellw = 0.5 * (gp.q - 1.0);
    const SphereIntegrals I = sphere_integrals(gp, eval, t, ellw, n_phi);
    return 2.0 * I.ut2psi - I.grad2 + I.u2 -
           0.25 * (gp.q - 1.0) * (gp.q - 3.0) * I.u2psi / (t * t);
}

/// int_{S_t} Z(w^2) psi with w = rho^{(Q-1)/2} f.
inline double flux_Zw2(const GrushinParams& gp, const SphereEvaluator& eval, double t,
                       int n_phi = 64) {
    return sphere_integrals(gp, eval, t, 0.5 * (gp.q - 1.0), n_phi).flux;
}

/// int_{S_t} f^2 psi >= 0; positive surface mass certifies a positivity radius.
inline double surface_positivity(const GrushinParams& gp, const SphereEvaluator& eval, double t,
                                 int n_phi = 64) {
    return sphere_integrals(gp, eval, t, 0.0, n_phi).f2psi;
}

/// C(f, r0) = r0^2 [ int |grad f|^2 - int (Zf/rho)^2 psi ] / int f^2 psi + r0.
/// Always >= r0 by the tangential inequality.
inline double C_threshold(const GrushinParams& gp, const SphereEvaluator& eval, double r0,
                          int n_phi = 64) {
    const SphereIntegrals I = sphere_integrals(gp, eval, r0, 0.0, n_phi);
    if (!(I.f2psi > 0.0))
        throw PreconditionError(
            "C_threshold: surface mass of f^2 psi vanishes at r0; no positivity radius there");
    return r0 * r0 * (I.grad2 - I.ut2psi) / I.f2psi + r0;
}

// ---------------------------------------------------------------------------
// Algebraic consistency between F, G and the flux term:
//   F(l0,t) = t^{2 l1} G(w,t) + l1 t^{2(l1-1)} flux
//             - t^{2 l0 - 1} (1 - c(l0,Q)/t) int f^2 psi,
// with l1 = (2 l0 - Q + 1)/2 and c = l0(l0-Q+2) + l1^2 + (Q-1)(Q-3)/4.
// The identity is pure algebra (no equation needed) and pins the homogeneous
// dimension Q in the coefficient c; the reading with the ambient dimension N
// in place of Q fails for alpha > 0.
// ---------------------------------------------------------------------------

struct FluxConsistency {
    double residual = 0.0;
    double scale = 0.0;
    double rel() const { return scale > 0.0 ? std::abs(residual) / scale : 0.0; }
};

inline FluxConsistency fg_flux_consistency(const GrushinParams& gp, const SphereEvaluator& eval,
                                           double ell0, double t, int n_phi = 64) {
    gp.require_q_at_least(3.0);
    const double q = gp.q;
    const double ell1 = 0.5 * (2.0 * ell0 - q + 1.0);
    const double F = F_functional(gp, eval, ell0, t, n_phi);
    const double G = G_functional(gp, eval, t, n_phi);
    const double fx = flux_Zw2(gp, eval, t, n_phi);
    const double f2psi = surface_positivity(gp, eval, t, n_phi);
    const double c = ell0 * (ell0 - q + 2.0) + ell1 * ell1 + 0.25 * (q - 1.0) * (q - 3.0);
    const double term_g = std::pow(t, 2.0 * ell1) * G;
    const double term_flux = ell1 * std::pow(t, 2.0 * (ell1 - 1.0)) * fx;
    const double term_mass = std::pow(t, 2.0 * ell0 - 1.0) * (1.0 - c / t) * f2psi;
    FluxConsistency out;
    out.residual = F - (term_g + term_flux - term_mass);
    out.scale = std::abs(F) + std::abs(term_g) + std::abs(term_flux) + std::abs(term_mass);
    return out;
}

// ---------------------------------------------------------------------------
// Ring quantities: composite Simpson in t of sphere-rule integrals.
// ---------------------------------------------------------------------------

inline double ring_field_integral(
    const GrushinParams& gp, const SphereEvaluator& eval, const GaugeAnnulus& ann, int n_t,
    int n_phi, const std::function<double(const SphereFrame&, const SphereSample&)>& g) {
    if (n_t < 2) n_t = 2;
    if (n_t % 2 != 0) ++n_t;
    const double ht = (ann.t_outer - ann.t_inner) / n_t;
    auto shell = [&](double t) {
        const SphereRule rule = sphere_rule(gp, t, n_phi);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const SphereFrame fr = sphere_frame(gp, t, rule.nodes[i], rule.cphi[i], rule.sphi[i]);
            acc += rule.weights[i] * g(fr, eval(fr));
        }
        return acc;
    };
    double acc = shell(ann.t_inner) + shell(ann.t_outer);
    for (int i = 1; i < n_t; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * shell(ann.t_inner + i * ht);
    return acc * ht / 3.0;
}

/// int_{R < rho < 2R} f^2.
inline double ring_mass(const GrushinParams& gp, const SphereEvaluator& eval, double R,
                        int n_t = 64, int n_phi = 64) {
    if (!(R > 0.0)) throw ArgumentError("ring_mass: R must be > 0");
    return ring_field_integral(gp, eval, GaugeAnnulus(R, 2.0 * R), n_t, n_phi,
                               [](const SphereFrame&, const SphereSample& s) { return s.f * s.f; });
}

/// Caccioppoli-type ratio int_{5R/4 < rho < 7R/4} |grad f|^2 / int_{R < rho < 2R} f^2.
inline double energy_ratio(const GrushinParams& gp, const SphereEvaluator& eval, double R,
                           int n_t = 64, int n_phi = 64) {
    const double num = ring_field_integral(
        gp, eval, GaugeAnnulus(1.25 * R, 1.75 * R), n_t, n_phi,
        [](const SphereFrame& fr, const SphereSample& s) { return fr.grad_alpha_sq(s.ft, s.fphi); });
    const double den = ring_mass(gp, eval, R, n_t, n_phi);
    if (!(den > 0.0)) throw PreconditionError("energy_ratio: ring mass denominator vanishes");
    return num / den;
}

// ---------------------------------------------------------------------------
// Traces and monotonicity verdicts.
// ---------------------------------------------------------------------------

enum class TraceKind { F, G, RingMass, Flux, LpTrace, EnergyRatio };

inline const char* trace_kind_name(TraceKind k) {
    switch (k) {
        case TraceKind::F: return "F";
        case TraceKind::G: return "G";
        case TraceKind::RingMass: return "ring_mass";
        case TraceKind::Flux: return "flux";
        case TraceKind::LpTrace: return "lp_trace";
        case TraceKind::EnergyRatio: return "energy_ratio";
    }
    return "?";
}

struct FunctionalTrace {
    TraceKind kind = TraceKind::F;
    double ell_or_p = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, double>> samples; // (t, value), t increasing
};

inline FunctionalTrace F_trace(const GrushinParams& gp, const SphereEvaluator& eval, double ell,
                               const std::vector<double>& ts, int n_phi = 64) {
    FunctionalTrace tr;
    tr.kind = TraceKind::F;
    tr.ell_or_p = ell;
    for (double t : ts) tr.samples.emplace_back(t, F_functional(gp, eval, ell, t, n_phi));
    return tr;
}

inline FunctionalTrace G_trace(const GrushinParams& gp, const SphereEvaluator& eval,
                               const std::vector<double>& ts, int n_phi = 64) {
    FunctionalTrace tr;
    tr.kind = TraceKind::G;
    for (double t : ts) tr.samples.emplace_back(t, G_functional(gp, eval, t, n_phi));
    return tr;
}

inline FunctionalTrace flux_trace(const GrushinParams& gp, const SphereEvaluator& eval,
                                  const std::vector<double>& ts, int n_phi = 64) {
    FunctionalTrace tr;
    tr.kind = TraceKind::Flux;
    for (double t : ts) tr.samples.emplace_back(t, flux_Zw2(gp, eval, t, n_phi));
    return tr;
}

struct MonotonicityVerdict {
    bool pass = true;
    double worst_violation = 0.0; // relative drop between consecutive samples
    double at_t = 0.0;
    double eps = 0.0;
};

/// Checks that t^{weight} * value is nondecreasing up to a relative tolerance.
inline MonotonicityVerdict monotonicity_check(const FunctionalTrace& trace, double weight,
                                              double eps_mono = 1e-3) {
    MonotonicityVerdict v;
    v.eps = eps_mono;
    if (trace.samples.size() < 2) return v;
    double vmax = 0.0;
    std::vector<double> w;
    w.reserve(trace.samples.size());
    for (const auto& [t, val] : trace.samples) {
        w.push_back(std::pow(t, weight) * val);
        vmax = std::max(vmax, std::abs(w.back()));
    }
    const double floor = 1e-12 * vmax + 1e-300;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        const double scale = std::max({std::abs(w[i]), std::abs(w[i + 1]), floor});
        const double viol = (w[i] - w[i + 1]) / scale;
        if (viol > v.worst_violation) {
            v.worst_violation = viol;
            v.at_t = trace.samples[i].first;
        }
    }
    v.pass = v.worst_violation <= eps_mono;
    return v;
}

// ---------------------------------------------------------------------------
// Ring lower bound: M_hat = min over the R grid of ring_mass(R)/R, reported
// with a quadrature-refinement history rather than a pass/fail against an
// unknown constant.
// ---------------------------------------------------------------------------

struct LowerBoundReport {
    std::vector<double> r_grid;
    std::vector<double> masses;     // ring_mass(R) at base resolution
    std::vector<double> masses_ref; // one refinement step
    double m_hat = 0.0;
    double m_hat_ref = 0.0;
    double refinement_drift() const {
        return m_hat_ref != 0.0 ? std::abs(m_hat - m_hat_ref) / std::abs(m_hat_ref) : 0.0;
    }
};

inline LowerBoundReport rellich_lowerbound(const GrushinParams& gp, const SphereEvaluator& eval,
                                           const std::vector<double>& r_grid, int n_t = 64,
                                           int n_phi = 64) {
    LowerBoundReport rep;
    rep.r_grid = r_grid;
    double m0 = std::numeric_limits<double>::infinity();
    double m1 = std::numeric_limits<double>::infinity();
    for (double R : r_grid) {
        const double base = ring_mass(gp, eval, R, n_t, n_phi);
        const double ref = ring_mass(gp, eval, R, 2 * n_t, 2 * n_phi);
        rep.masses.push_back(base);
        rep.masses_ref.push_back(ref);
        m0 = std::min(m0, base / R);
        m1 = std::min(m1, ref / R);
    }
    rep.m_hat = m0;
    rep.m_hat_ref = m1;
    return rep;
}

// ---------------------------------------------------------------------------
// L^p threshold study. T(p, R) accumulates int_{r0 < rho < R} |f|^p along a
// doubling ladder; the doubling increments decide the verdict.
// ---------------------------------------------------------------------------

struct LpRow {
    double p = 0.0;
    std::vector<double> increments; // int over (R_j, R_{j+1})
    std::vector<double> cumulative; // T(p, R_j)
    std::string verdict;            // "diverging" | "converging"
};

struct ThresholdReport {
    double p_star = 0.0;
    std::vector<double> ladder;
    std::vector<LpRow> rows;
};

inline ThresholdReport lp_threshold(const GrushinParams& gp, const SphereEvaluator& eval,
                                    const std::vector<double>& p_list,
                                    const std::vector<double>& ladder, int n_t = 64,
                                    int n_phi = 64) {
    if (ladder.size() < 3) throw ArgumentError("lp_threshold: ladder needs >= 3 rungs");
    ThresholdReport rep;
    rep.p_star = 2.0 * gp.q / (gp.q - 1.0);
    rep.ladder = ladder;
    for (double p : p_list) {
        LpRow row;
        row.p = p;
        double cum = 0.0;
        row.cumulative.push_back(0.0);
        for (std::size_t j = 0; j + 1 < ladder.size(); ++j) {
            const double inc = ring_field_integral(
                gp, eval, GaugeAnnulus(ladder[j], ladder[j + 1]), n_t, n_phi,
                [p](const SphereFrame&, const SphereSample& s) {
                    return std::pow(std::abs(s.f), p);
                });
            row.increments.push_back(inc);
            cum += inc;
            row.cumulative.push_back(cum);
        }
        // geometric decay of increments <=> finite L^p mass (up to the ladder)
        const std::size_t n = row.increments.size();
        const double tiny = 1e-300;
        if (row.increments[n - 1] < tiny && row.increments[n - 2] < tiny) {
            row.verdict = "converging";
        } else {
            const double ratio = row.increments[n - 1] / std::max(tiny, row.increments[n - 2]);
            row.verdict = (ratio <= 0.92) ? "converging" : "diverging";
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Rellich identity on a ring. Eight terms of
//
//   2 int_dOmega rho^s (Zu/rho)^2 <Z,nu> psi  - int_dOmega rho^s |grad u|^2 <Z,nu>
//   + int_dOmega rho^s u^2 <Z,nu>  + l(l-Q+2) int_dOmega rho^{s-2} u^2 <Z,nu> psi
//   = (2-Q-s) int rho^s |grad u|^2 + 2(2l+s) int rho^s (Zu/rho)^2 psi
//   + (Q+s) int rho^s u^2 + l(l-Q+2)(Q+s-2) int rho^{s-2} u^2 psi,
//
// boundary terms as outer-minus-inner with <Z,nu> dsigma = t dsigma/|grad rho|.
// ---------------------------------------------------------------------------

struct RellichReport {
    double ell = 0.0;
    double s_exp = 0.0;
    double t_inner = 0.0, t_outer = 0.0;
    std::array<double, 4> lhs{}; // boundary terms, outer minus inner
    std::array<double, 4> rhs{}; // bulk terms
    double residual = 0.0;
    double scale = 0.0;
    bool flagged = false; // set when the input is not a kappa=1 solution
    std::string note;

    double rel() const { return scale > 0.0 ? std::abs(residual) / scale : 0.0; }
};

inline RellichReport rellich_identity_report(const GrushinParams& gp, const SphereEvaluator& eval,
                                             double ell, double s_exp, const GaugeAnnulus& ann,
                                             int n_t = 64, int n_phi = 64,
                                             std::optional<double> solution_residual = {}) {
    if (s_exp == 0.0) throw ArgumentError("rellich_identity_report: s must be nonzero");
    RellichReport rep;
    rep.ell = ell;
    rep.s_exp = s_exp;
    rep.t_inner = ann.t_inner;
    rep.t_outer = ann.t_outer;

    const double lq = ell * (ell - gp.q + 2.0);
    auto boundary = [&](double t) {
        const SphereIntegrals I = sphere_integrals(gp, eval, t, ell, n_phi);
        std::array<double, 4> b;
        b[0] = 2.0 * std::pow(t, s_exp + 1.0) * I.ut2psi;
        b[1] = -std::pow(t, s_exp + 1.0) * I.grad2;
        b[2] = std::pow(t, s_exp + 1.0) * I.u2;
        b[3] = lq * std::pow(t, s_exp - 1.0) * I.u2psi;
        return b;
    };
    const std::array<double, 4> outer = boundary(ann.t_outer);
    const std::array<double, 4> inner = boundary(ann.t_inner);
    for (int i = 0; i < 4; ++i) rep.lhs[i] = outer[i] - inner[i];

    // bulk integrals, composite Simpson in t
    int nt = (n_t % 2 == 0) ? n_t : n_t + 1;
    const double ht = (ann.t_outer - ann.t_inner) / nt;
    std::array<double, 4> bulk{};
    for (int i = 0; i <= nt; ++i) {
        const double t = ann.t_inner + i * ht;
        const double cw = (i == 0 || i == nt) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const SphereIntegrals I = sphere_integrals(gp, eval, t, ell, n_phi);
        const double ts = std::pow(t, s_exp);
        bulk[0] += cw * ts * I.grad2;
        bulk[1] += cw * ts * I.ut2psi;
        bulk[2] += cw * ts * I.u2;
        bulk[3] += cw * std::pow(t, s_exp - 2.0) * I.u2psi;
    }
    for (auto& b : bulk) b *= ht / 3.0;
    rep.rhs[0] = (2.0 - gp.q - s_exp) * bulk[0];
    rep.rhs[1] = 2.0 * (2.0 * ell + s_exp) * bulk[1];
    rep.rhs[2] = (gp.q + s_exp) * bulk[2];
    rep.rhs[3] = lq * (gp.q + s_exp - 2.0) * bulk[3];

    double lhs_sum = 0.0, rhs_sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        lhs_sum += rep.lhs[i];
        rhs_sum += rep.rhs[i];
        rep.scale += std::abs(rep.lhs[i]) + std::abs(rep.rhs[i]);
    }
    rep.residual = lhs_sum - rhs_sum;

    if (solution_residual && !(std::abs(*solution_residual) <= 1e-6)) {
        rep.flagged = true;
        rep.note = "input field does not satisfy the kappa = 1 equation; residual is not "
                   "an identity check";
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Positivity of F at the positivity radius (the ell0 > max{Q-1, C(f,r0)} gate).
// ---------------------------------------------------------------------------

struct PositivityVerdict {
    bool pass = false;
    std::vector<std::pair<double, double>> values; // (ell, F(ell, r0))
};

inline PositivityVerdict F_positivity_check(const GrushinParams& gp, const SphereEvaluator& eval,
                                            double r0, double ell0, int n_phi = 64) {
    if (!(surface_positivity(gp, eval, r0, n_phi) > 0.0))
        throw PreconditionError("F_positivity_check: surface mass of f^2 psi vanishes at r0; "
                                "pick a positivity radius first");
    PositivityVerdict v;
    v.pass = true;
    for (double ell : {ell0, ell0 + 1.0, ell0 + 5.0}) {
        // r0^{-2 ell} F(ell, r0): same sign, immune to overflow at large ell
        const SphereIntegrals I = sphere_integrals(gp, eval, r0, ell, n_phi, true);
        const double F = 2.0 * I.ut2psi - I.grad2 + I.u2 - I.u2psi / r0 +
                         ell * (ell - gp.q + 2.0) * I.u2psi / (r0 * r0);
        v.values.emplace_back(ell, F);
        if (!(F > 0.0)) v.pass = false;
    }
    return v;
}

} // namespace grushin
