#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "grushin/fields.hpp"
#include "grushin/grid.hpp"
#include "grushin/params.hpp"

namespace grushin {

// ---------------------------------------------------------------------------
// Finite differences for B_alpha + kappa^2 in gauge-polar coordinates. The
// operator separates there:
//
//   B_alpha u = psi(phi) [ u_tt + (Q-1) u_t / t ]
//             + ((alpha+1)^2 / t^2) (1/v) d_phi ( v psi u_phi ),
//
// with v = cos^{beta m - 1} sin^{k-1} and psi = cos^{2 - 2 beta}. Both pieces
// are discretised in conservative (flux) form with midpoint coefficients,
// second order on the uniform grid. phi-edge closures are zero-flux, exact
// for the even symmetry class; t-edges carry Dirichlet data.
// ---------------------------------------------------------------------------

struct SolveConfig {
    GrushinParams params;
    double kappa = 1.0;
    GaugeAnnulus annulus{1.0, 2.0};
    int n_t = 64;
    int n_phi = 16;
    std::function<double(double)> bc_inner; // Dirichlet data as functions of phi
    std::function<double(double)> bc_outer;
    double tol = 1e-9;                  // linear-solver residual gate
    double resonance_threshold = 1e8;   // |u|_inf / |bc|_inf blowup gate

    void validate() const {
        if (n_t < 8 || n_phi < 8) throw ArgumentError("SolveConfig: n_t, n_phi must be >= 8");
        if (!(kappa > 0.0)) throw ArgumentError("SolveConfig: kappa must be > 0");
    }
};

struct AssembledOperator {
    Grid2D grid;
    GrushinParams params;
    double kappa = 0.0;
    Eigen::SparseMatrix<double> A; // interior x interior
    Eigen::SparseMatrix<double> B; // interior x (2 n_phi): [inner row | outer row]

    int interior_rows() const { return (grid.n_t - 2) * grid.n_phi; }

    /// Residual of (B_alpha + kappa^2) u on interior nodes for a full field.
    Eigen::VectorXd apply(const GridField& u) const {
        const int np = grid.n_phi;
        Eigen::VectorXd ui(interior_rows()), ub(2 * np);
        for (int i = 1; i + 1 < grid.n_t; ++i)
            for (int j = 0; j < np; ++j) ui((i - 1) * np + j) = u.at(i, j);
        for (int j = 0; j < np; ++j) {
            ub(j) = u.at(0, j);
            ub(np + j) = u.at(grid.n_t - 1, j);
        }
        return A * ui + B * ub;
    }
};

inline AssembledOperator assemble_operator(const GrushinParams& gp, double kappa,
                                           const Grid2D& grid) {
    const int nt = grid.n_t, np = grid.n_phi;
    const double ht = grid.h_t(), hp = grid.h_phi();
    const double beta = 1.0 / gp.a1();
    const double qm1 = gp.q - 1.0;
    const double exp_v = beta * gp.m - 1.0;        // cos exponent of the measure v
    const double exp_q = beta * (gp.m - 2.0) + 1.0; // cos exponent of v * psi

    auto vfun = [&](double phi) {
        return std::pow(std::cos(phi), exp_v) * std::pow(std::sin(phi), gp.k - 1.0);
    };
    auto qfun = [&](double phi) {
        return std::pow(std::cos(phi), exp_q) * std::pow(std::sin(phi), gp.k - 1.0);
    };

    AssembledOperator op;
    op.grid = grid;
    op.params = gp;
    op.kappa = kappa;

    std::vector<Eigen::Triplet<double>> trA, trB;
    trA.reserve(static_cast<std::size_t>(nt) * np * 5);

    for (int i = 1; i + 1 < nt; ++i) {
        const double t = grid.t_node(i);
        const double tq = std::pow(t, qm1);
        const double g_p = std::pow(t + 0.5 * ht, qm1);
        const double g_m = std::pow(t - 0.5 * ht, qm1);
        const double cphi_t = gp.a1() * gp.a1() / (t * t);
        for (int j = 0; j < np; ++j) {
            const double phi = grid.phi_node(j);
            const double psi_j = (gp.alpha == 0.0) ? 1.0 : std::pow(std::cos(phi), 2.0 - 2.0 * beta);
            const double v_j = vfun(phi);
            const int row = (i - 1) * np + j;

            const double ct_p = psi_j * g_p / (tq * ht * ht);
            const double ct_m = psi_j * g_m / (tq * ht * ht);
            const double cp_p = (j + 1 < np) ? cphi_t * qfun((j + 1) * hp) / (v_j * hp * hp) : 0.0;
            const double cp_m = (j > 0) ? cphi_t * qfun(j * hp) / (v_j * hp * hp) : 0.0;

            trA.emplace_back(row, row, -(ct_p + ct_m + cp_p + cp_m) + kappa * kappa);
            if (cp_p != 0.0) trA.emplace_back(row, row + 1, cp_p);
            if (cp_m != 0.0) trA.emplace_back(row, row - 1, cp_m);
            if (i + 1 < nt - 1)
                trA.emplace_back(row, row + np, ct_p);
            else
                trB.emplace_back(row, np + j, ct_p); // outer Dirichlet column
            if (i - 1 > 0)
                trA.emplace_back(row, row - np, ct_m);
            else
                trB.emplace_back(row, j, ct_m); // inner Dirichlet column
        }
    }

    op.A.resize((nt - 2) * np, (nt - 2) * np);
    op.A.setFromTriplets(trA.begin(), trA.end());
    op.B.resize((nt - 2) * np, 2 * np);
    op.B.setFromTriplets(trB.begin(), trB.end());
    return op;
}

inline AssembledOperator assemble_operator(const SolveConfig& cfg) {
    cfg.validate();
    return assemble_operator(
        cfg.params, cfg.kappa,
        Grid2D::make(cfg.annulus.t_inner, cfg.annulus.t_outer, cfg.n_t, cfg.n_phi));
}

// ---------------------------------------------------------------------------
// Dirichlet solves. Boundary rows are eliminated, so the returned field
// reproduces the boundary data exactly. A huge solution norm relative to the
// data signals a Helmholtz resonance of the cavity; the error advises moving
// the outer radius.
// ---------------------------------------------------------------------------

namespace detail {

inline GridField solve_dirichlet(const AssembledOperator& op,
                                 const std::function<double(double)>& bc_inner,
                                 const std::function<double(double)>& bc_outer,
                                 const Eigen::VectorXd* source, double tol,
                                 double resonance_threshold) {
    const int np = op.grid.n_phi;
    Eigen::VectorXd ub(2 * np);
    double bc_scale = 0.0;
    for (int j = 0; j < np; ++j) {
        const double phi = op.grid.phi_node(j);
        ub(j) = bc_inner ? bc_inner(phi) : 0.0;
        ub(np + j) = bc_outer ? bc_outer(phi) : 0.0;
        bc_scale = std::max({bc_scale, std::abs(ub(j)), std::abs(ub(np + j))});
    }

    Eigen::VectorXd rhs = -(op.B * ub);
    if (source) rhs += *source;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(op.A);
    if (lu.info() != Eigen::Success)
        throw ResonanceError("solve_helmholtz: factorization failed; kappa^2 may be resonant "
                             "for this ring -- perturb t_max and retry");
    const Eigen::VectorXd x = lu.solve(rhs);
    const double res = (op.A * x - rhs).cwiseAbs().maxCoeff();
    const double rhs_scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    if (!(res <= tol * rhs_scale))
        throw SolverError("solve_helmholtz: linear residual " + std::to_string(res) +
                          " exceeds tolerance " + std::to_string(tol * rhs_scale));
    const double data_scale = std::max(bc_scale, source ? rhs_scale : bc_scale);
    if (data_scale > 0.0 && x.cwiseAbs().maxCoeff() > resonance_threshold * data_scale)
        throw ResonanceError("solve_helmholtz: solution blowup indicates a near-resonant "
                             "cavity; perturb t_max and retry");

    GridField out;
    out.grid = op.grid;
    out.values.assign(static_cast<std::size_t>(op.grid.n_t) * np, 0.0);
    for (int j = 0; j < np; ++j) {
        out.at(0, j) = ub(j);
        out.at(op.grid.n_t - 1, j) = ub(np + j);
    }
    for (int i = 1; i + 1 < op.grid.n_t; ++i)
        for (int j = 0; j < np; ++j) out.at(i, j) = x((i - 1) * np + j);
    return out;
}

} // namespace detail

inline GridField solve_helmholtz(const SolveConfig& cfg) {
    const AssembledOperator op = assemble_operator(cfg);
    return detail::solve_dirichlet(op, cfg.bc_inner, cfg.bc_outer, nullptr, cfg.tol,
                                   cfg.resonance_threshold);
}

/// Solves (B_alpha + kappa^2) u = h with Dirichlet data, h given on nodes.
inline GridField solve_with_source(const SolveConfig& cfg,
                                   const std::function<double(double, double)>& h) {
    const AssembledOperator op = assemble_operator(cfg);
    Eigen::VectorXd src(op.interior_rows());
    for (int i = 1; i + 1 < op.grid.n_t; ++i)
        for (int j = 0; j < op.grid.n_phi; ++j)
            src((i - 1) * op.grid.n_phi + j) = h(op.grid.t_node(i), op.grid.phi_node(j));
    return detail::solve_dirichlet(op, cfg.bc_inner, cfg.bc_outer, &src, cfg.tol,
                                   cfg.resonance_threshold);
}

// ---------------------------------------------------------------------------
// Method of manufactured solutions: solve with the exact right-hand side
// h = B_alpha g* + kappa^2 g* of a catalog field and report the max-norm
// error against g* per resolution, plus the least-squares convergence order.
// ---------------------------------------------------------------------------

struct MmsReport {
    std::vector<double> hs;
    std::vector<double> errors;
    double slope = 0.0;
};

inline MmsReport mms_convergence(const GrushinParams& gp, double kappa,
                                 const AnalyticField& manufactured, const GaugeAnnulus& ann,
                                 const std::vector<std::pair<int, int>>& resolutions) {
    if (!(kappa >= 0.0)) throw ArgumentError("mms_convergence: kappa must be >= 0");
    MmsReport rep;
    auto value_at = [&](double t, double phi) {
        return manufactured.value(from_gauge_coords(gp, {t, phi}));
    };
    for (const auto& [nt, np] : resolutions) {
        const AssembledOperator op =
            assemble_operator(gp, kappa, Grid2D::make(ann.t_inner, ann.t_outer, nt, np));
        Eigen::VectorXd src(op.interior_rows());
        for (int i = 1; i + 1 < nt; ++i)
            for (int j = 0; j < np; ++j) {
                const CylPoint p =
                    from_gauge_coords(gp, {op.grid.t_node(i), op.grid.phi_node(j)});
                const Jet2 jet = manufactured.jet(p);
                src((i - 1) * np + j) = balpha_of_jet(gp, jet, p) + kappa * kappa * jet.v;
            }
        const GridField u = detail::solve_dirichlet(
            op, [&](double phi) { return value_at(ann.t_inner, phi); },
            [&](double phi) { return value_at(ann.t_outer, phi); }, &src, 1e-8, 1e12);
        double err = 0.0;
        for (int i = 1; i + 1 < nt; ++i)
            for (int j = 0; j < np; ++j)
                err = std::max(err, std::abs(u.at(i, j) -
                                             value_at(u.grid.t_node(i), u.grid.phi_node(j))));
        rep.hs.push_back(u.grid.h_t());
        rep.errors.push_back(err);
    }
    // least-squares slope of log(err) vs log(h)
    const int n = static_cast<int>(rep.hs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(rep.hs[i]), y = std::log(rep.errors[i] + 1e-300);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return rep;
}

} // namespace grushin
