#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "grushin/params.hpp"

namespace grushin {

// ---------------------------------------------------------------------------
// Extension realisation of the fractional Laplacian on the line:
//
//   d_zz U + z^{2 alpha} d_ss U = 0   on (0, z_max) x (-L, L),
//   U(0, s) = u(s),  U = 0 on the far sides,
//
// with alpha = 1/(2s) - 1. This module keeps the bare z^{2 alpha} coefficient
// (no 1/4): it is a different normalisation from B_alpha and the two are
// never mixed. The Dirichlet-to-Neumann map
//
//   (-Delta)^s u = -Gamma(1+s)/Gamma(1-s) * lim_{z->0+} d_z U
//
// is extracted from one-sided difference quotients on the graded z-mesh,
// Richardson-extrapolated with the known expansion exponents
// {1, 2 alpha + 2, 2 alpha + 3, ...} of U near z = 0.
//
// Constant: solving the Fourier mode u = e^{i xi sigma} exactly gives
// U = e^{i xi sigma} sqrt(z) K_s(|xi| z^{alpha+1}/(alpha+1)) (normalised),
// whose slope at z = 0 is -[Gamma(1-s)/Gamma(1+s)] (s |xi|)^{2s}. The map
// below therefore carries the factor s^{-2s} on top of Gamma(1+s)/Gamma(1-s);
// at s = 1/2 the product reduces to the classical harmonic-extension factor 1,
// and the Fourier-side quadrature oracle confirms it for s != 1/2.
// ---------------------------------------------------------------------------

struct ExtensionConfig {
    double s_exp = 0.5;                  // fractional order s in (0, 1)
    std::function<double(double)> datum; // even smooth function of sigma
    double z_max = 40.0;
    double L = 24.0;
    double mesh_gamma = 3.0; // z_j = z_max (j / n_z)^gamma
    int n_z = 120;
    int n_sigma = 960; // sigma intervals; kept even so sigma = 0 is a node
    double tol = 1e-9;

    double alpha() const { return 0.5 / s_exp - 1.0; }

    void validate() const {
        if (!(s_exp > 0.0 && s_exp < 1.0))
            throw ArgumentError("ExtensionConfig: s must lie in (0, 1)");
        if (!datum) throw ArgumentError("ExtensionConfig: datum required");
        if (!(z_max > 0.0) || !(L > 0.0) || !(mesh_gamma >= 1.0))
            throw ArgumentError("ExtensionConfig: invalid strip geometry");
        if (n_z < 16 || n_sigma < 16)
            throw ArgumentError("ExtensionConfig: resolution too small");
    }
};

struct ExtensionSolution {
    double s_exp = 0.5;
    double alpha = 0.0;
    std::vector<double> z_nodes;     // z_0 = 0 .. z_max
    std::vector<double> sigma_nodes; // -L .. L
    std::vector<double> values;      // row-major by z

    double at(int j, int i) const {
        return values[static_cast<std::size_t>(j) * sigma_nodes.size() + i];
    }
    double& at(int j, int i) {
        return values[static_cast<std::size_t>(j) * sigma_nodes.size() + i];
    }

    int sigma_index(double sigma) const {
        int best = 0;
        double dist = std::abs(sigma_nodes[0] - sigma);
        for (int i = 1; i < static_cast<int>(sigma_nodes.size()); ++i) {
            const double d = std::abs(sigma_nodes[i] - sigma);
            if (d < dist) {
                dist = d;
                best = i;
            }
        }
        return best;
    }

    /// Bilinear interpolation of U at (z, sigma).
    double value_at(double z, double sigma) const {
        const int nz = static_cast<int>(z_nodes.size()) - 1;
        const int ns = static_cast<int>(sigma_nodes.size()) - 1;
        int j = 0;
        while (j + 1 < nz && z_nodes[j + 1] < z) ++j;
        int i = 0;
        while (i + 1 < ns && sigma_nodes[i + 1] < sigma) ++i;
        const double tz = (z - z_nodes[j]) / (z_nodes[j + 1] - z_nodes[j]);
        const double ts = (sigma - sigma_nodes[i]) / (sigma_nodes[i + 1] - sigma_nodes[i]);
        return (1 - tz) * ((1 - ts) * at(j, i) + ts * at(j, i + 1)) +
               tz * ((1 - ts) * at(j + 1, i) + ts * at(j + 1, i + 1));
    }
};

inline ExtensionSolution solve_extension(const ExtensionConfig& cfg) {
    cfg.validate();
    const double alpha = cfg.alpha();
    const int nz = cfg.n_z;
    const int ns = cfg.n_sigma % 2 == 0 ? cfg.n_sigma : cfg.n_sigma + 1;

    ExtensionSolution sol;
    sol.s_exp = cfg.s_exp;
    sol.alpha = alpha;
    sol.z_nodes.resize(nz + 1);
    for (int j = 0; j <= nz; ++j)
        sol.z_nodes[j] = cfg.z_max * std::pow(static_cast<double>(j) / nz, cfg.mesh_gamma);
    sol.sigma_nodes.resize(ns + 1);
    const double hs = 2.0 * cfg.L / ns;
    for (int i = 0; i <= ns; ++i) sol.sigma_nodes[i] = -cfg.L + i * hs;

    const int rows = (nz - 1) * (ns - 1);
    std::vector<Eigen::Triplet<double>> tr;
    tr.reserve(static_cast<std::size_t>(rows) * 5);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
    auto row_of = [&](int j, int i) { return (j - 1) * (ns - 1) + (i - 1); };

    for (int j = 1; j < nz; ++j) {
        const double hb = sol.z_nodes[j] - sol.z_nodes[j - 1];
        const double hf = sol.z_nodes[j + 1] - sol.z_nodes[j];
        const double cz_m = 2.0 / (hb * (hb + hf));
        const double cz_p = 2.0 / (hf * (hb + hf));
        const double cs = std::pow(sol.z_nodes[j], 2.0 * alpha) / (hs * hs);
        for (int i = 1; i < ns; ++i) {
            const int row = row_of(j, i);
            tr.emplace_back(row, row, -(cz_m + cz_p + 2.0 * cs));
            if (j > 1)
                tr.emplace_back(row, row_of(j - 1, i), cz_m);
            else
                rhs(row) -= cz_m * cfg.datum(sol.sigma_nodes[i]); // z = 0 datum
            if (j + 1 < nz) tr.emplace_back(row, row_of(j + 1, i), cz_p); // top is zero
            if (i > 1) tr.emplace_back(row, row_of(j, i - 1), cs);        // sides are zero
            if (i + 1 < ns) tr.emplace_back(row, row_of(j, i + 1), cs);
        }
    }

    Eigen::SparseMatrix<double> A(rows, rows);
    A.setFromTriplets(tr.begin(), tr.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw SolverError("solve_extension: factorization failed");
    const Eigen::VectorXd x = lu.solve(rhs);
    const double res = (A * x - rhs).cwiseAbs().maxCoeff();
    if (!(res <= cfg.tol * std::max(1.0, rhs.cwiseAbs().maxCoeff())))
        throw SolverError("solve_extension: linear residual " + std::to_string(res) +
                          " exceeds tolerance");

    sol.values.assign(static_cast<std::size_t>(nz + 1) * (ns + 1), 0.0);
    for (int i = 0; i <= ns; ++i) sol.at(0, i) = cfg.datum(sol.sigma_nodes[i]);
    for (int j = 1; j < nz; ++j)
        for (int i = 1; i < ns; ++i) sol.at(j, i) = x(row_of(j, i));
    return sol;
}

// ---------------------------------------------------------------------------
// Dirichlet-to-Neumann extraction. The one-sided quotients
//   D_j = (U(z_j, sigma) - u(sigma)) / z_j = b + c z^q + d z^{q+1} + ...
// with q = 2 alpha + 1 = (1 - s)/s are fitted over a window of mesh nodes;
// b is the sought lim d_z U. The fit misfit doubles as a convergence check.
// ---------------------------------------------------------------------------

struct DtnOptions {
    double window_lo = 0.02; // extrapolation window in z (absolute)
    double window_hi = 0.5;
    double misfit_gate = 0.05; // relative RMS misfit triggering an error
};

inline std::vector<double> dtn_fractional_laplacian(const ExtensionSolution& sol,
                                                    const std::vector<double>& sigma_points,
                                                    const std::function<double(double)>& datum,
                                                    const DtnOptions& opt = {}) {
    const double s = sol.s_exp;
    const double q = 2.0 * sol.alpha + 1.0;
    const double scale =
        -std::tgamma(1.0 + s) / std::tgamma(1.0 - s) * std::pow(s, -2.0 * s);
    const double z_lo = opt.window_lo;
    const double z_hi = opt.window_hi;

    std::vector<double> out;
    for (double sigma : sigma_points) {
        const int i = sol.sigma_index(sigma);
        const double u0 = datum(sol.sigma_nodes[i]);

        std::vector<double> zs, ds;
        for (int j = 1; j + 1 < static_cast<int>(sol.z_nodes.size()); ++j) {
            const double z = sol.z_nodes[j];
            if (z < z_lo || z > z_hi) continue;
            zs.push_back(z);
            ds.push_back((sol.at(j, i) - u0) / z);
        }
        if (zs.size() < 4)
            throw SolverError("dtn_fractional_laplacian: extrapolation window holds fewer "
                              "than 4 mesh nodes; refine n_z or widen the window");

        // least squares for D = b + c z^q + d z^{q+1}
        double M[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        double rhs[3] = {0, 0, 0};
        for (std::size_t n = 0; n < zs.size(); ++n) {
            const double phi[3] = {1.0, std::pow(zs[n], q), std::pow(zs[n], q + 1.0)};
            for (int a = 0; a < 3; ++a) {
                rhs[a] += phi[a] * ds[n];
                for (int b = 0; b < 3; ++b) M[a][b] += phi[a] * phi[b];
            }
        }
        // 3x3 Gaussian elimination with partial pivoting
        int piv[3] = {0, 1, 2};
        for (int c = 0; c < 3; ++c) {
            int best = c;
            for (int r = c + 1; r < 3; ++r)
                if (std::abs(M[piv[r]][c]) > std::abs(M[piv[best]][c])) best = r;
            std::swap(piv[c], piv[best]);
            for (int r = c + 1; r < 3; ++r) {
                const double f = M[piv[r]][c] / M[piv[c]][c];
                for (int cc = c; cc < 3; ++cc) M[piv[r]][cc] -= f * M[piv[c]][cc];
                rhs[piv[r]] -= f * rhs[piv[c]];
            }
        }
        double coef[3];
        for (int c = 2; c >= 0; --c) {
            double acc = rhs[piv[c]];
            for (int cc = c + 1; cc < 3; ++cc) acc -= M[piv[c]][cc] * coef[cc];
            coef[c] = acc / M[piv[c]][c];
        }

        double rms = 0.0;
        for (std::size_t n = 0; n < zs.size(); ++n) {
            const double fit =
                coef[0] + coef[1] * std::pow(zs[n], q) + coef[2] * std::pow(zs[n], q + 1.0);
            rms += (fit - ds[n]) * (fit - ds[n]);
        }
        rms = std::sqrt(rms / zs.size());
        if (!(rms <= opt.misfit_gate * (std::abs(coef[0]) + 1e-12)))
            throw SolverError("dtn_fractional_laplacian: expansion fit misfit " +
                              std::to_string(rms) + " too large; the quotient sequence has "
                              "not converged");

        out.push_back(scale * coef[0]);
    }
    return out;
}

} // namespace grushin
