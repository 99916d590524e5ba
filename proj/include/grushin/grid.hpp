#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "grushin/functionals.hpp"
#include "grushin/params.hpp"

namespace grushin {

// ---------------------------------------------------------------------------
// Tensor grid in gauge-polar coordinates. t-nodes include both boundary
// circles; phi-nodes are cell-centred so the stencils never touch phi = 0 or
// phi = pi/2, where the coordinate map degenerates.
// ---------------------------------------------------------------------------

struct Grid2D {
    double t_min = 1.0, t_max = 2.0;
    int n_t = 8, n_phi = 8;

    static Grid2D make(double t_min, double t_max, int n_t, int n_phi) {
        if (!(t_min > 0.0) || !(t_max > t_min))
            throw ArgumentError("Grid2D: requires 0 < t_min < t_max");
        if (n_t < 4 || n_phi < 4) throw ArgumentError("Grid2D: n_t, n_phi must be >= 4");
        return {t_min, t_max, n_t, n_phi};
    }

    double h_t() const { return (t_max - t_min) / (n_t - 1); }
    double h_phi() const { return M_PI_2 / n_phi; }
    double t_node(int i) const { return t_min + i * h_t(); }
    double phi_node(int j) const { return (j + 0.5) * h_phi(); }
};

struct GridField {
    Grid2D grid;
    std::vector<double> values; // row-major by t: index i * n_phi + j

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.n_phi + j]; }
    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.n_phi + j]; }
};

// --- CSV serialisation: header `t,phi,value`, row-major by t ----------------

inline void write_csv(const GridField& field, std::ostream& os) {
    os << "t,phi,value\n";
    char buf[96];
    for (int i = 0; i < field.grid.n_t; ++i)
        for (int j = 0; j < field.grid.n_phi; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", field.grid.t_node(i),
                          field.grid.phi_node(j), field.at(i, j));
            os << buf;
        }
}

inline void write_csv(const GridField& field, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("write_csv: cannot open " + path);
    write_csv(field, os);
}

inline GridField read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("t,phi,value", 0) != 0)
        throw Error("read_csv: missing `t,phi,value` header");
    std::vector<double> ts, phis, vals;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        double t, phi, v;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &phi, &v) != 3)
            throw Error("read_csv: malformed row: " + line);
        ts.push_back(t);
        phis.push_back(phi);
        vals.push_back(v);
    }
    if (vals.empty()) throw Error("read_csv: no data rows");
    // infer the tensor structure from the first t-block
    int n_phi = 0;
    while (n_phi < static_cast<int>(ts.size()) && ts[n_phi] == ts[0]) ++n_phi;
    if (n_phi < 4 || vals.size() % n_phi != 0)
        throw Error("read_csv: rows do not form a tensor grid");
    const int n_t = static_cast<int>(vals.size()) / n_phi;
    GridField f;
    f.grid = Grid2D::make(ts.front(), ts.back(), n_t, n_phi);
    for (int i = 0; i < n_t; ++i) {
        if (std::abs(ts[static_cast<std::size_t>(i) * n_phi] - f.grid.t_node(i)) >
            1e-9 * (1.0 + f.grid.t_max))
            throw Error("read_csv: t-nodes are not uniform");
    }
    f.values = std::move(vals);
    return f;
}

inline GridField read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("read_csv: cannot open " + path);
    return read_csv(is);
}

// ---------------------------------------------------------------------------
// Sampling a grid field at arbitrary (t, phi): tensor-product cubic Lagrange
// interpolation. phi-stencils crossing the edges use even reflection, which
// matches the symmetry class of the admitted fields.
// ---------------------------------------------------------------------------

class GridSampler {
public:
    explicit GridSampler(std::shared_ptr<const GridField> field) : f_(std::move(field)) {}

    SphereSample eval(double t, double phi) const {
        const Grid2D& g = f_->grid;
        const double ht = g.h_t(), hp = g.h_phi();

        int i0 = static_cast<int>(std::floor((t - g.t_min) / ht)) - 1;
        i0 = std::max(0, std::min(i0, g.n_t - 4));
        int j0 = static_cast<int>(std::floor(phi / hp - 0.5)) - 1;

        std::array<double, 4> xt, lt, dlt, xp, lp, dlp;
        for (int a = 0; a < 4; ++a) xt[a] = g.t_node(i0 + a);
        for (int b = 0; b < 4; ++b) xp[b] = (j0 + b + 0.5) * hp; // ghost phis allowed
        lagrange4(xt, t, lt, dlt);
        lagrange4(xp, phi, lp, dlp);

        SphereSample out;
        for (int b = 0; b < 4; ++b) {
            const int j = reflect(j0 + b, g.n_phi);
            double col = 0.0, colt = 0.0;
            for (int a = 0; a < 4; ++a) {
                const double v = f_->at(i0 + a, j);
                col += lt[a] * v;
                colt += dlt[a] * v;
            }
            out.f += lp[b] * col;
            out.ft += lp[b] * colt;
            out.fphi += dlp[b] * col;
        }
        return out;
    }

private:
    static int reflect(int j, int n) {
        while (j < 0 || j >= n) j = (j < 0) ? -1 - j : 2 * n - 1 - j;
        return j;
    }

    static void lagrange4(const std::array<double, 4>& x, double xi, std::array<double, 4>& l,
                          std::array<double, 4>& dl) {
        for (int i = 0; i < 4; ++i) {
            double num = 1.0, den = 1.0, dnum = 0.0;
            for (int j = 0; j < 4; ++j) {
                if (j == i) continue;
                den *= x[i] - x[j];
            }
            for (int j = 0; j < 4; ++j) {
                if (j == i) continue;
                num *= xi - x[j];
                double term = 1.0;
                for (int k = 0; k < 4; ++k) {
                    if (k == i || k == j) continue;
                    term *= xi - x[k];
                }
                dnum += term;
            }
            l[i] = num / den;
            dl[i] = dnum / den;
        }
    }

    std::shared_ptr<const GridField> f_;
};

inline SphereEvaluator make_evaluator(const GridField& field) {
    auto sampler = std::make_shared<GridSampler>(std::make_shared<GridField>(field));
    return [sampler](const SphereFrame& fr) { return sampler->eval(fr.t, fr.phi); };
}

inline SphereEvaluator make_evaluator(std::shared_ptr<const GridField> field) {
    auto sampler = std::make_shared<GridSampler>(std::move(field));
    return [sampler](const SphereFrame& fr) { return sampler->eval(fr.t, fr.phi); };
}

} // namespace grushin
