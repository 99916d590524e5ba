#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace grushin {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside its admissible range (lambda <= 0, t <= 0, ...).
struct ArgumentError : Error {
    using Error::Error;
};

// Evaluation at a point where the quantity is undefined (origin, axis).
struct DomainError : Error {
    using Error::Error;
};

// A stated precondition fails (Q < 3 gate, vanishing surface mass, ...).
struct PreconditionError : Error {
    using Error::Error;
};

struct SolverError : Error {
    using Error::Error;
};

// Near-singular Helmholtz system; carries advice to perturb the outer radius.
struct ResonanceError : SolverError {
    using SolverError::SolverError;
};

struct ConfigError : Error {
    using Error::Error;
};

/// Parameter triple (m, k, alpha) of the operator
///   B_alpha = Delta_z + (|z|^{2 alpha} / 4) Delta_sigma,
/// z in R^m, sigma in R^k, together with the homogeneous dimension
/// Q = m + (alpha + 1) k of the anisotropic dilations.
struct GrushinParams {
    int m = 2;
    int k = 1;
    double alpha = 1.0;
    double q = 4.0;

    static GrushinParams make(int m, int k, double alpha) {
        if (m < 1) throw ArgumentError("GrushinParams: m must be >= 1, got " + std::to_string(m));
        if (k < 1) throw ArgumentError("GrushinParams: k must be >= 1, got " + std::to_string(k));
        if (!(alpha >= 0.0))
            throw ArgumentError("GrushinParams: alpha must be >= 0, got " + std::to_string(alpha));
        GrushinParams p;
        p.m = m;
        p.k = k;
        p.alpha = alpha;
        p.q = static_cast<double>(m) + (alpha + 1.0) * static_cast<double>(k);
        return p;
    }

    double a1() const { return alpha + 1.0; }          // alpha + 1
    double beta() const { return 1.0 / (alpha + 1.0); } // exponent of cos(phi) in the polar map

    void require_q_at_least(double q_min) const {
        if (q < q_min)
            throw PreconditionError("operation requires homogeneous dimension Q >= " +
                                    std::to_string(q_min) + ", but Q = " + std::to_string(q) +
                                    " for (m=" + std::to_string(m) + ", k=" + std::to_string(k) +
                                    ", alpha=" + std::to_string(alpha) + ")");
    }
};

/// Point in the cylindrically symmetric reduction: r = |z|, s = |sigma|.
struct CylPoint {
    double r = 0.0;
    double s = 0.0;

    bool is_origin() const { return r == 0.0 && s == 0.0; }
};

inline void require_valid(const CylPoint& p) {
    if (!(p.r >= 0.0) || !(p.s >= 0.0))
        throw ArgumentError("CylPoint: requires r >= 0 and s >= 0");
}

/// Gauge-polar coordinates: t is the gauge radius, phi in [0, pi/2]
/// with phi = 0 on the s = 0 slice and phi = pi/2 on the r = 0 axis.
struct GaugeCoords {
    double t = 1.0;
    double phi = 0.0;
};

/// Ring {t_inner < rho < t_outer} about the origin.
struct GaugeAnnulus {
    double t_inner;
    double t_outer;

    GaugeAnnulus(double inner, double outer) : t_inner(inner), t_outer(outer) {
        if (!(inner > 0.0) || !(outer > inner))
            throw ArgumentError("GaugeAnnulus: requires 0 < t_inner < t_outer");
    }
};

/// Surface measure of the unit (d-1)-sphere in R^d; omega_0 = 2 (two points).
inline double unit_sphere_area(int d) {
    if (d < 1) throw ArgumentError("unit_sphere_area: d must be >= 1");
    return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

} // namespace grushin
