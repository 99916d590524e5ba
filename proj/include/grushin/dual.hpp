#pragma once

#include <cmath>

namespace grushin {

// Forward-mode dual number a + eps*b with eps^2 = 0. Nesting Dual<Dual<double>>
// carries a second-order jet, which is how the catalog's hand-coded partials
// get cross-checked.
template <class T>
struct Dual {
    T v{};
    T d{};

    Dual() = default;
    Dual(T value) : v(value), d{} {}
    Dual(T value, T deriv) : v(value), d(deriv) {}
};

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return {a.v * b.v, a.v * b.d + a.d * b.v};
}
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    T inv = T(1.0) / b.v;
    return {a.v * inv, (a.d - a.v * b.d * inv) * inv};
}

template <class T> Dual<T> operator+(const Dual<T>& a, double c) { return {a.v + T(c), a.d}; }
template <class T> Dual<T> operator+(double c, const Dual<T>& a) { return a + c; }
template <class T> Dual<T> operator-(const Dual<T>& a, double c) { return {a.v - T(c), a.d}; }
template <class T> Dual<T> operator-(double c, const Dual<T>& a) { return {T(c) - a.v, -a.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, double c) { return {a.v * T(c), a.d * T(c)}; }
template <class T> Dual<T> operator*(double c, const Dual<T>& a) { return a * c; }
template <class T> Dual<T> operator/(const Dual<T>& a, double c) { return {a.v / T(c), a.d / T(c)}; }
template <class T> Dual<T> operator/(double c, const Dual<T>& a) { return Dual<T>(T(c)) / a; }

inline double primal(double x) { return x; }
template <class T> double primal(const Dual<T>& x) { return primal(x.v); }

using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;

template <class T> Dual<T> sqrt(const Dual<T>& a) {
    T s = sqrt(a.v);
    return {s, a.d / (2.0 * s)};
}
template <class T> Dual<T> exp(const Dual<T>& a) {
    T e = exp(a.v);
    return {e, a.d * e};
}
template <class T> Dual<T> log(const Dual<T>& a) { return {log(a.v), a.d / a.v}; }
template <class T> Dual<T> sin(const Dual<T>& a) { return {sin(a.v), a.d * cos(a.v)}; }
template <class T> Dual<T> cos(const Dual<T>& a) { return {cos(a.v), -a.d * sin(a.v)}; }
template <class T> Dual<T> pow(const Dual<T>& a, double p) {
    T f = pow(a.v, p);
    return {f, a.d * (p * pow(a.v, p - 1.0))};
}

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

/// Value with exact first and second partials in (r, s).
struct Jet2 {
    double v = 0.0;
    double dr = 0.0;
    double ds = 0.0;
    double drr = 0.0;
    double drs = 0.0;
    double dss = 0.0;
};

inline Jet2 jet_constant(double c) { return {c, 0, 0, 0, 0, 0}; }

inline Jet2 jet_add(const Jet2& a, const Jet2& b) {
    return {a.v + b.v, a.dr + b.dr, a.ds + b.ds, a.drr + b.drr, a.drs + b.drs, a.dss + b.dss};
}

inline Jet2 jet_scale(const Jet2& a, double c) {
    return {c * a.v, c * a.dr, c * a.ds, c * a.drr, c * a.drs, c * a.dss};
}

inline Jet2 jet_mul(const Jet2& a, const Jet2& b) {
    Jet2 p;
    p.v = a.v * b.v;
    p.dr = a.dr * b.v + a.v * b.dr;
    p.ds = a.ds * b.v + a.v * b.ds;
    p.drr = a.drr * b.v + 2.0 * a.dr * b.dr + a.v * b.drr;
    p.dss = a.dss * b.v + 2.0 * a.ds * b.ds + a.v * b.dss;
    p.drs = a.drs * b.v + a.dr * b.ds + a.ds * b.dr + a.v * b.drs;
    return p;
}

/// Chain rule for F(g): f0 = F(g.v), f1 = F'(g.v), f2 = F''(g.v).
inline Jet2 jet_compose(double f0, double f1, double f2, const Jet2& g) {
    Jet2 c;
    c.v = f0;
    c.dr = f1 * g.dr;
    c.ds = f1 * g.ds;
    c.drr = f2 * g.dr * g.dr + f1 * g.drr;
    c.dss = f2 * g.ds * g.ds + f1 * g.dss;
    c.drs = f2 * g.dr * g.ds + f1 * g.drs;
    return c;
}

/// Full second-order jet of a generic scalar expression via nested duals.
/// Three passes: (rr), (ss), (rs).
template <class F>
Jet2 jet_from_ad(F&& f, double r, double s) {
    Jet2 out;
    {
        Dual2 rr{{r, 1.0}, {1.0, 0.0}};
        Dual2 ss{{s, 0.0}, {0.0, 0.0}};
        Dual2 y = f(rr, ss);
        out.v = y.v.v;
        out.dr = y.v.d;
        out.drr = y.d.d;
    }
    {
        Dual2 rr{{r, 0.0}, {0.0, 0.0}};
        Dual2 ss{{s, 1.0}, {1.0, 0.0}};
        Dual2 y = f(rr, ss);
        out.ds = y.v.d;
        out.dss = y.d.d;
    }
    {
        Dual2 rr{{r, 1.0}, {0.0, 0.0}};
        Dual2 ss{{s, 0.0}, {1.0, 0.0}};
        Dual2 y = f(rr, ss);
        out.drs = y.d.d;
    }
    return out;
}

} // namespace grushin
