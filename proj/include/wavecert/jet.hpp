#pragma once

#include <cmath>

namespace wavecert {

/// First-order jet in (t, r): value and both partial derivatives.
struct Dual {
    double v = 0.0, dt = 0.0, dr = 0.0;

    /// a d/dt + b d/dr applied to the underlying function.
    double along(double a, double b) const { return a * dt + b * dr; }
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.dt + b.dt, a.dr + b.dr}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.dt - b.dt, a.dr - b.dr}; }
inline Dual operator-(Dual a) { return {-a.v, -a.dt, -a.dr}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.dt * b.v + a.v * b.dt, a.dr * b.v + a.v * b.dr}; }
inline Dual operator*(double c, Dual a) { return {c * a.v, c * a.dt, c * a.dr}; }
inline Dual operator*(Dual a, double c) { return c * a; }
inline Dual operator/(Dual a, Dual b) {
    const double q = a.v / b.v;
    return {q, (a.dt - q * b.dt) / b.v, (a.dr - q * b.dr) / b.v};
}

/// Second-order jet in (t, r). Arithmetic propagates exact derivatives by the
/// product and chain rules, so no finite differences are involved.
struct Jet2 {
    double v = 0.0, t = 0.0, r = 0.0, tt = 0.0, tr = 0.0, rr = 0.0;

    static Jet2 constant(double c) { return {c, 0, 0, 0, 0, 0}; }
    static Jet2 time(double t) { return {t, 1, 0, 0, 0, 0}; }
    static Jet2 radius(double r) { return {r, 0, 1, 0, 0, 0}; }

    /// Value and first derivatives only.
    Dual first() const { return {v, t, r}; }
    /// (a d/dt + b d/dr) of the function, as a first-order jet.
    Dual along(double a, double b) const { return {a * t + b * r, a * tt + b * tr, a * tr + b * rr}; }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    return {a.v + b.v, a.t + b.t, a.r + b.r, a.tt + b.tt, a.tr + b.tr, a.rr + b.rr};
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    return {a.v - b.v, a.t - b.t, a.r - b.r, a.tt - b.tt, a.tr - b.tr, a.rr - b.rr};
}
inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.t, -a.r, -a.tt, -a.tr, -a.rr}; }
inline Jet2 operator*(double c, const Jet2& a) { return {c * a.v, c * a.t, c * a.r, c * a.tt, c * a.tr, c * a.rr}; }
inline Jet2 operator*(const Jet2& a, double c) { return c * a; }
inline Jet2 operator+(const Jet2& a, double c) { return {a.v + c, a.t, a.r, a.tt, a.tr, a.rr}; }
inline Jet2 operator+(double c, const Jet2& a) { return a + c; }
inline Jet2 operator-(const Jet2& a, double c) { return a + (-c); }
inline Jet2 operator-(double c, const Jet2& a) { return (-a) + c; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.v * b.v,
            a.t * b.v + a.v * b.t,
            a.r * b.v + a.v * b.r,
            a.tt * b.v + 2.0 * a.t * b.t + a.v * b.tt,
            a.tr * b.v + a.t * b.r + a.r * b.t + a.v * b.tr,
            a.rr * b.v + 2.0 * a.r * b.r + a.v * b.rr};
}

/// f(a) for a scalar function with derivatives f0, f1, f2 at a.v.
inline Jet2 compose(const Jet2& a, double f0, double f1, double f2) {
    return {f0,
            f1 * a.t,
            f1 * a.r,
            f2 * a.t * a.t + f1 * a.tt,
            f2 * a.t * a.r + f1 * a.tr,
            f2 * a.r * a.r + f1 * a.rr};
}

inline Jet2 reciprocal(const Jet2& a) {
    const double x = a.v;
    return compose(a, 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x));
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

inline Jet2 pow(const Jet2& a, double s) {
    const double x = a.v;
    if (x == 0.0) return Jet2::constant(0.0);
    const double p = std::pow(x, s);
    return compose(a, p, s * p / x, s * (s - 1.0) * p / (x * x));
}

inline Jet2 powi(const Jet2& a, int k) {
    Jet2 out = Jet2::constant(1.0);
    for (int i = 0; i < k; ++i) out = out * a;
    return out;
}

inline Jet2 exp(const Jet2& a) {
    const double e = std::exp(a.v);
    return compose(a, e, e, e);
}
inline Jet2 sin(const Jet2& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return compose(a, s, c, -s);
}
inline Jet2 cos(const Jet2& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return compose(a, c, -s, -c);
}

} // namespace wavecert
