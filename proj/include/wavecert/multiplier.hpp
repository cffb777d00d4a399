#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "wavecert/error.hpp"
#include "wavecert/jet.hpp"
#include "wavecert/sphere.hpp"
#include "wavecert/weights.hpp"

namespace wavecert {

/// X phi = (t+2+r)^s (phi_t + phi_r + phi/r) + (t+2-r)^s (phi_t - phi_r - phi/r).
inline double apply_multiplier(double phi_t, double phi_r, double phi, double t, double r, double s) {
    if (!(r > 0.0)) throw DomainError("apply_multiplier: r must be positive (1/r term)");
    const double a = weight_eval(t, r, s, Sign::Plus);
    const double b = weight_eval(t, r, s, Sign::Minus);
    return a * (phi_t + phi_r + phi / r) + b * (phi_t - phi_r - phi / r);
}

/// Analytic test function phi = g(t, r) Y_lm(omega), or phi = g(t, r) when l = 0.
/// g is given on second-order jets so all derivatives up to order two are exact.
struct TestFunction {
    std::string id;
    int l = 0;
    int m = 0;
    std::function<Jet2(const Jet2&, const Jet2&)> profile;

    bool radial() const { return l == 0; }
    Jet2 g(double t, double r) const {
        require(static_cast<bool>(profile), "TestFunction '" + id + "' has no profile");
        return profile(Jet2::time(t), Jet2::radius(r));
    }
};

namespace detail {

/// (1 - x^2)^k for x = r / (t + 1) < 1, zero outside the cone.
inline Jet2 cone_window(const Jet2& t, const Jet2& r, int k) {
    if (r.v >= t.v + 1.0) return Jet2::constant(0.0);
    const Jet2 x = r / (t + 1.0);
    return powi(1.0 - x * x, k);
}

} // namespace detail

/// Radial catalogue: smooth on r > 0 and supported in r <= t + 1.
inline std::vector<TestFunction> radial_test_functions() {
    using detail::cone_window;
    std::vector<TestFunction> out;
    out.push_back({"cone-window", 0, 0, [](const Jet2& t, const Jet2& r) {
                       return exp(-0.25 * t) * cone_window(t, r, 5);
                   }});
    out.push_back({"outgoing-shell", 0, 0, [](const Jet2& t, const Jet2& r) {
                       const Jet2 x = (r - t + 0.5) * 2.0;
                       if (std::abs(x.v) >= 1.0) return Jet2::constant(0.0);
                       return reciprocal(t + 1.0) * powi(1.0 - x * x, 4);
                   }});
    out.push_back({"wave-packet", 0, 0, [](const Jet2& t, const Jet2& r) {
                       return sin(3.0 * t - 2.0 * r) * cone_window(t, r, 4);
                   }});
    out.push_back({"incoming", 0, 0, [](const Jet2& t, const Jet2& r) {
                       return cos(t + r) * exp(-0.1 * t) * cone_window(t, r, 6);
                   }});
    out.push_back({"polynomial", 0, 0, [](const Jet2& t, const Jet2& r) {
                       return (1.0 + t * r - r * r) * cone_window(t, r, 3);
                   }});
    return out;
}

/// Single-mode entry g(t, r) Y_lm with g = r^l window(r / (t+1)) e^{-t/3} (1 + 0.3 sin(t - r)).
inline TestFunction mode_test_function(int l, int m) {
    require(l >= 0 && std::abs(m) <= l, "mode_test_function: need |m| <= l");
    TestFunction f;
    f.id = "mode-l" + std::to_string(l) + "m" + std::to_string(m);
    f.l = l;
    f.m = m;
    f.profile = [l](const Jet2& t, const Jet2& r) {
        return powi(r, l) * detail::cone_window(t, r, 4) * exp((-1.0 / 3.0) * t) * (1.0 + 0.3 * sin(t - r));
    };
    return f;
}

enum class IdentityPart { First, Second, Third, Combined };

inline IdentityPart identity_part_from_string(const std::string& s) {
    if (s == "first") return IdentityPart::First;
    if (s == "second") return IdentityPart::Second;
    if (s == "third") return IdentityPart::Third;
    if (s == "combined") return IdentityPart::Combined;
    throw PreconditionError("unknown identity part '" + s + "'");
}

/// Angular data of a single harmonic at one direction: Y, |grad_S2 Y|^2 and l.
struct AngularSample {
    double y = 1.0;
    double grad_sq = 0.0;
    int l = 0;

    /// div_S2 (Y grad_S2 Y) = |grad Y|^2 + Y Lap_S2 Y.
    double div_y_grad_y() const { return grad_sq - l * (l + 1.0) * y * y; }
};

/// Evaluated terms of one identity: the divergence-form side split into its
/// (t, r) part and the pure S^2 divergence, the source side X phi box phi r^2, and a magnitude scale.
struct IdentityTerms {
    double lhs = 0.0;
    double sphere_divergence = 0.0;
    double rhs = 0.0;
    double scale = 0.0;
};

namespace detail {

struct Accumulator {
    double sum = 0.0;
    double mag = 0.0;
    void add(double v) {
        sum += v;
        mag += std::abs(v);
    }
};

/// `mutate` shifts s in the first weighted bracket only; zero means the identity as stated.
inline std::vector<IdentityTerms> identity_terms(const Jet2& g, const AngularSample& ang, double t, double r,
                                                 double s, IdentityPart part, double mutate) {
    const Jet2 T = Jet2::time(t), R = Jet2::radius(r);
    const Dual rD{r, 0.0, 1.0};
    const Dual A = pow(T + 2.0 + R, s).first();
    const Dual B = pow(T + 2.0 - R, s).first();
    const Dual Am = pow(T + 2.0 + R, s + mutate).first();
    const Dual Bm = pow(T + 2.0 - R, s + mutate).first();
    const double a1 = std::pow(t + 2.0 + r, s - 1.0);
    const double b1 = std::pow(t + 2.0 - r, s - 1.0);
    const double ll = ang.l * (ang.l + 1.0);

    const Jet2 phi = ang.y * g;
    const Dual P = phi.along(1.0, 1.0);   // phi_t + phi_r
    const Dual Q = phi.along(1.0, -1.0);  // phi_t - phi_r
    const Dual gd = g.first();
    const Dual G = ang.grad_sq * (gd * gd); // (grad_S2 phi)^2
    const double dq = ang.div_y_grad_y();
    const double phit = phi.t, phir = phi.r;
    const double box = ang.y * (g.tt - g.rr - 2.0 * g.r / r + ll * g.v / (r * r));

    auto finish = [](Accumulator acc, double div, double rhs) {
        IdentityTerms out;
        out.lhs = acc.sum;
        out.sphere_divergence = div;
        out.rhs = rhs;
        out.scale = acc.mag + std::abs(div) + std::abs(rhs);
        return out;
    };

    switch (part) {
        case IdentityPart::First: {
            Accumulator acc;
            acc.add((0.5 * Am * rD * rD * P * P).along(1.0, -1.0));
            acc.add(r * A.v * (phit * phit - phir * phir));
            acc.add((0.5 * A * G).along(1.0, 1.0));
            acc.add(-s * a1 * G.v);
            const double div = -A.v * (g.t + g.r) * g.v * dq;
            return {finish(acc, div, A.v * P.v * r * r * box)};
        }
        case IdentityPart::Second: {
            Accumulator acc;
            acc.add((0.5 * Bm * rD * rD * Q * Q).along(1.0, 1.0));
            acc.add(-r * B.v * (phit * phit - phir * phir));
            acc.add((0.5 * B * G).along(1.0, -1.0));
            acc.add(-s * b1 * G.v);
            const double div = -B.v * (g.t - g.r) * g.v * dq;
            return {finish(acc, div, B.v * Q.v * r * r * box)};
        }
        case IdentityPart::Third: {
            const Jet2 H = 0.5 * (R * phi * phi); // r phi^2 / 2
            const Dual Hp = H.along(1.0, 1.0);
            const Dual Hm = H.along(1.0, -1.0);
            const double w = A.v - B.v;
            Accumulator acc;
            acc.add((Am * Hp).along(1.0, -1.0));
            acc.add(-(B * Hm).along(1.0, 1.0));
            acc.add(-w * r * (phit * phit - phir * phir));
            acc.add(w / r * G.v);
            const double div = -(w / r) * g.v * g.v * dq;
            return {finish(acc, div, w * phi.v * r * box)};
        }
        case IdentityPart::Combined: {
            const double xphi = A.v * (P.v + phi.v / r) + B.v * (Q.v - phi.v / r);
            const double rhs = xphi * r * r * box;
            const Dual ph = phi.first();

            // First displayed form: expanded brackets.
            Accumulator f1;
            f1.add((0.5 * Am * rD * rD * P * P + 0.5 * A * ph * ph + A * rD * ph * P + 0.5 * B * G).along(1.0, -1.0));
            f1.add((0.5 * B * rD * rD * Q * Q + 0.5 * B * ph * ph - B * rD * ph * Q + 0.5 * A * G).along(1.0, 1.0));
            f1.add((A.v - B.v - s * r * a1 - s * r * b1) / r * G.v);

            // Second displayed form: completed squares and the Taylor factor.
            const Dual pp = P + ph / rD;
            const Dual qq = Q - ph / rD;
            const double taylor = (t + 2.0 - (s - 1.0) * r) * a1 - b1 * (t + 2.0 + (s - 1.0) * r);
            Accumulator f2;
            f2.add((0.5 * Am * rD * rD * pp * pp + 0.5 * B * G).along(1.0, -1.0));
            f2.add((0.5 * B * rD * rD * qq * qq + 0.5 * A * G).along(1.0, 1.0));
            f2.add(taylor / r * G.v);

            const double div = -(A.v * (g.t + g.r + g.v / r) + B.v * (g.t - g.r - g.v / r)) * g.v * dq;
            return {finish(f1, div, rhs), finish(f2, div, rhs)};
        }
    }
    return {};
}

inline double relative_residual(const IdentityTerms& it, bool include_divergence) {
    const double lhs = it.lhs + (include_divergence ? it.sphere_divergence : 0.0);
    const double scale = std::max(it.scale, 1e-300);
    return std::abs(lhs - it.rhs) / scale;
}

} // namespace detail

/// Relative residual of the divergence-form identity at one point, including the
/// pure S^2 divergence term; for l >= 1 the direction omega selects the node values of Y_lm.
/// For part = Combined both displayed forms are checked and the larger residual returned.
inline double identity_residual(const TestFunction& tf, double t, double r, Vec3 omega, double s, IdentityPart part,
                                double mutate = 0.0) {
    require(r > 0.0, "identity_residual: r must be positive");
    require(t >= 0.0, "identity_residual: t must be non-negative");
    require(r <= t + 2.0, "identity_residual: r must satisfy r <= t + 2 so that t + 2 - r >= 0");
    AngularSample ang;
    if (!tf.radial()) {
        const int n = mode_count(tf.l);
        std::vector<double> y(n), dth(n), dph(n);
        const double th = std::acos(std::clamp(omega.z, -1.0, 1.0));
        const double ph = std::atan2(omega.y, omega.x);
        real_harmonics(tf.l, th, ph, y, dth, dph);
        const int idx = mode_index(tf.l, tf.m);
        ang = {y[idx], dth[idx] * dth[idx] + dph[idx] * dph[idx], tf.l};
    }
    const Jet2 g = tf.g(t, r);
    double worst = 0.0;
    for (const auto& it : detail::identity_terms(g, ang, t, r, s, part, mutate))
        worst = std::max(worst, detail::relative_residual(it, true));
    return worst;
}

/// Radial overload.
inline double identity_residual(const TestFunction& tf, double t, double r, double s, IdentityPart part,
                                double mutate = 0.0) {
    return identity_residual(tf, t, r, Vec3{0.0, 0.0, 1.0}, s, part, mutate);
}

/// Identity integrated over S^2 by Gauss–Legendre x uniform quadrature. The pure
/// S^2 divergence terms are dropped (they integrate to zero), so every remaining
/// term, including the (grad_S2 phi)^2 ones, is exercised through the quadrature.
inline double identity_residual_sphere(const TestFunction& tf, double t, double r, double s, IdentityPart part,
                                       double mutate = 0.0) {
    require(r > 0.0 && t >= 0.0 && r <= t + 2.0, "identity_residual_sphere: point outside the admissible region");
    const SphereQuadrature quad(tf.l + 2);
    const int n = mode_count(tf.l);
    const int idx = mode_index(tf.l, tf.m);
    std::vector<double> y(n), dth(n), dph(n);
    const Jet2 g = tf.g(t, r);
    std::vector<double> lhs, rhs, mag;
    for (std::size_t i = 0; i < quad.size(); ++i) {
        real_harmonics(tf.l, quad.theta(i), quad.phi(i), y, dth, dph);
        const AngularSample ang{y[idx], dth[idx] * dth[idx] + dph[idx] * dph[idx], tf.l};
        const auto terms = detail::identity_terms(g, ang, t, r, s, part, mutate);
        lhs.resize(terms.size(), 0.0);
        rhs.resize(terms.size(), 0.0);
        mag.resize(terms.size(), 0.0);
        for (std::size_t k = 0; k < terms.size(); ++k) {
            lhs[k] += quad.weight(i) * terms[k].lhs;
            rhs[k] += quad.weight(i) * terms[k].rhs;
            mag[k] += quad.weight(i) * terms[k].scale;
        }
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < lhs.size(); ++k)
        worst = std::max(worst, std::abs(lhs[k] - rhs[k]) / std::max(mag[k], 1e-300));
    return worst;
}

/// (t+2-(s-1)r)(t+2+r)^{s-1} - (t+2-r)^{s-1}(t+2+(s-1)r), evaluated as
/// (t+2-r)^{s-1}(t+2+(s-1)r) * expm1(D) with D the log ratio of the two products,
/// which keeps the cancellation error proportional to the gap itself.
inline double taylor_gap(double t, double r, double s) {
    require(s >= 1.0 && s <= 2.0, "taylor_gap: s must lie in [1, 2]");
    require(t >= 0.0 && r >= 0.0, "taylor_gap: t and r must be non-negative");
    require(r <= t + 1.0, "taylor_gap: the inequality is only claimed for r <= t + 1");
    const double a = s - 1.0;
    const double x = r / (t + 2.0);
    const double d = std::log1p(-a * x) + a * std::log1p(x) - a * std::log1p(-x) - std::log1p(a * x);
    const double right = std::pow(t + 2.0, s) * std::pow(1.0 - x, a) * (1.0 + a * x);
    return right * std::expm1(d);
}

/// The same gap by direct subtraction of the two products.
inline double taylor_gap_direct(double t, double r, double s) {
    return (t + 2.0 - (s - 1.0) * r) * std::pow(t + 2.0 + r, s - 1.0) -
           std::pow(t + 2.0 - r, s - 1.0) * (t + 2.0 + (s - 1.0) * r);
}

/// The three forms of the quadratic energy density and its lower bound:
///   A (phi_t + phi_r + phi/r)^2 + B (phi_t - phi_r - phi/r)^2
/// = (A + B)[phi_t^2 + (phi_r + phi/r)^2] + 2(A - B) phi_t (phi_r + phi/r)
/// = 2B [phi_t^2 + (phi_r + phi/r)^2] + (A - B)(phi_t + phi_r + phi/r)^2
/// >= 2B [phi_t^2 + (phi_r + phi/r)^2].
struct Rearrangement {
    double squares = 0.0;
    double expanded = 0.0;
    double split = 0.0;
    double lower_bound = 0.0;

    double form_mismatch() const {
        const double scale = std::max({std::abs(squares), std::abs(expanded), std::abs(split), 1e-300});
        return std::max(std::abs(squares - expanded), std::abs(squares - split)) / scale;
    }
    bool bound_holds(double tol = 1e-12) const { return lower_bound <= squares * (1.0 + tol) + tol; }
};

inline Rearrangement rearrangement(double phi_t, double phi_r, double phi, double t, double r, double s) {
    require(r > 0.0, "rearrangement: r must be positive");
    const double a = weight_eval(t, r, s, Sign::Plus);
    const double b = weight_eval(t, r, s, Sign::Minus);
    const double w = phi_r + phi / r;
    Rearrangement out;
    out.squares = a * (phi_t + w) * (phi_t + w) + b * (phi_t - w) * (phi_t - w);
    out.expanded = (a + b) * (phi_t * phi_t + w * w) + 2.0 * (a - b) * phi_t * w;
    out.split = 2.0 * b * (phi_t * phi_t + w * w) + (a - b) * (phi_t + w) * (phi_t + w);
    out.lower_bound = 2.0 * b * (phi_t * phi_t + w * w);
    return out;
}

} // namespace wavecert
