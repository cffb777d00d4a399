#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "wavecert/error.hpp"
#include "wavecert/quadrature.hpp"
#include "wavecert/solver.hpp"
#include "wavecert/source.hpp"
#include "wavecert/sphere.hpp"

namespace wavecert {

struct KirchhoffOptions {
    int rho_panels = 24;    ///< composite panels in the retarded-distance variable
    int rho_order = 8;      ///< Gauss–Legendre points per panel
    int cos_nodes = 24;     ///< Gauss–Legendre points in cos(angle to x) over the support cap
    int psi_nodes = 32;     ///< uniform points in the azimuth around x
    double warn_tolerance = 1e-6; ///< relative Richardson estimate above which a warning is set
};

struct KirchhoffResult {
    double value = 0.0;
    double error_estimate = 0.0; ///< |I(h) - I(h/2)| from step halving
    bool warning = false;
    std::string message;
};

namespace detail {

/// Interval of retarded distances rho = t - tau on which the backward cone from
/// (t, x) can meet the source support. Empty when lo > hi.
inline std::pair<double, double> kirchhoff_rho_window(const SourceSpec& src, double t, double rx) {
    double lo = 0.0, hi = t;
    if (src.time_support) lo = std::max(lo, t - *src.time_support);
    if (std::isfinite(src.spatial_radius)) {
        lo = std::max(lo, rx - src.spatial_radius);
        hi = std::min(hi, rx + src.spatial_radius);
    }
    if (src.mask) {
        if (rx > t + 1.0) return {1.0, 0.0};
        hi = std::min(hi, 0.5 * (t + 1.0 + rx));
    }
    return {lo, hi};
}

/// Upper limit of cos(angle between omega and x) for |x + rho omega| <= R.
inline double cap_limit(double rx, double rho, double R) {
    if (rx == 0.0 || rho == 0.0) return (std::max(rx, rho) <= R) ? 1.0 : -2.0;
    return std::clamp((R * R - rx * rx - rho * rho) / (2.0 * rho * rx), -2.0, 1.0);
}

inline double kirchhoff_once(const SourceSpec& src, double t, Vec3 x, const KirchhoffOptions& o, int rho_panels) {
    const double rx = x.norm();
    const auto [lo, hi] = kirchhoff_rho_window(src, t, rx);
    if (!(hi > lo)) return 0.0;
    // Orthonormal frame (e1, e2, n) with n = x / |x| (or the z-axis at the origin).
    const Vec3 n = (rx > 0.0) ? (1.0 / rx) * x : Vec3{0.0, 0.0, 1.0};
    const Vec3 a = (std::abs(n.x) < 0.9) ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    const Vec3 e1raw = a + (-a.dot(n)) * n;
    const Vec3 e1 = (1.0 / e1raw.norm()) * e1raw;
    const Vec3 e2{n.y * e1.z - n.z * e1.y, n.z * e1.x - n.x * e1.z, n.x * e1.y - n.y * e1.x};
    const QuadratureRule gl = gauss_legendre(o.cos_nodes);
    const double dpsi = 2.0 * std::numbers::pi / o.psi_nodes;
    std::vector<double> cpsi(o.psi_nodes), spsi(o.psi_nodes);
    for (int k = 0; k < o.psi_nodes; ++k) {
        cpsi[k] = std::cos((k + 0.5) * dpsi);
        spsi[k] = std::sin((k + 0.5) * dpsi);
    }
    auto shell = [&](double rho) {
        const double tau = t - rho;
        const double R = src.support_radius(tau);
        const double cmax = cap_limit(rx, rho, R);
        if (cmax <= -1.0) return 0.0;
        const double half = 0.5 * (cmax + 1.0);
        double sum = 0.0;
        for (int i = 0; i < o.cos_nodes; ++i) {
            const double c = -1.0 + half * (gl.nodes[i] + 1.0);
            const double sn = std::sqrt(std::max(0.0, 1.0 - c * c));
            double ring = 0.0;
            for (int k = 0; k < o.psi_nodes; ++k) {
                const Vec3 w = c * n + (sn * cpsi[k]) * e1 + (sn * spsi[k]) * e2;
                const Vec3 y = x + rho * w;
                const double ry = y.norm();
                const Vec3 wy = (ry > 0.0) ? (1.0 / ry) * y : Vec3{0.0, 0.0, 1.0};
                ring += src(tau, ry, wy);
            }
            sum += gl.weights[i] * half * ring * dpsi;
        }
        return rho * sum;
    };
    return integrate_gl(shell, lo, hi, rho_panels, o.rho_order) / (4.0 * std::numbers::pi);
}

} // namespace detail

/// Retarded potential phi(t, x) = (1/4pi) int_0^t rho oint_{S^2} F(t - rho, x + rho omega) d omega d rho.
/// Integration is restricted to the part of the backward cone that meets the source
/// support; an empty intersection returns exactly 0. The error estimate compares
/// the result with a run at half the retarded-distance step.
inline KirchhoffResult kirchhoff_eval(const SourceSpec& src, double t, Vec3 x, const KirchhoffOptions& opt = {}) {
    require(t >= 0.0, "kirchhoff_eval: t must be non-negative");
    require(opt.rho_panels >= 1 && opt.cos_nodes >= 1 && opt.psi_nodes >= 1, "kirchhoff_eval: bad resolution");
    KirchhoffResult res;
    if (src.is_zero()) return res;
    const double coarse = detail::kirchhoff_once(src, t, x, opt, opt.rho_panels);
    const double fine = detail::kirchhoff_once(src, t, x, opt, 2 * opt.rho_panels);
    res.value = fine;
    res.error_estimate = std::abs(fine - coarse);
    if (res.error_estimate > opt.warn_tolerance * std::max(std::abs(fine), 1e-300) && res.error_estimate > 1e-14) {
        res.warning = true;
        res.message = "kirchhoff_eval: Richardson estimate " + std::to_string(res.error_estimate) +
                      " exceeds tolerance; increase rho_panels";
    }
    return res;
}

/// Space-time probe (t, x).
struct Probe {
    double t = 0.0;
    Vec3 x;
};

/// Deterministic probe set: n points with t in [t0, t1], |x| <= t + 1, spread over directions.
inline std::vector<Probe> probe_set(int n, double t0, double t1, double rmax_fraction = 0.9) {
    std::vector<Probe> out;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double a = (n == 1) ? 1.0 : static_cast<double>(i) / (n - 1);
        const double t = t0 + (t1 - t0) * a;
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double st = std::sqrt(1.0 - z * z);
        const double ph = golden * i;
        const double r = rmax_fraction * (t + 1.0) * (0.15 + 0.85 * std::fmod(0.618033988749895 * (i + 1), 1.0));
        out.push_back({t, Vec3{r * st * std::cos(ph), r * st * std::sin(ph), r * z}});
    }
    return out;
}

struct OracleComparison {
    std::vector<double> solver;
    std::vector<double> oracle;
    std::vector<double> oracle_error;
    double relative_l2 = 0.0;
    bool oracle_warning = false;
};

/// Compares a solver run with the Kirchhoff oracle at the probes (relative discrete L^2 over probes).
inline OracleComparison compare_with_kirchhoff(const LinearSolution& sol, const SourceSpec& src,
                                               const std::vector<Probe>& probes, const KirchhoffOptions& opt = {}) {
    OracleComparison c;
    double num = 0.0, den = 0.0;
    for (const auto& p : probes) {
        const double r = p.x.norm();
        const Vec3 w = (r > 0.0) ? (1.0 / r) * p.x : Vec3{0.0, 0.0, 1.0};
        const double a = sol.value(p.t, r, w);
        const auto k = kirchhoff_eval(src, p.t, p.x, opt);
        c.solver.push_back(a);
        c.oracle.push_back(k.value);
        c.oracle_error.push_back(k.error_estimate);
        c.oracle_warning = c.oracle_warning || k.warning;
        num += (a - k.value) * (a - k.value);
        den += k.value * k.value;
    }
    c.relative_l2 = (den > 0.0) ? std::sqrt(num / den) : std::sqrt(num);
    return c;
}

/// Max |phi| over probes strictly inside the region the wave has fully passed,
/// t - |x| > tau0 + R. Requires a time-compact source with finite spatial radius.
inline double huygens_residual(const LinearSolution& sol, const SourceSpec& src, const std::vector<Probe>& probes) {
    require(src.time_support.has_value(), "huygens_residual: source has no time support [0, tau0]");
    require(std::isfinite(src.spatial_radius), "huygens_residual: source has no finite spatial radius");
    const double edge = *src.time_support + src.spatial_radius;
    double worst = 0.0;
    int used = 0;
    for (const auto& p : probes) {
        const double r = p.x.norm();
        if (!(p.t - r > edge)) continue;
        ++used;
        const Vec3 w = (r > 0.0) ? (1.0 / r) * p.x : Vec3{0.0, 0.0, 1.0};
        worst = std::max(worst, std::abs(sol.value(p.t, r, w)));
    }
    if (used == 0)
        throw PreconditionError("huygens_residual: no probe satisfies t - |x| > tau0 + R = " + std::to_string(edge) +
                                "; the trailing region is empty");
    return worst;
}

/// Probes on a (t, r) lattice inside the trailing region t - r > tau0 + R + gap, t <= t_max.
inline std::vector<Probe> trailing_probes(const SourceSpec& src, double t_max, int nt, int nr, double gap = 0.5) {
    require(src.time_support && std::isfinite(src.spatial_radius), "trailing_probes: source is not compact");
    const double edge = *src.time_support + src.spatial_radius + gap;
    require(t_max > edge, "trailing_probes: horizon does not reach the trailing region");
    std::vector<Probe> out;
    for (int i = 1; i <= nt; ++i) {
        const double t = edge + (t_max - edge) * i / nt;
        for (int j = 0; j < nr; ++j) {
            const double r = (t - edge) * (j + 0.5) / nr;
            const double z = std::cos(0.7 + 1.3 * j), ph = 0.9 * i + 2.1 * j;
            const double st = std::sqrt(1.0 - z * z);
            out.push_back({t, Vec3{r * st * std::cos(ph), r * st * std::sin(ph), r * z}});
        }
    }
    return out;
}

/// The same trailing probes evaluated with the Kirchhoff oracle; each value is
/// exactly zero because the backward cone misses the source support.
inline double huygens_residual_kirchhoff(const SourceSpec& src, const std::vector<Probe>& probes,
                                         const KirchhoffOptions& opt = {}) {
    require(src.time_support.has_value() && std::isfinite(src.spatial_radius),
            "huygens_residual_kirchhoff: source is not compact");
    const double edge = *src.time_support + src.spatial_radius;
    double worst = 0.0;
    int used = 0;
    for (const auto& p : probes) {
        if (!(p.t - p.x.norm() > edge)) continue;
        ++used;
        worst = std::max(worst, std::abs(kirchhoff_eval(src, p.t, p.x, opt).value));
    }
    if (used == 0) throw PreconditionError("huygens_residual_kirchhoff: no probe in the trailing region");
    return worst;
}

/// (tau + 2 + |y|)^alpha |F|, the kernel-dominating source.
inline SourceSpec cone_weighted_abs(const SourceSpec& src, double alpha) {
    SourceSpec w = src;
    w.id = src.id + "-cone-weighted";
    const auto f = src.evaluator;
    w.evaluator = [f, alpha](double tau, double r, Vec3 om) { return std::pow(tau + 2.0 + r, alpha) * std::abs(f(tau, r, om)); };
    return w;
}

struct DominationEntry {
    Probe probe;
    double lhs = 0.0; ///< (t + 2 - |x|)^alpha |phi(t, x)|
    double rhs = 0.0; ///< Kirchhoff of (tau + 2 + |y|)^alpha |F| at (t, x)
    bool holds = true;
};

struct DominationReport {
    double alpha = 0.0;
    std::vector<DominationEntry> entries;
    bool all_hold = true;
    double max_ratio = 0.0;
};

/// Checks (t+2-r)^alpha |phi| <= K[(tau+2+|y|)^alpha |F|] at each probe, with both
/// sides from the Kirchhoff quadrature.
inline DominationReport cone_weight_domination_check(const SourceSpec& src, double alpha,
                                                     const std::vector<Probe>& probes,
                                                     const KirchhoffOptions& opt = {}) {
    require(alpha >= 0.0, "cone_weight_domination_check: alpha must be non-negative");
    DominationReport rep;
    rep.alpha = alpha;
    const SourceSpec dom = cone_weighted_abs(src, alpha);
    for (const auto& p : probes) {
        const double r = p.x.norm();
        require(r <= p.t + 2.0, "cone_weight_domination_check: probe outside t + 2 - |x| >= 0");
        DominationEntry e;
        e.probe = p;
        e.lhs = std::pow(p.t + 2.0 - r, alpha) * std::abs(kirchhoff_eval(src, p.t, p.x, opt).value);
        e.rhs = kirchhoff_eval(dom, p.t, p.x, opt).value;
        e.holds = e.lhs <= e.rhs * (1.0 + 1e-12) + 1e-300;
        if (e.rhs > 0.0) rep.max_ratio = std::max(rep.max_ratio, e.lhs / e.rhs);
        rep.all_hold = rep.all_hold && e.holds;
        rep.entries.push_back(e);
    }
    return rep;
}

} // namespace wavecert
