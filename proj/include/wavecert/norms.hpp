#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wavecert/error.hpp"
#include "wavecert/field.hpp"
#include "wavecert/quadrature.hpp"
#include "wavecert/solver.hpp"
#include "wavecert/source.hpp"
#include "wavecert/sphere.hpp"
#include "wavecert/weights.hpp"

namespace wavecert {

// ---------------------------------------------------------------------------
// Per-slice radial data
// ---------------------------------------------------------------------------

/// v = r u and its centred radial derivative for every mode of one slice, with
/// the parity ghost at the origin and zero past the outer edge.
struct SliceData {
    double t = 0.0;
    double dr = 0.0;
    int nr = 0;
    std::vector<int> ell;                 ///< degree of each mode
    std::vector<std::vector<double>> u;   ///< u_lm(r_j)
    std::vector<std::vector<double>> v;   ///< r u_lm
    std::vector<std::vector<double>> vr;  ///< d/dr (r u_lm)
    std::vector<std::vector<double>> vt;  ///< r d/dt u_lm (empty when u_t is unavailable)

    double r(int j) const { return (j + 0.5) * dr; }
    std::size_t modes() const { return ell.size(); }
};

inline SliceData slice_data(const RadialModeField& u, std::size_t k, const RadialModeField* ut = nullptr) {
    require(k < u.slices(), "slice_data: slice index out of range");
    SliceData d;
    d.t = u.time(k);
    d.dr = u.dr();
    d.nr = u.nr();
    const std::size_t nm = u.modes();
    d.ell.resize(nm);
    d.u.resize(nm);
    d.v.resize(nm);
    d.vr.resize(nm);
    if (ut) d.vt.resize(nm);
    for (std::size_t idx = 0; idx < nm; ++idx) {
        const int l = mode_label(static_cast<int>(idx)).l;
        d.ell[idx] = l;
        const auto row = u.mode(k, idx);
        d.u[idx].assign(row.begin(), row.end());
        auto& v = d.v[idx];
        v.resize(d.nr);
        for (int j = 0; j < d.nr; ++j) v[j] = d.r(j) * row[j];
        const double ghost = (l % 2 == 0) ? -1.0 : 1.0;
        auto& vr = d.vr[idx];
        vr.resize(d.nr);
        for (int j = 0; j < d.nr; ++j) {
            const double left = (j == 0) ? ghost * v[0] : v[j - 1];
            const double right = (j + 1 < d.nr) ? v[j + 1] : 0.0;
            vr[j] = (right - left) / (2.0 * d.dr);
        }
        if (ut) {
            const auto trow = ut->mode(k, idx);
            auto& vt = d.vt[idx];
            vt.resize(d.nr);
            for (int j = 0; j < d.nr; ++j) vt[j] = d.r(j) * trow[j];
        }
    }
    return d;
}

/// Radii at which the (t + 2 - r) weights are defined.
inline int weighted_extent(const SliceData& d) {
    int n = 0;
    while (n < d.nr && d.r(n) < d.t + 2.0) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Left side of the weighted estimate
// ---------------------------------------------------------------------------

/// Squared weighted norms of grad_{t,x} phi, phi / r and grad_S2 phi / r at one time,
/// each with weight (t + 2 - r)^s over R^3.
struct WeightedEnergy {
    double grad = 0.0;
    double phi_over_r = 0.0;
    double angular = 0.0;

    /// Sum of the three norms (square roots), the quantity bounded by the estimate.
    double norm_sum() const { return std::sqrt(grad) + std::sqrt(phi_over_r) + std::sqrt(angular); }
};

/// Radial midpoint rule on the cell-centred grid, spectral sums over (l, m).
inline WeightedEnergy lhs_weighted_energy(const SliceData& d, double s) {
    require(!d.vt.empty(), "lhs_weighted_energy: slice lacks time derivatives");
    WeightedEnergy e;
    const int n = weighted_extent(d);
    for (std::size_t idx = 0; idx < d.modes(); ++idx) {
        const double ll = d.ell[idx] * (d.ell[idx] + 1.0);
        for (int j = 0; j < n; ++j) {
            const double w = std::pow(d.t + 2.0 - d.r(j), s);
            const double u = d.u[idx][j];
            const double ur_r = d.vr[idx][j] - u; // r u_r
            e.grad += w * (d.vt[idx][j] * d.vt[idx][j] + ur_r * ur_r + ll * u * u);
            e.phi_over_r += w * u * u;
            e.angular += w * ll * u * u;
        }
    }
    e.grad *= d.dr;
    e.phi_over_r *= d.dr;
    e.angular *= d.dr;
    return e;
}

inline WeightedEnergy lhs_weighted_energy(const LinearSolution& sol, double s, double t) {
    require(s > 1.0 && s < 2.0, "lhs_weighted_energy: s must lie in (1, 2)");
    const long k = sol.u.find_slice(t, 1e-9);
    if (k < 0) throw PreconditionError("lhs_weighted_energy: t = " + std::to_string(t) + " is not a stored slice");
    return lhs_weighted_energy(slice_data(sol.u, static_cast<std::size_t>(k), &sol.ut), s);
}

// ---------------------------------------------------------------------------
// Right side: weighted space-time norm of the source
// ---------------------------------------------------------------------------

enum class SourceWeight {
    TwoMinusR,  ///< (t + 2 - r)^{1/2 + delta}, the form used throughout the proof
    RMinusTwo,  ///< |t + r - 2|^{1/2 + delta}, the alternative sign convention
};

struct RhsOptions {
    int t_panels = 48;
    int r_panels = 32;
    int order = 8;
    SourceWeight weight = SourceWeight::TwoMinusR;
};

/// || (t+2+r)^{s/2 + alpha} w_delta F ||_{L^2([0, t_max] x R^3)} by tensor Gauss–Legendre
/// quadrature in (t, r) and a product rule on S^2 exact for the source's angular degree.
inline double rhs_weighted_source(const SourceSpec& src, double s, double delta, double t_max, double alpha = 0.0,
                                  const RhsOptions& opt = {}) {
    require(delta > 0.0, "rhs_weighted_source: delta must be positive");
    require(t_max > 0.0, "rhs_weighted_source: t_max must be positive");
    if (src.is_zero()) return 0.0;
    const double t_end = src.time_support ? std::min(t_max, *src.time_support) : t_max;
    const SphereQuadrature quad(std::max(1, src.angular_degree + 1));
    const bool radial = src.angular_degree == 0;
    auto angular_sq = [&](double t, double r) {
        if (radial) {
            const double f = src(t, r, Vec3{0.0, 0.0, 1.0});
            return 4.0 * std::numbers::pi * f * f;
        }
        return quad.integrate([&](Vec3 w) {
            const double f = src(t, r, w);
            return f * f;
        });
    };
    auto slab = [&](double t) {
        const double R = std::min(src.support_radius(t), t + 2.0);
        if (!(R > 0.0)) return 0.0;
        return integrate_gl(
            [&](double r) {
                const double a = std::pow(t + 2.0 + r, s + 2.0 * alpha);
                const double b = (opt.weight == SourceWeight::TwoMinusR) ? std::pow(t + 2.0 - r, 1.0 + 2.0 * delta)
                                                                         : std::pow(std::abs(t + r - 2.0), 1.0 + 2.0 * delta);
                return a * b * angular_sq(t, r) * r * r;
            },
            0.0, R, opt.r_panels, opt.order);
    };
    return std::sqrt(integrate_gl(slab, 0.0, t_end, opt.t_panels, opt.order));
}

// ---------------------------------------------------------------------------
// Light-cone fluxes and the integrated identity
// ---------------------------------------------------------------------------

enum class Cone {
    Outgoing, ///< u = t - r = const, weight (t+2+r)^s, combination phi_t + phi_r + phi/r
    Incoming, ///< ubar = t + r = const, weight (t+2-r)^s, combination phi_t - phi_r - phi/r
};

/// Per-slice combinations r(phi_t +- (phi_r + phi/r)) = v_t +- v_r for every mode, and
/// l(l+1) u^2 summed over modes; precomputed once for cone sampling.
struct ConeTable {
    std::vector<double> times;
    double dr = 0.0;
    int nr = 0;
    std::size_t nm = 0;
    std::vector<double> plus, minus; ///< [k][idx][j]
    std::vector<double> ang;         ///< [k][j] sum l(l+1) u^2

    explicit ConeTable(const LinearSolution& sol) : times(sol.u.times()), dr(sol.u.dr()), nr(sol.u.nr()), nm(sol.u.modes()) {
        const std::size_t ns = times.size();
        plus.resize(ns * nm * nr);
        minus.resize(ns * nm * nr);
        ang.assign(ns * nr, 0.0);
        for (std::size_t k = 0; k < ns; ++k) {
            const SliceData d = slice_data(sol.u, k, &sol.ut);
            for (std::size_t idx = 0; idx < nm; ++idx) {
                const double ll = d.ell[idx] * (d.ell[idx] + 1.0);
                for (int j = 0; j < nr; ++j) {
                    plus[(k * nm + idx) * nr + j] = d.vt[idx][j] + d.vr[idx][j];
                    minus[(k * nm + idx) * nr + j] = d.vt[idx][j] - d.vr[idx][j];
                    ang[k * nr + j] += ll * d.u[idx][j] * d.u[idx][j];
                }
            }
        }
    }

    /// Flux density at radius index j and time t (linear in t between slices):
    /// returns (sum_lm (v_t +- v_r)^2, sum l(l+1) u^2).
    std::pair<double, double> sample(Cone c, int j, double t) const {
        auto it = std::lower_bound(times.begin(), times.end(), t - 1e-12);
        std::size_t k1 = static_cast<std::size_t>(it - times.begin());
        if (k1 >= times.size()) k1 = times.size() - 1;
        const std::size_t k0 = (k1 == 0) ? 0 : k1 - 1;
        const double a = (k1 == k0) ? 0.0 : std::clamp((t - times[k0]) / (times[k1] - times[k0]), 0.0, 1.0);
        const auto& tab = (c == Cone::Outgoing) ? plus : minus;
        double sq = 0.0;
        for (std::size_t idx = 0; idx < nm; ++idx) {
            const double x = (1.0 - a) * tab[(k0 * nm + idx) * nr + j] + a * tab[(k1 * nm + idx) * nr + j];
            sq += x * x;
        }
        const double g = (1.0 - a) * ang[k0 * nr + j] + a * ang[k1 * nr + j];
        return {sq, g};
    }
};

/// int int (t+2 +- r)^s r^2 (phi_t +- phi_r +- phi/r)^2 d omega dr along the cone, sampled
/// by linear interpolation in t. With include_angular the (t+2 -+ r)^s (grad_S2 phi)^2
/// term of the conserved flux is added.
inline double lightcone_flux(const ConeTable& tab, double s, Cone cone, double value, bool include_angular = false) {
    const double t0 = tab.times.front(), t1 = tab.times.back();
    double sum = 0.0;
    int used = 0;
    for (int j = 0; j < tab.nr; ++j) {
        const double r = (j + 0.5) * tab.dr;
        const double t = (cone == Cone::Outgoing) ? value + r : value - r;
        if (t < t0 - 1e-12 || t > t1 + 1e-12) continue;
        if (r > t + 2.0) continue;
        ++used;
        const auto [sq, g] = tab.sample(cone, j, t);
        const double wp = std::pow(t + 2.0 + r, s), wm = std::pow(t + 2.0 - r, s);
        const double main = (cone == Cone::Outgoing) ? wp * sq : wm * sq;
        const double extra = include_angular ? ((cone == Cone::Outgoing) ? wm * g : wp * g) : 0.0;
        sum += main + extra;
    }
    if (used == 0) throw PreconditionError("lightcone_flux: the cone does not intersect the computed slab");
    return sum * tab.dr;
}

inline double lightcone_flux(const LinearSolution& sol, double s, Cone cone, double value, bool include_angular = false) {
    return lightcone_flux(ConeTable(sol), s, cone, value, include_angular);
}

/// sup over a uniform family of cones within the slab.
inline double sup_lightcone_flux(const ConeTable& tab, double s, Cone cone, int count = 64, bool include_angular = false) {
    const double t1 = tab.times.back();
    double best = 0.0;
    for (int i = 0; i < count; ++i) {
        const double a = (i + 0.5) / count;
        const double value = (cone == Cone::Outgoing) ? -1.0 + a * (t1 + 1.0) : a * t1;
        best = std::max(best, lightcone_flux(tab, s, cone, value, include_angular));
    }
    return best;
}

/// Terms of the integrated divergence identity: slice energy, the two full cone fluxes,
/// and the space-time work int int int |X phi| |F| r^2 that bounds each of them.
struct IntegratingCheck {
    double work = 0.0;
    double sup_slice_energy = 0.0;
    double sup_flux_outgoing = 0.0;
    double sup_flux_incoming = 0.0;
    double tolerance = 1e-2;

    bool holds() const {
        const double lim = work * (1.0 + tolerance) + 1e-300;
        return sup_slice_energy <= lim && sup_flux_outgoing <= lim && sup_flux_incoming <= lim;
    }
};

/// Slice energy int [A (v_t+v_r)^2 + B (v_t-v_r)^2 + (A+B) l(l+1) u^2] / 2 dr summed over modes.
inline double slice_energy(const SliceData& d, double s) {
    double e = 0.0;
    const int n = weighted_extent(d);
    for (std::size_t idx = 0; idx < d.modes(); ++idx) {
        const double ll = d.ell[idx] * (d.ell[idx] + 1.0);
        for (int j = 0; j < n; ++j) {
            const double r = d.r(j);
            const double a = std::pow(d.t + 2.0 + r, s), b = std::pow(d.t + 2.0 - r, s);
            const double p = d.vt[idx][j] + d.vr[idx][j], q = d.vt[idx][j] - d.vr[idx][j];
            const double u = d.u[idx][j];
            e += 0.5 * (a * p * p + b * q * q + (a + b) * ll * u * u);
        }
    }
    return e * d.dr;
}

inline IntegratingCheck integrating_check(const LinearSolution& sol, const SourceSpec& src, double s, int cones = 64) {
    IntegratingCheck chk;
    const std::size_t nm = sol.u.modes();
    const int L = sol.grid.L;
    const SphericalTransform tf(L, std::max(L, src.angular_degree) + L + 2);
    const auto& quad = tf.quadrature();
    std::vector<double> coeff(nm), nodal(tf.nodes());
    std::vector<double> work_t(sol.slices(), 0.0);
    for (std::size_t k = 0; k < sol.slices(); ++k) {
        const SliceData d = slice_data(sol.u, k, &sol.ut);
        chk.sup_slice_energy = std::max(chk.sup_slice_energy, slice_energy(d, s));
        const double t = d.t;
        const double R = std::min(src.support_radius(t), t + 2.0);
        double wk = 0.0;
        for (int j = 0; j < d.nr; ++j) {
            const double r = d.r(j);
            if (r > R) break;
            const double a = std::pow(t + 2.0 + r, s), b = std::pow(t + 2.0 - r, s);
            for (std::size_t idx = 0; idx < nm; ++idx) {
                const double p = d.vt[idx][j] + d.vr[idx][j], q = d.vt[idx][j] - d.vr[idx][j];
                coeff[idx] = a * p + b * q; // r X phi per mode
            }
            tf.synthesize_into(coeff, nodal);
            double ring = 0.0;
            for (std::size_t i = 0; i < quad.size(); ++i) ring += quad.weight(i) * std::abs(nodal[i]) * std::abs(src(t, r, quad.unit(i)));
            wk += ring * r; // |X phi| |F| r^2 = |r X phi| |F| r
        }
        work_t[k] = wk * d.dr;
    }
    const auto& ts = sol.u.times();
    for (std::size_t k = 1; k < ts.size(); ++k) chk.work += 0.5 * (work_t[k] + work_t[k - 1]) * (ts[k] - ts[k - 1]);
    const ConeTable tab(sol);
    chk.sup_flux_outgoing = sup_lightcone_flux(tab, s, Cone::Outgoing, cones, true);
    chk.sup_flux_incoming = sup_lightcone_flux(tab, s, Cone::Incoming, cones, true);
    return chk;
}

// ---------------------------------------------------------------------------
// Hardy inequalities
// ---------------------------------------------------------------------------

/// Radial profile with exact derivative, supported in [0, support].
struct RadialProfile {
    std::function<double(double)> f;
    std::function<double(double)> df;
    double support = 1.0;
};

enum class HardyVariant { Hardy2, Hardy1, Hardy3 };

inline HardyVariant hardy_variant_from_string(const std::string& s) {
    if (s == "hardy2") return HardyVariant::Hardy2;
    if (s == "hardy1") return HardyVariant::Hardy1;
    if (s == "3hardy" || s == "hardy3") return HardyVariant::Hardy3;
    throw PreconditionError("unknown Hardy variant '" + s + "'");
}

struct HardyParts {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

/// hardy2: int B phi^2 dr       vs int B (phi_r + phi/r)^2 r^2 dr
/// hardy1: int B phi_r^2 r^2 dr vs the same right side
/// 3hardy: || |t+2-r|^{s/2-1} phi || vs || B^{1/2} phi_r || + || B^{1/2} phi / r || (norms over R^3)
/// with B = (t + 2 - r)^s. A vanishing profile has ratio 0 by convention.
inline HardyParts hardy_parts(const RadialProfile& p, double s, double t, HardyVariant variant, int panels = 256) {
    require(t >= 0.0, "hardy_ratio: t must be non-negative");
    if (variant == HardyVariant::Hardy3) require(s > 1.0 && s < 2.0, "hardy_ratio: 3hardy needs 1 < s < 2");
    else require(s > 0.0, "hardy_ratio: s must be positive");
    require(p.support <= t + 1.0 + 1e-12, "hardy_ratio: profile support exceeds [0, t + 1]");
    const double R = p.support;
    auto B = [&](double r, double e) { return std::pow(t + 2.0 - r, e); };
    HardyParts h;
    auto rhs_sq = [&] {
        return integrate_gl([&](double r) {
            const double w = p.df(r) + p.f(r) / r;
            return B(r, s) * w * w * r * r;
        }, 0.0, R, panels);
    };
    switch (variant) {
        case HardyVariant::Hardy2:
            h.lhs = integrate_gl([&](double r) { return B(r, s) * p.f(r) * p.f(r); }, 0.0, R, panels);
            h.rhs = rhs_sq();
            break;
        case HardyVariant::Hardy1:
            h.lhs = integrate_gl([&](double r) { return B(r, s) * p.df(r) * p.df(r) * r * r; }, 0.0, R, panels);
            h.rhs = rhs_sq();
            break;
        case HardyVariant::Hardy3: {
            const double c = 4.0 * std::numbers::pi;
            h.lhs = std::sqrt(c * integrate_gl([&](double r) { return B(r, s - 2.0) * p.f(r) * p.f(r) * r * r; }, 0.0, R, panels));
            const double a = std::sqrt(c * integrate_gl([&](double r) { return B(r, s) * p.df(r) * p.df(r) * r * r; }, 0.0, R, panels));
            const double b = std::sqrt(c * integrate_gl([&](double r) { return B(r, s) * p.f(r) * p.f(r); }, 0.0, R, panels));
            h.rhs = a + b;
            break;
        }
    }
    h.ratio = (h.rhs > 0.0) ? h.lhs / h.rhs : 0.0;
    return h;
}

inline double hardy_ratio(const RadialProfile& p, double s, double t, HardyVariant variant, int panels = 256) {
    return hardy_parts(p, s, t, variant, panels).ratio;
}

/// Constant extracted from the integration-by-parts proof of the 3hardy inequality: 2 / (s - 1).
inline double hardy3_proof_constant(double s) { return 2.0 / (s - 1.0); }

/// Random smooth profile (c0 + c1 r + c2 r^2 + c3 r^3)(1 - (r/rho)^2)^m with rho <= t + 1.
template <class Rng>
RadialProfile random_profile(Rng& rng, double t) {
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const double rho = (0.3 + 0.7 * ud(rng)) * (t + 1.0);
    const int m = 2 + static_cast<int>(4.0 * ud(rng));
    const double c[4] = {nd(rng), nd(rng), nd(rng), nd(rng)};
    RadialProfile p;
    p.support = rho;
    p.f = [=](double r) {
        if (r >= rho) return 0.0;
        const double x = r / rho;
        return (c[0] + r * (c[1] + r * (c[2] + r * c[3]))) * std::pow(1.0 - x * x, m);
    };
    p.df = [=](double r) {
        if (r >= rho) return 0.0;
        const double x = r / rho;
        const double poly = c[0] + r * (c[1] + r * (c[2] + r * c[3]));
        const double dpoly = c[1] + r * (2.0 * c[2] + 3.0 * r * c[3]);
        const double w = 1.0 - x * x;
        return dpoly * std::pow(w, m) + poly * m * std::pow(w, m - 1) * (-2.0 * r / (rho * rho));
    };
    return p;
}

// ---------------------------------------------------------------------------
// Trace inequality
// ---------------------------------------------------------------------------

struct TraceReport {
    double t = 0.0;
    double trace = 0.0;      ///< sup r^{1/2}(t+2+r)^{1/2}(t+2-r)^{(s-1)/2} ||phi||_{L^2(S^2)}
    double r_at_sup = 0.0;
    double case1 = 0.0;      ///< sup over t >= 3r - 2 of r^{1/2}(t+2-r)^{s/2} ||phi||
    double case2 = 0.0;      ///< sup over t <= 3r - 2 of r (t+2-r)^{(s-1)/2} ||phi||
    double rhs = 0.0;        ///< ||B^{1/2} phi_r|| + ||B^{1/2} phi / r||
    double constant() const { return rhs > 0.0 ? trace / rhs : 0.0; }
    double constant1() const { return rhs > 0.0 ? case1 / rhs : 0.0; }
    double constant2() const { return rhs > 0.0 ? case2 / rhs : 0.0; }
    /// trace <= max(sqrt(2) case1, 2 case2), the reduction used by the two-case proof.
    bool reduction_holds() const { return trace <= std::max(std::sqrt(2.0) * case1, 2.0 * case2) * (1.0 + 1e-12) + 1e-300; }
};

inline TraceReport trace_norm(const SliceData& d, double s) {
    require(s > 1.0 && s < 2.0, "trace_norm: s must lie in (1, 2)");
    TraceReport rep;
    rep.t = d.t;
    const double t = d.t;
    const int n = weighted_extent(d);
    double a = 0.0, b = 0.0;
    for (int j = 0; j < n; ++j) {
        const double r = d.r(j);
        double l2 = 0.0;
        for (std::size_t idx = 0; idx < d.modes(); ++idx) l2 += d.u[idx][j] * d.u[idx][j];
        l2 = std::sqrt(l2);
        const double wm = t + 2.0 - r;
        const double tr = std::sqrt(r) * std::sqrt(t + 2.0 + r) * std::pow(wm, 0.5 * (s - 1.0)) * l2;
        if (tr > rep.trace) {
            rep.trace = tr;
            rep.r_at_sup = r;
        }
        if (t >= 3.0 * r - 2.0) rep.case1 = std::max(rep.case1, std::sqrt(r) * std::pow(wm, 0.5 * s) * l2);
        if (t <= 3.0 * r - 2.0) rep.case2 = std::max(rep.case2, r * std::pow(wm, 0.5 * (s - 1.0)) * l2);
        const double B = std::pow(wm, s);
        for (std::size_t idx = 0; idx < d.modes(); ++idx) {
            const double u = d.u[idx][j];
            const double ur_r = d.vr[idx][j] - u;
            a += B * ur_r * ur_r;
            b += B * u * u;
        }
    }
    rep.rhs = std::sqrt(a * d.dr) + std::sqrt(b * d.dr);
    return rep;
}

/// Pointwise bounds behind the two regimes, with the constants of the integration by parts
/// made explicit. With X = ||B^{1/2} phi/r||, Y = ||B^{1/2} phi_r||, H = ||(t+2-r)^{s/2-1} phi||
/// and B = (t+2-r)^s:
///   t >= 3r - 2:  r (t+2-r)^s ||phi(r)||^2_{L^2(S^2)}       <= X (2Y + s H)
///   t <= 3r - 2:  r^2 (t+2-r)^{s-1} ||phi(r)||^2_{L^2(S^2)} <= 2 Y H + (s - 1) H^2
struct TraceCaseCheck {
    double t = 0.0;
    double case1_lhs = 0.0, case1_bound = 0.0;
    double case2_lhs = 0.0, case2_bound = 0.0;
    double hardy3 = 0.0;   ///< H
    double case1_ratio() const { return case1_bound > 0.0 ? case1_lhs / case1_bound : 0.0; }
    double case2_ratio() const { return case2_bound > 0.0 ? case2_lhs / case2_bound : 0.0; }
    bool holds(double tol = 1e-2) const { return case1_ratio() <= 1.0 + tol && case2_ratio() <= 1.0 + tol; }
};

inline TraceCaseCheck trace_case_check(const SliceData& d, double s) {
    require(s > 1.0 && s < 2.0, "trace_case_check: s must lie in (1, 2)");
    TraceCaseCheck c;
    c.t = d.t;
    const double t = d.t;
    const int n = weighted_extent(d);
    double x2 = 0.0, y2 = 0.0, h2 = 0.0;
    std::vector<double> l2(n, 0.0);
    for (int j = 0; j < n; ++j) {
        const double r = d.r(j), wm = t + 2.0 - r, B = std::pow(wm, s);
        for (std::size_t idx = 0; idx < d.modes(); ++idx) {
            const double u = d.u[idx][j], rur = d.vr[idx][j] - u;
            l2[j] += u * u;
            x2 += B * u * u;
            y2 += B * rur * rur;
            h2 += std::pow(wm, s - 2.0) * u * u * r * r;
        }
    }
    const double X = std::sqrt(x2 * d.dr), Y = std::sqrt(y2 * d.dr), H = std::sqrt(h2 * d.dr);
    c.hardy3 = H;
    c.case1_bound = X * (2.0 * Y + s * H);
    c.case2_bound = 2.0 * Y * H + (s - 1.0) * H * H;
    for (int j = 0; j < n; ++j) {
        const double r = d.r(j), wm = t + 2.0 - r;
        if (t >= 3.0 * r - 2.0) c.case1_lhs = std::max(c.case1_lhs, r * std::pow(wm, s) * l2[j]);
        if (t <= 3.0 * r - 2.0) c.case2_lhs = std::max(c.case2_lhs, r * r * std::pow(wm, s - 1.0) * l2[j]);
    }
    return c;
}

inline TraceReport trace_norm(const LinearSolution& sol, double s, double t) {
    const long k = sol.u.find_slice(t, 1e-9);
    if (k < 0) throw PreconditionError("trace_norm: t is not a stored slice");
    return trace_norm(slice_data(sol.u, static_cast<std::size_t>(k)), s);
}

// ---------------------------------------------------------------------------
// Mixed norms L^infty_t L^sigma_r (sphere norm)
// ---------------------------------------------------------------------------

enum class SphereNorm { Lbeta, H1, W1beta, H2, Linf };

inline SphereNorm sphere_norm_from_string(const std::string& s) {
    if (s == "Lbeta" || s == "L") return SphereNorm::Lbeta;
    if (s == "H1") return SphereNorm::H1;
    if (s == "W1beta" || s == "W1") return SphereNorm::W1beta;
    if (s == "H2") return SphereNorm::H2;
    if (s == "Linf") return SphereNorm::Linf;
    throw PreconditionError("unknown sphere norm '" + s + "'");
}

/// r^a (t+2+r)^b (t+2-r)^c.
struct RadialWeight {
    double a = 0.0, b = 0.0, c = 0.0;
    double operator()(double t, double r) const {
        return std::pow(r, a) * std::pow(t + 2.0 + r, b) * std::pow(t + 2.0 - r, c);
    }
};

struct MixedNormSpec {
    RadialWeight weight;
    double sigma = 2.0;                  ///< radial exponent in [2, inf]
    SphereNorm sphere = SphereNorm::Lbeta;
    double beta = 2.0;                   ///< for Lbeta and W1beta
    double r_limit_offset = 1.0;         ///< integrate over r <= t + offset (support of phi)
};

/// Sphere norm of the band-limited field with coefficients c (nodal norms use tf's quadrature).
inline double sphere_norm(std::span<const double> c, const SphericalTransform& tf, SphereNorm kind, double beta,
                          std::vector<double>& nodal, std::vector<double>& grad) {
    switch (kind) {
        case SphereNorm::H1: return sobolev_sphere_norm(c, 1);
        case SphereNorm::H2: return sobolev_sphere_norm(c, 2);
        case SphereNorm::Lbeta:
            tf.synthesize_into(c, nodal);
            return sphere_lp_norm(nodal, tf.quadrature(), beta);
        case SphereNorm::Linf:
            tf.synthesize_into(c, nodal);
            return sphere_lp_norm(nodal, tf.quadrature(), std::numeric_limits<double>::infinity());
        case SphereNorm::W1beta: {
            tf.synthesize_into(c, nodal);
            tf.gradient_sq_into(c, grad);
            for (double& g : grad) g = std::sqrt(std::max(0.0, g));
            return sphere_lp_norm(nodal, tf.quadrature(), beta) + sphere_lp_norm(grad, tf.quadrature(), beta);
        }
    }
    return 0.0;
}

/// Radial L^sigma (r^2 dr) norm at one slice of weight * sphere norm; sigma = inf gives the max.
inline double mixed_norm_slice(const RadialModeField& u, std::size_t k, const MixedNormSpec& spec,
                               const SphericalTransform& tf) {
    const double t = u.time(k);
    const int nr = u.nr();
    std::vector<double> nodal(tf.nodes()), grad(tf.nodes());
    double acc = 0.0;
    const bool inf = std::isinf(spec.sigma);
    for (int j = 0; j < nr; ++j) {
        const double r = u.radius(j);
        if (r > t + spec.r_limit_offset || r >= t + 2.0) break;
        const auto c = u.coefficients(k, j);
        const double h = spec.weight(t, r) * sphere_norm(c, tf, spec.sphere, spec.beta, nodal, grad);
        if (inf) acc = std::max(acc, std::abs(h));
        else acc += std::pow(std::abs(h), spec.sigma) * r * r;
    }
    return inf ? acc : std::pow(acc * u.dr(), 1.0 / spec.sigma);
}

inline void validate_mixed(const MixedNormSpec& spec) {
    require(spec.sigma >= 2.0, "mixed_norm: sigma must lie in [2, inf]");
    if (spec.sphere == SphereNorm::Lbeta || spec.sphere == SphereNorm::W1beta)
        require(spec.beta >= 1.0 && std::isfinite(spec.beta), "mixed_norm: beta must be finite and >= 1");
}

/// Sphere transform with quadrature padded beyond the band limit for nodal L^beta norms.
inline SphericalTransform nodal_transform(int L) { return SphericalTransform(L, 2 * L + 2); }

/// sup over stored slices of mixed_norm_slice.
inline double mixed_norm(const RadialModeField& u, const MixedNormSpec& spec) {
    validate_mixed(spec);
    const SphericalTransform tf = nodal_transform(u.degree());
    double best = 0.0;
    for (std::size_t k = 0; k < u.slices(); ++k) best = std::max(best, mixed_norm_slice(u, k, spec, tf));
    return best;
}

/// Weights of the trace norm, r^{1/2} (t+2+r)^{1/2} (t+2-r)^{(s-1)/2}.
inline RadialWeight trace_weight(double s) { return {0.5, 0.5, 0.5 * (s - 1.0)}; }

/// Weights of the interpolated norm, r^{1/2 - 3 theta/2} (t+2+r)^{(1-theta)/2} (t+2-r)^{(s-1+theta)/2 + alpha}.
inline RadialWeight interpolated_weight(double s, double theta, double alpha = 0.0) {
    return {0.5 - 1.5 * theta, 0.5 * (1.0 - theta), 0.5 * (s - 1.0 + theta) + alpha};
}

/// Hölder interpolation between the L^2_r L^q endpoint (weight r^{-1}(t+2-r)^{s/2}) and the
/// L^infty_r L^2 trace endpoint, per slice: middle <= lq^theta * trace^{1-theta}.
struct InterpolationCheck {
    double sigma = 0.0, beta = 0.0;
    double middle = 0.0;        ///< sup_t of the interpolated norm
    double lq_endpoint = 0.0;   ///< sup_t
    double trace_endpoint = 0.0;///< sup_t
    double worst_slice_ratio = 0.0; ///< max over slices of middle / (lq^theta trace^{1-theta})
    bool holds() const { return worst_slice_ratio <= 1.0 + 1e-10; }
};

inline InterpolationCheck interpolation_check(const RadialModeField& u, double s, double theta, double q) {
    require(theta > 0.0 && theta < 1.0 && q >= 2.0, "interpolation_check: need 0 < theta < 1 and q >= 2");
    InterpolationCheck c;
    c.sigma = 2.0 / theta;
    c.beta = 1.0 / (theta / q + 0.5 * (1.0 - theta));
    const SphericalTransform tf = nodal_transform(u.degree());
    const MixedNormSpec mid{interpolated_weight(s, theta), c.sigma, SphereNorm::Lbeta, c.beta};
    const MixedNormSpec lq{{-1.0, 0.0, 0.5 * s}, 2.0, SphereNorm::Lbeta, q};
    const MixedNormSpec tr{trace_weight(s), std::numeric_limits<double>::infinity(), SphereNorm::Lbeta, 2.0};
    for (std::size_t k = 0; k < u.slices(); ++k) {
        const double m = mixed_norm_slice(u, k, mid, tf);
        const double a = mixed_norm_slice(u, k, lq, tf);
        const double b = mixed_norm_slice(u, k, tr, tf);
        c.middle = std::max(c.middle, m);
        c.lq_endpoint = std::max(c.lq_endpoint, a);
        c.trace_endpoint = std::max(c.trace_endpoint, b);
        const double bound = std::pow(a, theta) * std::pow(b, 1.0 - theta);
        if (m > 0.0) c.worst_slice_ratio = std::max(c.worst_slice_ratio, bound > 0.0 ? m / bound : std::numeric_limits<double>::infinity());
    }
    return c;
}

// ---------------------------------------------------------------------------
// Estimate ratio with refinement trend
// ---------------------------------------------------------------------------

struct TrendPoint {
    double dr = 0.0;
    double lhs = 0.0;
    double ratio = 0.0;
    double flux_outgoing_ratio = 0.0; ///< sqrt(sup_u flux) / rhs
    double flux_incoming_ratio = 0.0; ///< sqrt(sup_ubar flux) / rhs
    IntegratingCheck integrating;
};

/// Per-slice left side on the finest resolution.
struct SliceRow {
    double t = 0.0;
    double grad = 0.0, phi_over_r = 0.0, angular = 0.0; ///< norms (square roots); zero for the shifted variant
    double lhs = 0.0;
};

/// One certified inequality check.
struct NormReport {
    std::string id;
    std::string source_id;
    WeightParams params;
    double lhs = 0.0;
    double lhs_grad = 0.0, lhs_phi_over_r = 0.0, lhs_angular = 0.0; ///< sup_t of each norm
    double rhs = 0.0;
    double rhs_displayed_sign = 0.0; ///< RHS with |t + r - 2| in place of (t + 2 - r)
    double ratio = 0.0;
    bool vacuous = false;            ///< zero source: 0 / 0
    Grid grid;                       ///< finest grid
    std::vector<TrendPoint> trend;
    std::vector<SliceRow> slices;

    double relative_change() const {
        if (trend.size() < 2 || trend.back().ratio == 0.0) return 0.0;
        return std::abs(trend.back().ratio - trend[trend.size() - 2].ratio) / trend.back().ratio;
    }
    bool stable(double tol = 0.1) const { return vacuous || relative_change() <= tol; }
};

struct EstimateOptions {
    std::vector<double> dr_ladder{1.0 / 32.0, 1.0 / 64.0};
    double t_max = 8.0;
    int L = -1;               ///< -1: use the source's angular degree
    int slice_stride = 2;
    int cones = 48;
    RhsOptions rhs;
};

/// Solves the linear problem on each resolution of the ladder and compares sup_t LHS with the
/// weighted source norm. For alpha = 0 the LHS is the sum of the three weighted energy norms;
/// for alpha > 0 it is the shifted interpolated norm L^infty_t L^sigma_r L^beta(S^2) and the
/// RHS weight becomes (t+2+r)^{s/2+alpha}.
inline NormReport estimate_ratio(const SourceSpec& src, const WeightParams& wp, const EstimateOptions& opt = {}) {
    wp.validate_estimate();
    if (wp.alpha > 0.0) wp.validate_interpolation();
    require(!opt.dr_ladder.empty(), "estimate_ratio: empty resolution ladder");
    NormReport rep;
    rep.id = (wp.alpha > 0.0) ? "weighted-estimate-shifted" : "weighted-estimate";
    rep.source_id = src.id;
    rep.params = wp;
    rep.rhs = rhs_weighted_source(src, wp.s, wp.delta, opt.t_max, wp.alpha, opt.rhs);
    RhsOptions alt = opt.rhs;
    alt.weight = SourceWeight::RMinusTwo;
    rep.rhs_displayed_sign = rhs_weighted_source(src, wp.s, wp.delta, opt.t_max, wp.alpha, alt);
    rep.vacuous = src.is_zero() || rep.rhs == 0.0;
    const int L = (opt.L >= 0) ? opt.L : src.angular_degree;
    for (double dr : opt.dr_ladder) {
        const Grid g = Grid::make(dr, opt.t_max, L);
        const LinearSolution sol = solve_linear(src, g, {opt.slice_stride});
        if (sol.blowup) throw NonFiniteError("estimate_ratio: non-finite solution for source " + src.id, 0);
        TrendPoint tp;
        tp.dr = dr;
        double g_sup = 0.0, p_sup = 0.0, a_sup = 0.0;
        rep.slices.clear();
        if (wp.alpha > 0.0) {
            const MixedNormSpec spec{interpolated_weight(wp.s, wp.theta, wp.alpha), wp.sigma(), SphereNorm::Lbeta, wp.beta()};
            validate_mixed(spec);
            const SphericalTransform tf = nodal_transform(sol.u.degree());
            for (std::size_t k = 0; k < sol.slices(); ++k) {
                const double m = mixed_norm_slice(sol.u, k, spec, tf);
                tp.lhs = std::max(tp.lhs, m);
                rep.slices.push_back({sol.time(k), 0.0, 0.0, 0.0, m});
            }
        } else {
            for (std::size_t k = 0; k < sol.slices(); ++k) {
                const auto e = lhs_weighted_energy(slice_data(sol.u, k, &sol.ut), wp.s);
                tp.lhs = std::max(tp.lhs, e.norm_sum());
                g_sup = std::max(g_sup, std::sqrt(e.grad));
                p_sup = std::max(p_sup, std::sqrt(e.phi_over_r));
                a_sup = std::max(a_sup, std::sqrt(e.angular));
                rep.slices.push_back({sol.time(k), std::sqrt(e.grad), std::sqrt(e.phi_over_r), std::sqrt(e.angular), e.norm_sum()});
            }
        }
        const ConeTable tab(sol);
        const double fo = sup_lightcone_flux(tab, wp.s, Cone::Outgoing, opt.cones);
        const double fi = sup_lightcone_flux(tab, wp.s, Cone::Incoming, opt.cones);
        if (!rep.vacuous) {
            tp.ratio = tp.lhs / rep.rhs;
            tp.flux_outgoing_ratio = std::sqrt(fo) / rep.rhs;
            tp.flux_incoming_ratio = std::sqrt(fi) / rep.rhs;
        }
        tp.integrating = integrating_check(sol, src, wp.s, opt.cones);
        rep.trend.push_back(tp);
        rep.grid = g;
        rep.lhs = tp.lhs;
        rep.lhs_grad = g_sup;
        rep.lhs_phi_over_r = p_sup;
        rep.lhs_angular = a_sup;
    }
    rep.ratio = rep.vacuous ? 0.0 : rep.lhs / rep.rhs;
    return rep;
}

} // namespace wavecert
