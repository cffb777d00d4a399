#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "wavecert/error.hpp"
#include "wavecert/sphere.hpp"

namespace wavecert {

/// Right-hand side F(t, r, omega) of the linear wave equation. The declared
/// support certificate is |x| <= t + 1; evaluation masks anything outside it.
struct SourceSpec {
    enum class Kind { ClosedForm, Tabulated };

    std::string id;
    Kind kind = Kind::ClosedForm;
    std::function<double(double, double, Vec3)> evaluator;
    double spatial_radius = std::numeric_limits<double>::infinity(); ///< |y| <= R for all t
    std::optional<double> time_support;                            ///< F = 0 for t > tau0
    int angular_degree = 0;                                         ///< band limit in omega
    bool mask = true;

    double operator()(double t, double r, Vec3 omega) const {
        if (mask && r > t + 1.0) return 0.0;
        if (r > spatial_radius) return 0.0;
        if (time_support && (t > *time_support || t < 0.0)) return 0.0;
        return evaluator(t, r, omega);
    }

    /// Largest radius where F(t, .) may be nonzero.
    double support_radius(double t) const {
        return mask ? std::min(t + 1.0, spatial_radius) : spatial_radius;
    }

    bool active(double t) const { return !time_support || t <= *time_support; }
    bool is_zero() const { return id == "zero"; }
};

namespace profile {

/// (1 - x^2)^k on |x| < 1, zero outside.
inline double window(double x, int k = 6) {
    const double a = 1.0 - x * x;
    return (std::abs(x) < 1.0) ? std::pow(a, k) : 0.0;
}

/// sin^6(pi t / tau) on [0, tau], zero outside.
inline double pulse(double t, double tau) {
    if (t <= 0.0 || t >= tau) return 0.0;
    return std::pow(std::sin(std::numbers::pi * t / tau), 6);
}

} // namespace profile

inline SourceSpec zero_source() {
    return {"zero", SourceSpec::Kind::ClosedForm, [](double, double, Vec3) { return 0.0; }, 0.0, 0.0, 0, true};
}

/// F == 1 everywhere, mask disabled; only meaningful for Kirchhoff tests.
inline SourceSpec unit_source() {
    SourceSpec s;
    s.id = "ones";
    s.evaluator = [](double, double, Vec3) { return 1.0; };
    s.mask = false;
    return s;
}

/// Time-compact radial bump: amplitude * pulse(t, tau) * window(r / rho).
inline SourceSpec bump_source(double amplitude = 1.0, double tau = 2.0, double rho = 1.0) {
    require(rho <= 1.0, "bump_source: spatial radius must stay inside |x| <= 1");
    SourceSpec s;
    s.id = "bump";
    s.evaluator = [=](double t, double r, Vec3) { return amplitude * profile::pulse(t, tau) * profile::window(r / rho); };
    s.spatial_radius = rho;
    s.time_support = tau;
    return s;
}

/// Bump modulated by a degree-limited angular polynomial a0 + a1 z + a2 x y.
inline SourceSpec angular_bump_source(double a0, double a1, double a2, double tau = 2.0, double rho = 1.0) {
    SourceSpec s = bump_source(1.0, tau, rho);
    s.id = "bump-angular";
    s.evaluator = [=](double t, double r, Vec3 w) {
        return profile::pulse(t, tau) * profile::window(r / rho) * (a0 + a1 * w.z + a2 * w.x * w.y);
    };
    s.angular_degree = (a2 != 0.0) ? 2 : (a1 != 0.0 ? 1 : 0);
    return s;
}

/// Source that fills the whole cone |x| <= t + 1 and decays in time.
inline SourceSpec cone_fill_source(double decay = 3.0, double amplitude = 1.0) {
    SourceSpec s;
    s.id = "cone-fill";
    s.evaluator = [=](double t, double r, Vec3) {
        return amplitude * std::exp(-t / decay) * profile::window(r / (t + 1.0));
    };
    return s;
}

/// Outgoing shell r in [t - 2w, t] with polynomial decay (1 + t)^{-power}.
inline SourceSpec shell_source(double power = 2.0, double width = 0.5) {
    SourceSpec s;
    s.id = "shell";
    s.evaluator = [=](double t, double r, Vec3) {
        return std::pow(1.0 + t, -power) * profile::window((r - t + width) / width);
    };
    return s;
}

/// Deterministic 20-member family mixing the four source shapes above.
inline SourceSpec source_family(int i) {
    require(i >= 0 && i < 20, "source_family: index must be in [0, 20)");
    SourceSpec s;
    const double q = i / 4;
    switch (i % 4) {
        case 0: s = bump_source(1.0 + 0.25 * q, 1.0 + 0.5 * q, 0.5 + 0.1 * q); break;
        case 1: s = cone_fill_source(2.0 + q, 1.0); break;
        case 2: s = shell_source(1.0 + 0.5 * q, 0.3 + 0.1 * q); break;
        default: s = angular_bump_source(1.0, 0.5 + 0.1 * q, (q >= 2) ? 0.7 : 0.0, 1.5 + 0.25 * q, 0.6 + 0.08 * q); break;
    }
    s.id = "family-" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    return s;
}

/// Catalogue lookup by id: zero, ones, bump, bump-angular, cone-fill, shell, family-NN.
inline SourceSpec source_by_id(const std::string& id) {
    if (id == "zero") return zero_source();
    if (id == "ones") return unit_source();
    if (id == "bump") return bump_source();
    if (id == "bump-angular") return angular_bump_source(1.0, 0.5, 0.7);
    if (id == "cone-fill") return cone_fill_source();
    if (id == "shell") return shell_source();
    if (id.rfind("family-", 0) == 0) return source_family(std::stoi(id.substr(7)));
    throw PreconditionError("unknown source id '" + id + "'");
}

/// Tabulated source: mode coefficients F_lm(t_k, r_j) on uniform grids, bilinear in (t, r).
inline SourceSpec tabulated_source(std::string id, int L, std::vector<double> times, double dr, int nr,
                                   std::vector<double> coeffs) {
    const std::size_t nm = static_cast<std::size_t>(mode_count(L));
    require(times.size() >= 2 && coeffs.size() == times.size() * nm * nr, "tabulated_source: table size mismatch");
    SourceSpec s;
    s.id = std::move(id);
    s.kind = SourceSpec::Kind::Tabulated;
    s.angular_degree = L;
    s.spatial_radius = nr * dr;
    s.evaluator = [=](double t, double r, Vec3 w) {
        const double dt = times[1] - times[0];
        const double ft = std::clamp((t - times[0]) / dt, 0.0, static_cast<double>(times.size() - 1));
        const std::size_t k0 = std::min(static_cast<std::size_t>(ft), times.size() - 2);
        const double at = ft - k0;
        const double fr = std::clamp(r / dr - 0.5, 0.0, nr - 1.0);
        const int j0 = std::min(static_cast<int>(fr), nr - 2 < 0 ? 0 : nr - 2);
        const double ar = fr - j0;
        const int j1 = std::min(j0 + 1, nr - 1);
        std::vector<double> y(nm);
        const double th = std::acos(std::clamp(w.z, -1.0, 1.0));
        const double ph = std::atan2(w.y, w.x);
        real_harmonics(L, th, ph, y);
        double v = 0.0;
        for (std::size_t idx = 0; idx < nm; ++idx) {
            auto at_ = [&](std::size_t k, int j) { return coeffs[(k * nm + idx) * nr + j]; };
            const double c = (1 - at) * ((1 - ar) * at_(k0, j0) + ar * at_(k0, j1)) +
                             at * ((1 - ar) * at_(k0 + 1, j0) + ar * at_(k0 + 1, j1));
            v += c * y[idx];
        }
        return v;
    };
    return s;
}

} // namespace wavecert
