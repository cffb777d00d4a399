#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "wavecert/source.hpp"
#include "wavecert/sphere.hpp"

namespace wavecert {

/// Closed-form u*(t, x) = h(t) r^l (1 - r^2)^k Y_lm(omega) with h(t) = t^3 e^{-t}.
/// Zero Cauchy data, supported in r <= 1, and F := box u* is returned as a SourceSpec.
struct ManufacturedSolution {
    int l = 0;
    int m = 0;
    int k = 6;

    static double h(double t) { return t * t * t * std::exp(-t); }
    static double h1(double t) { return (3.0 * t * t - t * t * t) * std::exp(-t); }
    static double h2(double t) { return (6.0 * t - 6.0 * t * t + t * t * t) * std::exp(-t); }

    // w(r) = r q(r) = r^{l+1} (1 - r^2)^k and its first two derivatives.
    double w(double r) const {
        if (r >= 1.0) return 0.0;
        return std::pow(r, l + 1) * std::pow(1.0 - r * r, k);
    }
    double w1(double r) const {
        if (r >= 1.0) return 0.0;
        const double a = l + 1.0;
        const double g = std::pow(1.0 - r * r, k);
        const double g1 = -2.0 * k * r * std::pow(1.0 - r * r, k - 1);
        return a * std::pow(r, a - 1) * g + std::pow(r, a) * g1;
    }
    /// w'' - l(l+1) w / r^2 (the a(a-1) r^{a-2} g term cancels exactly).
    double w_radial_operator(double r) const {
        if (r >= 1.0) return 0.0;
        const double a = l + 1.0;
        const double s = 1.0 - r * r;
        const double g1 = -2.0 * k * r * std::pow(s, k - 1);
        const double g2 = -2.0 * k * std::pow(s, k - 1) + 4.0 * k * (k - 1.0) * r * r * std::pow(s, k - 2);
        return 2.0 * a * std::pow(r, a - 1) * g1 + std::pow(r, a) * g2;
    }

    // Radial factors of u*, u*_t, u*_r (multiply by Y_lm).
    double u(double t, double r) const { return h(t) * w(r) / r; }
    double ut(double t, double r) const { return h1(t) * w(r) / r; }
    double ur(double t, double r) const { return h(t) * (w1(r) - w(r) / r) / r; }
    double v(double t, double r) const { return h(t) * w(r); }
    double vt(double t, double r) const { return h1(t) * w(r); }
    double vr(double t, double r) const { return h(t) * w1(r); }

    /// Radial factor of box u* = (h'' w - h (w'' - l(l+1) w / r^2)) / r.
    double source_radial(double t, double r) const {
        return (h2(t) * w(r) - h(t) * w_radial_operator(r)) / r;
    }

    double ylm(Vec3 omega) const {
        std::vector<double> y(static_cast<std::size_t>(mode_count(l)));
        const double th = std::acos(std::clamp(omega.z, -1.0, 1.0));
        const double ph = std::atan2(omega.y, omega.x);
        real_harmonics(l, th, ph, y);
        return y[mode_index(l, m)];
    }

    SourceSpec source() const {
        SourceSpec s;
        s.id = "manufactured-l" + std::to_string(l);
        const ManufacturedSolution self = *this;
        if (l == 0) {
            const double y00 = 1.0 / std::sqrt(4.0 * std::numbers::pi);
            s.evaluator = [self, y00](double t, double r, Vec3) { return self.source_radial(t, r) * y00; };
        } else {
            s.evaluator = [self](double t, double r, Vec3 w) { return self.source_radial(t, r) * self.ylm(w); };
        }
        s.spatial_radius = 1.0;
        s.angular_degree = l;
        return s;
    }
};

} // namespace wavecert
