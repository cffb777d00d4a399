#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "wavecert/error.hpp"

namespace wavecert {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// (P_n(x), P_{n-1}(x)) by the three-term recurrence.
inline std::pair<double, double> legendre_pair(int n, double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return {p1, p0};
}

/// Gauss–Legendre rule with n points on [-1, 1] (exact for degree 2n-1).
/// Nodes are returned in increasing order.
inline QuadratureRule gauss_legendre(int n) {
    require(n >= 1, "gauss_legendre: need at least one node");
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            const auto [pn, pm] = legendre_pair(n, x);
            dp = n * (x * pn - pm) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const auto [pn, pm] = legendre_pair(n, x);
        dp = n * (x * pn - pm) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[n - 1 - i] = x;
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

/// Composite Gauss–Legendre integral of f over [a, b] with `panels` equal panels
/// of `order` points each.
template <class F>
double integrate_gl(F&& f, double a, double b, int panels, int order = 8) {
    if (!(b > a)) return 0.0;
    static thread_local int cached_order = -1;
    static thread_local QuadratureRule cached;
    if (cached_order != order) {
        cached = gauss_legendre(order);
        cached_order = order;
    }
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double mid = a + (k + 0.5) * h;
        double panel = 0.0;
        for (int i = 0; i < order; ++i) {
            panel += cached.weights[i] * f(mid + 0.5 * h * cached.nodes[i]);
        }
        total += 0.5 * h * panel;
    }
    return total;
}

/// Composite Simpson rule on an odd number of equally spaced samples.
inline double simpson(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    require(n >= 3 && n % 2 == 1, "simpson: need an odd number (>= 3) of samples");
    double s = f[0] + f[n - 1];
    for (std::size_t i = 1; i + 1 < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
    return s * h / 3.0;
}

/// Trapezoid rule on equally spaced samples.
inline double trapezoid(std::span<const double> f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

} // namespace wavecert
