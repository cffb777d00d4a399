#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "wavecert/error.hpp"
#include "wavecert/quadrature.hpp"

namespace wavecert {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
};

// Real spherical harmonics are stored flat with index l^2 + l + m, -l <= m <= l.
constexpr int mode_index(int l, int m) { return l * l + l + m; }
constexpr int mode_count(int L) { return (L + 1) * (L + 1); }

struct ModeLabel {
    int l;
    int m;
};

inline ModeLabel mode_label(int idx) {
    int l = static_cast<int>(std::sqrt(static_cast<double>(idx)));
    while (l * l > idx) --l;
    while ((l + 1) * (l + 1) <= idx) ++l;
    return {l, idx - l * l - l};
}

inline int degree_from_count(std::size_t count) {
    const int L = static_cast<int>(std::lround(std::sqrt(static_cast<double>(count)))) - 1;
    require(L >= 0 && static_cast<std::size_t>(mode_count(L)) == count,
            "coefficient count is not a perfect square (L+1)^2");
    return L;
}

/// Orthonormal real spherical harmonics Y_lm(theta, phi) for l <= L, plus optional
/// angular gradient components d/dtheta and (1/sin theta) d/dphi.
/// Uses normalized associated Legendre functions without the Condon–Shortley phase.
inline void real_harmonics(int L, double theta, double phi, std::span<double> y,
                           std::span<double> dtheta = {}, std::span<double> dphi_sin = {}) {
    const int n = mode_count(L);
    require(static_cast<int>(y.size()) >= n, "real_harmonics: output too small");
    const bool grad = !dtheta.empty();
    const double ct = std::cos(theta);
    const double st = std::sin(theta);

    // pbar[l][m], triangular, m <= l
    std::vector<double> pbar(static_cast<std::size_t>((L + 1) * (L + 1)), 0.0);
    auto P = [&](int l, int m) -> double& { return pbar[static_cast<std::size_t>(l * (L + 1) + m)]; };
    P(0, 0) = std::sqrt(1.0 / (4.0 * std::numbers::pi));
    for (int m = 1; m <= L; ++m) P(m, m) = std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * st * P(m - 1, m - 1);
    for (int m = 0; m < L; ++m) P(m + 1, m) = std::sqrt(2.0 * m + 3.0) * ct * P(m, m);
    for (int m = 0; m <= L; ++m) {
        for (int l = m + 2; l <= L; ++l) {
            const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
            const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
            P(l, m) = a * (ct * P(l - 1, m) - b * P(l - 2, m));
        }
    }

    const double sqrt2 = std::numbers::sqrt2;
    for (int l = 0; l <= L; ++l) {
        for (int m = 0; m <= l; ++m) {
            double dP = 0.0;
            if (grad) {
                // dP/dtheta = (l cos P_l^m - c_lm P_{l-1}^m) / sin
                const double c = (l > m) ? std::sqrt((2.0 * l + 1.0) * (static_cast<double>(l) * l - m * m) / (2.0 * l - 1.0))
                                         : 0.0;
                const double prev = (l > m) ? P(l - 1, m) : 0.0;
                dP = (l * ct * P(l, m) - c * prev) / st;
            }
            if (m == 0) {
                y[mode_index(l, 0)] = P(l, 0);
                if (grad) {
                    dtheta[mode_index(l, 0)] = dP;
                    dphi_sin[mode_index(l, 0)] = 0.0;
                }
                continue;
            }
            const double cm = std::cos(m * phi);
            const double sm = std::sin(m * phi);
            y[mode_index(l, m)] = sqrt2 * P(l, m) * cm;
            y[mode_index(l, -m)] = sqrt2 * P(l, m) * sm;
            if (grad) {
                dtheta[mode_index(l, m)] = sqrt2 * dP * cm;
                dtheta[mode_index(l, -m)] = sqrt2 * dP * sm;
                dphi_sin[mode_index(l, m)] = -m * sqrt2 * P(l, m) * sm / st;
                dphi_sin[mode_index(l, -m)] = m * sqrt2 * P(l, m) * cm / st;
            }
        }
    }
}

/// Gauss–Legendre (in cos theta) x uniform (in phi) product rule with
/// (Lq+1) x (2Lq+1) nodes; integrates band-limited products of degree <= 2Lq exactly.
class SphereQuadrature {
public:
    explicit SphereQuadrature(int degree) : degree_(degree) {
        require(degree >= 0, "SphereQuadrature: degree must be >= 0");
        const auto gl = gauss_legendre(degree + 1);
        const int nphi = 2 * degree + 1;
        const double dphi = 2.0 * std::numbers::pi / nphi;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double ct = gl.nodes[i];
            const double th = std::acos(ct);
            const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
            for (int k = 0; k < nphi; ++k) {
                const double ph = k * dphi;
                theta_.push_back(th);
                phi_.push_back(ph);
                weight_.push_back(gl.weights[i] * dphi);
                unit_.push_back({st * std::cos(ph), st * std::sin(ph), ct});
            }
        }
    }

    int degree() const { return degree_; }
    std::size_t size() const { return weight_.size(); }
    double theta(std::size_t i) const { return theta_[i]; }
    double phi(std::size_t i) const { return phi_[i]; }
    double weight(std::size_t i) const { return weight_[i]; }
    Vec3 unit(std::size_t i) const { return unit_[i]; }
    std::span<const double> weights() const { return weight_; }

    template <class F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += weight_[i] * f(unit_[i]);
        return s;
    }

private:
    int degree_;
    std::vector<double> theta_, phi_, weight_;
    std::vector<Vec3> unit_;
};

/// Analysis/synthesis between nodal values on a SphereQuadrature and real
/// spherical-harmonic coefficients up to band L. The quadrature degree may exceed L
/// (padding for pseudo-spectral products).
class SphericalTransform {
public:
    explicit SphericalTransform(int L, int quad_degree = -1)
        : L_(L), quad_(quad_degree < 0 ? L : quad_degree) {
        require(L >= 0, "SphericalTransform: L must be >= 0");
        require(quad_.degree() >= L, "SphericalTransform: quadrature degree below band limit");
        const std::size_t nm = modes();
        y_.resize(quad_.size() * nm);
        dth_.resize(quad_.size() * nm);
        dph_.resize(quad_.size() * nm);
        for (std::size_t i = 0; i < quad_.size(); ++i) {
            real_harmonics(L_, quad_.theta(i), quad_.phi(i), std::span(y_).subspan(i * nm, nm),
                           std::span(dth_).subspan(i * nm, nm), std::span(dph_).subspan(i * nm, nm));
        }
    }

    int degree() const { return L_; }
    std::size_t modes() const { return static_cast<std::size_t>(mode_count(L_)); }
    std::size_t nodes() const { return quad_.size(); }
    const SphereQuadrature& quadrature() const { return quad_; }
    double y(std::size_t node, std::size_t idx) const { return y_[node * modes() + idx]; }

    void project_into(std::span<const double> nodal, std::span<double> coeffs) const {
        require(nodal.size() == nodes(), "project: nodal sample count does not match quadrature");
        require(coeffs.size() == modes(), "project: coefficient count does not match band limit");
        std::fill(coeffs.begin(), coeffs.end(), 0.0);
        const std::size_t nm = modes();
        for (std::size_t i = 0; i < nodes(); ++i) {
            if (!std::isfinite(nodal[i])) throw NonFiniteError("project: non-finite nodal sample", i);
            const double wf = quad_.weight(i) * nodal[i];
            const double* row = &y_[i * nm];
            for (std::size_t k = 0; k < nm; ++k) coeffs[k] += wf * row[k];
        }
    }

    std::vector<double> project(std::span<const double> nodal) const {
        std::vector<double> c(modes());
        project_into(nodal, c);
        return c;
    }

    void synthesize_into(std::span<const double> coeffs, std::span<double> nodal) const {
        require(coeffs.size() == modes(), "synthesize: coefficient degree does not match transform");
        require(nodal.size() == nodes(), "synthesize: output size does not match quadrature");
        const std::size_t nm = modes();
        for (std::size_t i = 0; i < nodes(); ++i) {
            const double* row = &y_[i * nm];
            double s = 0.0;
            for (std::size_t k = 0; k < nm; ++k) s += coeffs[k] * row[k];
            nodal[i] = s;
        }
    }

    std::vector<double> synthesize(std::span<const double> coeffs) const {
        std::vector<double> f(nodes());
        synthesize_into(coeffs, f);
        return f;
    }

    /// |grad_{S^2} f|^2 at the nodes for a band-limited f.
    void gradient_sq_into(std::span<const double> coeffs, std::span<double> out) const {
        require(coeffs.size() == modes() && out.size() == nodes(), "gradient_sq: size mismatch");
        const std::size_t nm = modes();
        for (std::size_t i = 0; i < nodes(); ++i) {
            double gt = 0.0, gp = 0.0;
            for (std::size_t k = 0; k < nm; ++k) {
                gt += coeffs[k] * dth_[i * nm + k];
                gp += coeffs[k] * dph_[i * nm + k];
            }
            out[i] = gt * gt + gp * gp;
        }
    }

private:
    int L_;
    SphereQuadrature quad_;
    std::vector<double> y_, dth_, dph_;
};

/// Spectral H^k(S^2) norm: (sum (1 + l(l+1))^k c_lm^2)^{1/2}.
inline double sobolev_sphere_norm(std::span<const double> coeffs, int k) {
    require(k >= 0 && k <= 2, "sobolev_sphere_norm: k must be 0, 1 or 2");
    degree_from_count(coeffs.size());
    double s = 0.0;
    for (std::size_t idx = 0; idx < coeffs.size(); ++idx) {
        const int l = mode_label(static_cast<int>(idx)).l;
        s += std::pow(1.0 + l * (l + 1.0), k) * coeffs[idx] * coeffs[idx];
    }
    return std::sqrt(s);
}

/// Nodal L^beta(S^2) norm by quadrature; beta = +inf gives the nodal max.
inline double sphere_lp_norm(std::span<const double> nodal, const SphereQuadrature& quad, double beta) {
    require(nodal.size() == quad.size(), "sphere_lp_norm: size mismatch");
    if (std::isinf(beta)) {
        double m = 0.0;
        for (double v : nodal) m = std::max(m, std::abs(v));
        return m;
    }
    require(beta >= 1.0, "sphere_lp_norm: beta must be >= 1");
    double s = 0.0;
    for (std::size_t i = 0; i < nodal.size(); ++i) s += quad.weight(i) * std::pow(std::abs(nodal[i]), beta);
    return std::pow(s, 1.0 / beta);
}

} // namespace wavecert
