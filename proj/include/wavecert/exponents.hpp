#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wavecert/error.hpp"
#include "wavecert/quadrature.hpp"

namespace wavecert {

/// Positive root of (n-1) p^2 - (n+1) p - 2 = 0.
inline double strauss_exponent(int n) {
    if (n < 2) throw PreconditionError("strauss_exponent: dimension must be >= 2, got " + std::to_string(n));
    const double a = n - 1.0, b = -(n + 1.0), c = -2.0;
    const double disc = std::sqrt(b * b - 4.0 * a * c);
    // q = -(b - disc)/2 avoids cancellation; the positive root is q / a.
    const double q = -0.5 * (b - disc);
    return q / a;
}

inline double strauss_polynomial(int n, double p) { return (n - 1.0) * p * p - (n + 1.0) * p - 2.0; }

/// Exponent of the t-integrand (t+2)^e after the inner r-integration; the truncated integral
/// converges as T -> infinity exactly when e < -1.
inline double m_tail_exponent(double p, double delta) { return -1.0 + 2.0 * delta + (2.0 + 4.0 * p - 2.0 * p * p) / p; }

inline double n_tail_exponent(double p, double delta, double theta) {
    return -1.0 + 2.0 * delta - 2.0 * p * theta + (2.0 + 6.0 * p - 4.0 * p * p) / p;
}

struct IntegralOptions {
    int t_panels = 96;
    int r_panels = 24;
    int order = 8;
};

namespace detail {

/// int_0^{R} g(r) r^c dr for c > -1, with anchor - R >= 1 where g may vary on the scale of
/// (anchor - r). The lower half uses r = (R/2) y^{1/(c+1)}, which removes the endpoint power;
/// the upper half uses w = log(anchor - r).
inline double power_weighted(const std::function<double(double)>& g, double c, double R, double anchor,
                             const IntegralOptions& opt) {
    if (!(c > -1.0)) throw DomainError("integral diverges at r = 0: exponent " + std::to_string(c) + " <= -1");
    const double h = 0.5 * R;
    const double k = 1.0 / (c + 1.0);
    const double lower = std::pow(h, c + 1.0) / (c + 1.0) *
                         integrate_gl([&](double y) { return g(h * std::pow(y, k)); }, 0.0, 1.0, opt.r_panels, opt.order);
    const double upper = integrate_gl([&](double w) {
        const double z = std::exp(w);
        const double r = anchor - z;
        return g(r) * std::pow(r, c) * z;
    }, std::log(anchor - R), std::log(anchor - h), opt.r_panels, opt.order);
    return lower + upper;
}

/// int_0^T h(t) dt in the variable x = log(t + 2).
inline double log_time(const std::function<double(double)>& h, double T, const IntegralOptions& opt) {
    require(T > 0.0, "truncation T must be positive");
    return integrate_gl([&](double x) {
        const double e = std::exp(x);
        return h(e - 2.0) * e;
    }, std::log(2.0), std::log(T + 2.0), opt.t_panels, opt.order);
}

} // namespace detail

struct IntegralReport {
    double value = 0.0;         ///< truncated integral over [0, T]
    double T = 0.0;
    double tail_exponent = 0.0; ///< closed-form exponent of (t+2) after the r-integration
    bool converges() const { return tail_exponent < -1.0; }
};

/// Truncated M^2 = int_0^T int_0^{t+1} (t+2+r)^{1+2/p-p} (t+2-r)^{-1+2 delta} r^{2-p} dr dt.
inline IntegralReport m_integral(double p, double delta, double T, const IntegralOptions& opt = {}) {
    require(p > 1.0, "m_integral: p must exceed 1");
    require(delta > 0.0, "m_integral: delta must be positive");
    if (p >= 3.0) throw DomainError("m_integral: inner r-integral diverges for p >= 3 (r^{2-p} at the origin)");
    const double a = 1.0 + 2.0 / p - p, b = -1.0 + 2.0 * delta, c = 2.0 - p;
    IntegralReport rep;
    rep.T = T;
    rep.tail_exponent = m_tail_exponent(p, delta);
    rep.value = detail::log_time([&](double t) {
        return detail::power_weighted([&](double r) { return std::pow(t + 2.0 + r, a) * std::pow(t + 2.0 - r, b); }, c,
                                      t + 1.0, t + 2.0, opt);
    }, T, opt);
    return rep;
}

enum class NForm {
    Displayed,  ///< first line of the display, exponents exactly as printed
    Reduced,    ///< second line: (t+2)^{3+2/p-3p-p theta} (int (t+2-r)^{...} r^{2-(p-3p theta)/(1-p theta)} dr)^{1-p theta}
};

/// Exponent of r in the inner integral of either form.
inline double n_r_exponent(double p, double theta, NForm form) {
    const double k = 1.0 - p * theta;
    if (form == NForm::Displayed) return 2.0 - (0.5 - 1.5 * theta * 2.0 * p / k);
    return 2.0 - (p - 3.0 * p * theta) / k;
}

/// Large-t growth exponent of the t-integrand of the displayed first line, read off the printed
/// exponents: inner integral ~ t^{a k + c} when the (t+2-r) power is below -1.
inline double n_displayed_growth_exponent(double p, double delta, double theta) {
    const double k = 2.0 / (1.0 - p * theta);
    const double a = 1.5 + 1.0 / p - 1.5 * p - 0.5 * p * theta;
    const double b = -1.0 + 2.0 * delta - 0.5 * p * theta;
    const double c = n_r_exponent(p, theta, NForm::Displayed);
    const double inner = (b * k < -1.0) ? a * k + c : a * k + b * k + c + 1.0;
    return inner * (1.0 - p * theta);
}

struct NIntegralReport {
    double displayed = 0.0;         ///< first display line, verbatim
    double reduced = 0.0;           ///< second display line
    double T = 0.0;
    double tail_exponent = 0.0;     ///< closed form -1 + 2 delta - 2 p theta + (2+6p-4p^2)/p
    double displayed_growth = 0.0;  ///< growth exponent implied by the verbatim first line
    bool converges() const { return tail_exponent < -1.0; }
};

inline NIntegralReport n_integral(double p, double delta, double theta, double T, const IntegralOptions& opt = {}) {
    require(p > 1.0, "n_integral: p must exceed 1");
    require(delta > 0.0, "n_integral: delta must be positive");
    require(theta > 0.0 && theta < 1.0 / p, "n_integral: need 0 < theta < 1/p (sigma > 2p)");
    const double k = 1.0 - p * theta;
    NIntegralReport rep;
    rep.T = T;
    rep.tail_exponent = n_tail_exponent(p, delta, theta);
    rep.displayed_growth = n_displayed_growth_exponent(p, delta, theta);

    const double a1 = (1.5 + 1.0 / p - 1.5 * p - 0.5 * p * theta) * 2.0 / k;
    const double b1 = (-1.0 + 2.0 * delta - 0.5 * p * theta) * 2.0 / k;
    const double c1 = n_r_exponent(p, theta, NForm::Displayed);
    rep.displayed = detail::log_time([&](double t) {
        const double inner = detail::power_weighted(
            [&](double r) { return std::pow(t + 2.0 + r, a1) * std::pow(t + 2.0 - r, b1); }, c1, t + 1.0, t + 2.0, opt);
        return std::pow(inner, k);
    }, T, opt);

    const double a2 = 3.0 + 2.0 / p - 3.0 * p - p * theta;
    const double b2 = -1.0 + (2.0 * delta - 2.0 * p * theta) / k;
    const double c2 = n_r_exponent(p, theta, NForm::Reduced);
    rep.reduced = detail::log_time([&](double t) {
        const double inner =
            detail::power_weighted([&](double r) { return std::pow(t + 2.0 - r, b2); }, c2, t + 1.0, t + 2.0, opt);
        return std::pow(t + 2.0, a2) * std::pow(inner, k);
    }, T, opt);
    return rep;
}

/// Cauchy test in T: values at T0, 2 T0, ..., 2^K T0; successive increments shrink by about
/// 2^{e+1}, so the observed exponent e_obs = log2(I_K / I_{K-1}) - 1 decides convergence.
struct CauchyReport {
    std::vector<double> T;
    std::vector<double> values;
    std::vector<double> increments;
    double observed_exponent = 0.0;
    double predicted_exponent = 0.0;
    bool observed_converges() const { return observed_exponent < -1.0; }
    bool predicted_converges() const { return predicted_exponent < -1.0; }
    bool agrees() const { return observed_converges() == predicted_converges(); }
    /// Relative change of the last doubling.
    double last_relative_change() const {
        return values.empty() || values.back() == 0.0 ? 0.0 : increments.back() / values.back();
    }
};

inline CauchyReport cauchy_check(const std::function<double(double)>& value_at, double predicted_exponent, double T0 = 100.0,
                                 int doublings = 6) {
    require(doublings >= 2, "cauchy_check: need at least two doublings");
    CauchyReport c;
    c.predicted_exponent = predicted_exponent;
    double T = T0;
    for (int i = 0; i <= doublings; ++i, T *= 2.0) {
        c.T.push_back(T);
        c.values.push_back(value_at(T));
        if (i > 0) c.increments.push_back(c.values[i] - c.values[i - 1]);
    }
    const double i1 = c.increments[c.increments.size() - 2], i2 = c.increments.back();
    c.observed_exponent = std::log2(i2 / i1) - 1.0;
    return c;
}

// ---------------------------------------------------------------------------
// Feasibility of the exponent choices
// ---------------------------------------------------------------------------

enum class Application { Undamped, Damped };

inline Application application_from_string(const std::string& s) {
    if (s == "undamped") return Application::Undamped;
    if (s == "damped") return Application::Damped;
    throw PreconditionError("unknown application '" + s + "' (expected undamped or damped)");
}

inline std::string to_string(Application a) { return a == Application::Undamped ? "undamped" : "damped"; }

struct ExponentReport {
    Application application = Application::Undamped;
    double p = 0.0;
    int n = 3;                    ///< space dimension of the equation
    int critical_dimension = 3;   ///< p is compared with p_c(critical_dimension)
    double s = 0.0;
    double alpha = 0.0;
    double delta = 0.0;
    double theta = 0.0;
    double sigma = 0.0;
    double beta = 0.0;
    double q = 4.0;
    double T = 0.0;
    double integral_value = 0.0;  ///< truncated M^2 (undamped) or reduced N^2 (damped) at T
    double tail_exponent = 0.0;
    bool feasible = false;
    std::string binding;          ///< first violated constraint when infeasible
};

struct FeasibilityOptions {
    std::vector<double> ladder{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    double margin = 1e-9;
    double q = 4.0;
    double T = 0.0;               ///< > 0: also evaluate the truncated integral at T
};

namespace detail {

/// Name of the first violated constraint at (delta, theta), or empty when all hold.
inline std::string violated(Application app, double p, double delta, double theta, double margin) {
    if (!(p < 3.0)) return app == Application::Damped ? "alpha = 3/(2p) - 1/2 > 0 (p < 3)" : "r^{2-p} integrable (p < 3)";
    if (app == Application::Undamped) {
        const double s = 1.0 + 2.0 / p;
        if (!(s < 2.0 - margin)) return "s = 1 + 2/p < 2 (p > 2)";
        if (!(1.0 + 2.0 * delta <= s)) return "1 + 2 delta <= s";
        if (!(2.0 * delta + (2.0 + 4.0 * p - 2.0 * p * p) / p < -margin)) return "2 + 4p - 2p^2 < 0 (tail exponent < -1)";
        return {};
    }
    const double s = 2.0 - 1.0 / p;
    const double alpha = 1.5 / p - 0.5;
    if (!(alpha > margin)) return "alpha = 3/(2p) - 1/2 > 0 (p < 3)";
    if (!(1.0 + 2.0 * delta <= s)) return "1 + 2 delta <= s";
    if (!(theta < 1.0 / p - margin)) return "sigma = 2/theta > 2p";
    if (!(n_r_exponent(p, theta, NForm::Reduced) > -1.0 + margin)) return "inner r-integral converges";
    if (!(2.0 * delta - 2.0 * p * theta + (2.0 + 6.0 * p - 4.0 * p * p) / p < -margin))
        return "2 + 6p - 4p^2 < 0 (tail exponent < -1)";
    return {};
}

} // namespace detail

/// Searches the (delta, theta) ladder for the first pair such that every constraint holds
/// for that pair and for all smaller ladder values ("small enough").
inline ExponentReport feasibility(double p, Application app, const FeasibilityOptions& opt = {}) {
    require(p > 1.0, "feasibility: p must exceed 1");
    require(!opt.ladder.empty(), "feasibility: empty ladder");
    ExponentReport rep;
    rep.application = app;
    rep.p = p;
    rep.n = 3;
    rep.critical_dimension = (app == Application::Undamped) ? 3 : 5;
    rep.q = opt.q;
    rep.s = (app == Application::Undamped) ? 1.0 + 2.0 / p : 2.0 - 1.0 / p;
    rep.alpha = (app == Application::Undamped) ? 0.0 : 1.5 / p - 0.5;
    const auto& L = opt.ladder;
    const bool use_theta = app == Application::Damped;
    auto holds_below = [&](std::size_t i, std::size_t j) {
        for (std::size_t a = i; a < L.size(); ++a)
            for (std::size_t b = use_theta ? j : 0; b < (use_theta ? L.size() : 1); ++b)
                if (!detail::violated(app, p, L[a], use_theta ? L[b] : 0.0, opt.margin).empty()) return false;
        return true;
    };
    std::optional<std::pair<std::size_t, std::size_t>> found;
    for (std::size_t i = 0; i < L.size() && !found; ++i)
        for (std::size_t j = 0; j < (use_theta ? L.size() : 1) && !found; ++j)
            if (holds_below(i, j)) found = std::make_pair(i, j);
    if (found) {
        rep.feasible = true;
        rep.delta = L[found->first];
        rep.theta = use_theta ? L[found->second] : 0.0;
    } else {
        rep.feasible = false;
        rep.delta = L.back();
        rep.theta = use_theta ? L.back() : 0.0;
        rep.binding = detail::violated(app, p, rep.delta, rep.theta, opt.margin);
    }
    if (use_theta) {
        rep.sigma = 2.0 / rep.theta;
        rep.beta = 1.0 / (rep.theta / opt.q + 0.5 * (1.0 - rep.theta));
        rep.tail_exponent = n_tail_exponent(p, rep.delta, rep.theta);
    } else {
        rep.tail_exponent = m_tail_exponent(p, rep.delta);
    }
    if (opt.T > 0.0 && p < 3.0) {
        rep.T = opt.T;
        rep.integral_value = use_theta ? n_integral(p, rep.delta, rep.theta, opt.T).reduced : m_integral(p, rep.delta, opt.T).value;
    }
    return rep;
}

/// Bisection on the feasibility flag over [lo, hi]; requires infeasible at lo and feasible at hi.
inline double feasibility_threshold(Application app, double lo, double hi, double tol = 1e-9, const FeasibilityOptions& opt = {}) {
    require(lo < hi, "feasibility_threshold: need lo < hi");
    require(!feasibility(lo, app, opt).feasible && feasibility(hi, app, opt).feasible,
            "feasibility_threshold: the interval does not bracket a feasibility change");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (feasibility(mid, app, opt).feasible ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Parses "p0:p1:steps".
struct SweepRange {
    double p0 = 0.0, p1 = 0.0;
    int steps = 0;
};

inline SweepRange parse_sweep(const std::string& spec) {
    const auto a = spec.find(':');
    const auto b = spec.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) throw PreconditionError("sweep must look like p0:p1:steps, got '" + spec + "'");
    SweepRange r;
    try {
        r.p0 = std::stod(spec.substr(0, a));
        r.p1 = std::stod(spec.substr(a + 1, b - a - 1));
        r.steps = std::stoi(spec.substr(b + 1));
    } catch (const std::exception&) {
        throw PreconditionError("sweep must look like p0:p1:steps, got '" + spec + "'");
    }
    require(r.steps >= 1 && r.p0 > 1.0 && r.p1 >= r.p0, "sweep needs steps >= 1 and 1 < p0 <= p1");
    return r;
}

inline std::vector<ExponentReport> feasibility_sweep(const SweepRange& r, Application app, const FeasibilityOptions& opt = {}) {
    std::vector<ExponentReport> out;
    for (int i = 0; i <= r.steps; ++i) {
        const double p = (r.steps == 0) ? r.p0 : r.p0 + (r.p1 - r.p0) * i / r.steps;
        out.push_back(feasibility(p, app, opt));
    }
    return out;
}

} // namespace wavecert
