#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wavecert/error.hpp"
#include "wavecert/exponents.hpp"
#include "wavecert/field.hpp"
#include "wavecert/grid.hpp"
#include "wavecert/norms.hpp"
#include "wavecert/solver.hpp"
#include "wavecert/sphere.hpp"

namespace wavecert {

/// Initial data (epsilon f, epsilon g) with f, g supported in the unit ball.
struct CauchyData {
    std::string id;
    std::function<double(double, Vec3)> f; ///< f(r, omega)
    std::function<double(double, Vec3)> g;
    double epsilon = 1e-3;
    int angular_degree = 0;                ///< f and g are polynomials of this degree in omega

    /// |f|, |g| <= 1e-14 for r >= 1 on a fixed probe set; throws DomainError otherwise.
    void certify() const {
        const SphereQuadrature quad(std::max(2, angular_degree));
        for (double r : {1.0, 1.0 + 1e-9, 1.01, 1.1, 1.5, 2.0, 5.0}) {
            for (std::size_t i = 0; i < quad.size(); ++i) {
                const Vec3 w = quad.unit(i);
                if (std::abs(f(r, w)) > 1e-14 || std::abs(g(r, w)) > 1e-14)
                    throw DomainError("CauchyData '" + id + "': data not supported in the unit ball (r = " + std::to_string(r) + ")");
            }
        }
    }
};

namespace profile {

/// (1 - r^2)^k on r < 1, zero outside.
inline double ball(double r, int k = 4) { return r < 1.0 ? std::pow(1.0 - r * r, k) : 0.0; }

} // namespace profile

/// f = (1 - r^2)^4, g = g_scale * f.
inline CauchyData bump_data(double epsilon, double g_scale = 0.0) {
    CauchyData d;
    d.id = "bump";
    d.epsilon = epsilon;
    d.f = [](double r, Vec3) { return profile::ball(r); };
    d.g = [g_scale](double r, Vec3) { return g_scale * profile::ball(r); };
    return d;
}

/// f = (1 - r^2)^4 (1 + z/2) with z = r omega_z, g = (1 - r^2)^4 (1 - x y).
inline CauchyData angular_data(double epsilon) {
    CauchyData d;
    d.id = "angular";
    d.epsilon = epsilon;
    d.angular_degree = 2;
    d.f = [](double r, Vec3 w) { return profile::ball(r) * (1.0 + 0.5 * r * w.z); };
    d.g = [](double r, Vec3 w) { return profile::ball(r) * (1.0 - r * r * w.x * w.y); };
    return d;
}

inline CauchyData data_by_id(const std::string& id, double epsilon) {
    if (id == "bump") return bump_data(epsilon);
    if (id == "bump-moving") return [&] {
        auto d = bump_data(epsilon, 1.0);
        d.id = "bump-moving";
        return d;
    }();
    if (id == "angular") return angular_data(epsilon);
    throw PreconditionError("unknown Cauchy data '" + id + "' (expected bump, bump-moving or angular)");
}

// ---------------------------------------------------------------------------
// Liouville transformation phi = (1 + t) Phi
// ---------------------------------------------------------------------------

enum class Direction { Forward, Inverse };

/// Data (f, g) of the damped problem to (f, f + g) of the transformed one, and back.
inline CauchyData liouville(const CauchyData& d, Direction dir) {
    CauchyData out = d;
    const auto f = d.f, g = d.g;
    if (dir == Direction::Forward) out.g = [f, g](double r, Vec3 w) { return f(r, w) + g(r, w); };
    else out.g = [f, g](double r, Vec3 w) { return g(r, w) - f(r, w); };
    return out;
}

/// Field values: forward multiplies slice k by (1 + t_k), inverse divides.
inline RadialModeField liouville(const RadialModeField& u, Direction dir) {
    RadialModeField out(u.degree(), u.nr(), u.dr());
    for (std::size_t k = 0; k < u.slices(); ++k) {
        const double t = u.time(k);
        const double c = (dir == Direction::Forward) ? (1.0 + t) : 1.0 / (1.0 + t);
        std::vector<double> row(u.slice(k).begin(), u.slice(k).end());
        for (double& x : row) x *= c;
        out.append_slice(t, row);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bootstrap functional
// ---------------------------------------------------------------------------

struct BootstrapOptions {
    double theta = 0.05;
    double q = 4.0;
};

/// Weighted norm whose smallness drives the iteration:
/// undamped: sup_r r^{1/2}(t+2+r)^{1/2}(t+2-r)^{1/p} ||phi||_{H^2(S^2)};
/// damped:   || r^{1/2-3theta/2}(t+2+r)^{(1-theta)/2}(t+2-r)^{(s-1+theta)/2+alpha} phi ||_{L^sigma_r W^{1,beta}(S^2)}
///           with s = 2 - 1/p, alpha = 3/(2p) - 1/2.
class BootstrapFunctional {
public:
    BootstrapFunctional(double p, Application app, int L, BootstrapOptions opt = {}) : tf_(nodal_transform(L)) {
        require(p > 1.0, "bootstrap_functional: p must exceed 1");
        if (app == Application::Undamped) {
            spec_ = {{0.5, 0.5, 1.0 / p}, std::numeric_limits<double>::infinity(), SphereNorm::H2, 2.0};
        } else {
            const auto rep = feasibility(p, Application::Damped);
            const double s = 2.0 - 1.0 / p, alpha = 1.5 / p - 0.5;
            if (!(alpha > 0.0))
                throw DomainError("bootstrap_functional: damped weights undefined at p = " + std::to_string(p) + ": " + rep.binding);
            require(opt.theta > 0.0 && opt.theta < 1.0 / p && opt.q >= 2.0, "bootstrap_functional: need 0 < theta < 1/p and q >= 2");
            const double beta = 1.0 / (opt.theta / opt.q + 0.5 * (1.0 - opt.theta));
            spec_ = {interpolated_weight(s, opt.theta, alpha), 2.0 / opt.theta, SphereNorm::W1beta, beta};
        }
        spec_.r_limit_offset = 1.0;
    }

    double operator()(const RadialModeField& u, std::size_t k) const { return mixed_norm_slice(u, k, spec_, tf_); }
    const MixedNormSpec& spec() const { return spec_; }

private:
    SphericalTransform tf_;
    MixedNormSpec spec_;
};

inline double bootstrap_functional(const RadialModeField& u, std::size_t k, double p, Application app, BootstrapOptions opt = {}) {
    return BootstrapFunctional(p, app, u.degree(), opt)(u, k);
}

// ---------------------------------------------------------------------------
// Evolution
// ---------------------------------------------------------------------------

enum class Outcome { GlobalToHorizon, Blowup };

inline std::string to_string(Outcome o) { return o == Outcome::GlobalToHorizon ? "global-to-horizon" : "blowup"; }

struct SemilinearOptions {
    double dr = 1.0 / 8.0;
    int L = 2;
    double cfl = 0.9;
    int slice_stride = 4;
    double threshold_factor = 1e6;      ///< blow-up when max |phi| exceeds this times the initial amplitude
    bool unit_damping_factor = false;   ///< code-path check: replace (1+t)^{-(p-1)} by 1
    bool keep_trajectory = false;
    BootstrapOptions bootstrap;
};

struct LifespanRecord {
    double p = 0.0;
    double epsilon = 0.0;
    bool damped = false;
    std::string data_id;
    Outcome outcome = Outcome::GlobalToHorizon;
    double T = 0.0;                  ///< horizon, or T* for blow-up
    double horizon = 0.0;
    double initial_amplitude = 0.0;
    double threshold = 0.0;
    Grid grid;
    int quadrature_degree = 0;
    std::vector<double> times;       ///< stored slices
    std::vector<double> Q;           ///< bootstrap functional at stored slices
    std::vector<double> amplitude;   ///< max nodal |phi| at stored slices
    double chain_rule_constant = 0.0;///< sup ||c|phi|^p||_{H^k} / (||phi||_inf^{p-1} ||phi||_{H^k}), k = 2 undamped, 1 damped
    std::optional<double> refined_T; ///< T from the refinement run, when requested
    std::optional<RadialModeField> trajectory;

    double Q_max() const { return Q.empty() ? 0.0 : *std::max_element(Q.begin(), Q.end()); }
    double Q_early(double t_window = 5.0) const {
        double m = 0.0;
        for (std::size_t i = 0; i < Q.size(); ++i)
            if (times[i] <= t_window + 1e-12) m = std::max(m, Q[i]);
        return m;
    }
    /// Q(t) <= 2 sup_{t' <= 5} Q(t') at every stored time.
    bool bounded_q(double factor = 2.0, double t_window = 5.0) const {
        const double e = Q_early(t_window);
        for (double q : Q)
            if (!(q <= factor * e * (1.0 + 1e-12))) return false;
        return true;
    }
    double Q_min() const { return Q.empty() ? 0.0 : *std::min_element(Q.begin(), Q.end()); }
    /// Final Q exceeds factor times the smallest stored Q (growth after the dispersive decay).
    bool q_grows(double factor = 2.0) const {
        if (Q.empty()) return false;
        return outcome == Outcome::Blowup || !(Q.back() <= factor * Q_min());
    }
    bool refinement_agrees(double tol = 0.1) const {
        if (!refined_T) return true;
        return std::abs(*refined_T - T) <= tol * std::max(std::abs(*refined_T), 1e-300);
    }
};

/// Outcome of a recorded amplitude series against a threshold.
struct BlowupDecision {
    Outcome outcome = Outcome::GlobalToHorizon;
    double T = 0.0;
};

inline BlowupDecision detect_blowup(const std::vector<double>& times, const std::vector<double>& amplitude, double threshold,
                                    double initial_amplitude) {
    require(times.size() == amplitude.size(), "detect_blowup: size mismatch");
    if (!(threshold > initial_amplitude)) throw PreconditionError("detect_blowup: threshold must exceed the initial amplitude");
    BlowupDecision d;
    d.T = times.empty() ? 0.0 : times.back();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(amplitude[i]) || amplitude[i] > threshold) {
            d.outcome = Outcome::Blowup;
            d.T = times[i];
            return d;
        }
    }
    return d;
}

/// Evolves phi_tt - Delta phi = c(t) |phi|^p with c = 1 (undamped) or (1+t)^{-(p-1)} (damped,
/// Liouville variables). Linear part per mode as in solve_linear; nonlinearity pointwise on
/// (r, omega) nodes and re-projected every step.
inline LifespanRecord evolve_semilinear(double p, const CauchyData& data, bool damped, double horizon,
                                        const SemilinearOptions& opt = {}) {
    require(p > 1.0, "evolve_semilinear: p must exceed 1");
    require(data.epsilon >= 0.0, "evolve_semilinear: epsilon must be non-negative");
    require(opt.L >= data.angular_degree, "evolve_semilinear: L must cover the angular degree of the data");
    require(opt.threshold_factor > 1.0, "evolve_semilinear: threshold factor must exceed 1");
    data.certify();
    const Grid grid = Grid::make(opt.dr, horizon, opt.L, opt.cfl);
    grid.validate();

    const CauchyData work = damped ? liouville(data, Direction::Forward) : data;
    const int L = opt.L, nr = grid.nr;
    const std::size_t nm = static_cast<std::size_t>(mode_count(L));
    const int qdeg = std::max({L, static_cast<int>(std::ceil(p * L)), data.angular_degree});
    const SphericalTransform tf(L, qdeg);
    const auto& quad = tf.quadrature();
    const std::size_t nn = tf.nodes();
    const Application app = damped ? Application::Damped : Application::Undamped;
    const BootstrapFunctional Qf(p, app, L, opt.bootstrap);

    LifespanRecord rec;
    rec.p = p;
    rec.epsilon = data.epsilon;
    rec.damped = damped;
    rec.data_id = data.id;
    rec.horizon = horizon;
    rec.grid = grid;
    rec.quadrature_degree = qdeg;

    // Initial data in modes.
    std::vector<double> u0(nm * nr, 0.0), ut0(nm * nr, 0.0), nodal(nn), coeff(nm);
    for (int j = 0; j < nr; ++j) {
        const double r = grid.r(j);
        if (r >= 1.0) break;
        for (std::size_t i = 0; i < nn; ++i) nodal[i] = data.epsilon * work.f(r, quad.unit(i));
        tf.project_into(nodal, coeff);
        for (std::size_t idx = 0; idx < nm; ++idx) u0[idx * nr + j] = coeff[idx];
        for (std::size_t i = 0; i < nn; ++i) nodal[i] = data.epsilon * work.g(r, quad.unit(i));
        tf.project_into(nodal, coeff);
        for (std::size_t idx = 0; idx < nm; ++idx) ut0[idx * nr + j] = coeff[idx];
    }

    auto factor = [&](double t) { return (damped && !opt.unit_damping_factor) ? std::pow(1.0 + t, -(p - 1.0)) : 1.0; };

    // Nonlinear source in modes from mode values u (mode-major); returns max nodal |phi|.
    std::vector<double> f(nm * nr, 0.0), power(nn);
    double chain = 0.0;
    auto nonlinearity = [&](const std::vector<double>& u, double t, bool measure_chain) {
        std::fill(f.begin(), f.end(), 0.0);
        const double c = factor(t);
        double amp = 0.0;
        const double reach = t + 1.0 + 2.0 * grid.dr;
        for (int j = 0; j < nr; ++j) {
            if (grid.r(j) > reach) break;
            for (std::size_t idx = 0; idx < nm; ++idx) coeff[idx] = u[idx * nr + j];
            tf.synthesize_into(coeff, nodal);
            double local = 0.0;
            for (std::size_t i = 0; i < nn; ++i) {
                const double a = std::abs(nodal[i]);
                if (!std::isfinite(a)) return std::numeric_limits<double>::infinity();
                local = std::max(local, a);
                power[i] = c * std::pow(a, p);
            }
            amp = std::max(amp, local);
            tf.project_into(power, coeff);
            for (std::size_t idx = 0; idx < nm; ++idx) f[idx * nr + j] = coeff[idx];
            if (measure_chain && local > 0.0) {
                std::vector<double> uc(nm);
                for (std::size_t idx = 0; idx < nm; ++idx) uc[idx] = u[idx * nr + j];
                const int k = damped ? 1 : 2;
                const double denom = std::pow(local, p - 1.0) * sobolev_sphere_norm(uc, k);
                if (denom > 0.0) chain = std::max(chain, sobolev_sphere_norm(coeff, k) / (c * denom));
            }
        }
        return amp;
    };

    std::vector<ModeStepper> steppers;
    steppers.reserve(nm);
    for (std::size_t idx = 0; idx < nm; ++idx) steppers.emplace_back(grid, mode_label(static_cast<int>(idx)).l);

    RadialModeField traj(L, nr, grid.dr);
    rec.initial_amplitude = nonlinearity(u0, 0.0, true);
    rec.threshold = rec.initial_amplitude > 0.0 ? opt.threshold_factor * rec.initial_amplitude
                                                : std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < nm; ++idx)
        steppers[idx].start(std::span<const double>(u0).subspan(idx * nr, nr), std::span<const double>(ut0).subspan(idx * nr, nr),
                            std::span<const double>(f).subspan(idx * nr, nr));
    traj.append_slice(0.0, u0);
    rec.times.push_back(0.0);
    rec.amplitude.push_back(rec.initial_amplitude);
    rec.Q.push_back(Qf(traj, 0));

    std::vector<double> u(nm * nr);
    for (int n = 1; n <= grid.nt; ++n) {
        const double t = grid.t(n);
        for (std::size_t idx = 0; idx < nm; ++idx) {
            const auto v = steppers[idx].v();
            for (int j = 0; j < nr; ++j) u[idx * nr + j] = v[j] / grid.r(j);
        }
        const bool record = (n % opt.slice_stride == 0) || n == grid.nt;
        const double amp = nonlinearity(u, t, record);
        if (!std::isfinite(amp) || amp > rec.threshold) {
            rec.outcome = Outcome::Blowup;
            rec.T = t;
            rec.times.push_back(t);
            rec.amplitude.push_back(amp);
            break;
        }
        if (record) {
            traj.append_slice(t, u);
            rec.times.push_back(t);
            rec.amplitude.push_back(amp);
            rec.Q.push_back(Qf(traj, traj.slices() - 1));
        }
        if (n == grid.nt) {
            rec.T = t;
            break;
        }
        for (std::size_t idx = 0; idx < nm; ++idx) steppers[idx].step(std::span<const double>(f).subspan(idx * nr, nr));
    }
    rec.chain_rule_constant = chain;
    if (opt.keep_trajectory) rec.trajectory = std::move(traj);
    return rec;
}

/// evolve_semilinear plus a rerun at half the grid spacing; a blow-up is confirmed when
/// the two T* agree within tol.
inline LifespanRecord evolve_with_refinement(double p, const CauchyData& data, bool damped, double horizon,
                                             SemilinearOptions opt = {}) {
    LifespanRecord rec = evolve_semilinear(p, data, damped, horizon, opt);
    opt.dr *= 0.5;
    opt.slice_stride *= 2;
    opt.keep_trajectory = false;
    const LifespanRecord fine = evolve_semilinear(p, data, damped, horizon, opt);
    rec.refined_T = fine.T;
    return rec;
}

struct SweepCell {
    double p = 0.0;
    double epsilon = 0.0;
    bool damped = false;
    std::optional<LifespanRecord> record;
    std::string error;
};

/// Every (p, epsilon) combination; failures are recorded and the sweep continues.
inline std::vector<SweepCell> lifespan_sweep(const std::vector<double>& ps, const std::vector<double>& eps, bool damped,
                                             double horizon, const std::string& data_id = "bump",
                                             const SemilinearOptions& opt = {}) {
    require(!ps.empty() && !eps.empty(), "lifespan_sweep: empty grid");
    std::vector<SweepCell> out;
    for (double p : ps) {
        for (double e : eps) {
            SweepCell c{p, e, damped, std::nullopt, {}};
            try {
                c.record = evolve_semilinear(p, data_by_id(data_id, e), damped, horizon, opt);
            } catch (const std::exception& ex) {
                c.error = ex.what();
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

/// T* nonincreasing in epsilon within each p row (global runs count as T = horizon).
inline bool lifespan_monotone(const std::vector<SweepCell>& cells) {
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const auto& a = cells[i - 1];
        const auto& b = cells[i];
        if (a.p != b.p || !a.record || !b.record || !(b.epsilon > a.epsilon)) continue;
        if (b.record->T > a.record->T * (1.0 + 1e-12)) return false;
    }
    return true;
}

} // namespace wavecert
