#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavecert/error.hpp"
#include "wavecert/field.hpp"
#include "wavecert/grid.hpp"
#include "wavecert/source.hpp"
#include "wavecert/sphere.hpp"

namespace wavecert {

/// Location of the first non-finite sample of a run.
struct BlowupInfo {
    double t = 0.0;
    double r = 0.0;
    int mode = 0;
};

/// Leapfrog for v = r u_lm:  v_tt - v_rr + l(l+1) v / r^2 = r F_lm.
///
/// Cell-centred radii; the ghost at r = -dr/2 uses the parity of v, which is
/// (-1)^{l+1}. The centrifugal term is averaged over levels n+1 and n-1, so the
/// scheme stays stable at CFL 0.9 for every l and conserves the discrete energy
/// returned by energy() when F = 0. The outer ghost is v = 0.
class ModeStepper {
public:
    ModeStepper(const Grid& grid, int ell)
        : dr_(grid.dr), dt_(grid.dt), ell_(ell), nr_(grid.nr), ghost_sign_((ell % 2 == 0) ? -1.0 : 1.0),
          r_(grid.nr), pot_(grid.nr), vm_(grid.nr, 0.0), v_(grid.nr, 0.0), vp_(grid.nr, 0.0) {
        require(ell >= 0, "ModeStepper: negative degree");
        grid.validate();
        for (int j = 0; j < nr_; ++j) {
            r_[j] = grid.r(j);
            pot_[j] = ell * (ell + 1.0) / (r_[j] * r_[j]);
        }
    }

    int level() const { return level_; }
    double time() const { return level_ * dt_; }
    int degree() const { return ell_; }
    std::span<const double> v() const { return v_; }
    std::span<const double> v_prev() const { return vm_; }
    double radius(int j) const { return r_[j]; }

    /// Level 0 from (u0, ut0) and level 1 by a second-order Taylor step with source f0 = F(0, r).
    void start(std::span<const double> u0, std::span<const double> ut0, std::span<const double> f0) {
        std::vector<double> lap(nr_);
        for (int j = 0; j < nr_; ++j) vm_[j] = r_[j] * (u0.empty() ? 0.0 : u0[j]);
        apply_d2(vm_, lap);
        for (int j = 0; j < nr_; ++j) {
            const double vt = r_[j] * (ut0.empty() ? 0.0 : ut0[j]);
            const double acc = lap[j] - pot_[j] * vm_[j] + r_[j] * (f0.empty() ? 0.0 : f0[j]);
            v_[j] = vm_[j] + dt_ * vt + 0.5 * dt_ * dt_ * acc;
        }
        level_ = 1;
    }

    /// Advance from level n to n + 1; f holds F_lm(t_n, r_j).
    void step(std::span<const double> f) {
        std::vector<double>& lap = vp_;
        apply_d2(v_, lap);
        const double dt2 = dt_ * dt_;
        for (int j = 0; j < nr_; ++j) {
            const double a = 1.0 + 0.5 * dt2 * pot_[j];
            const double rhs = 2.0 * v_[j] + dt2 * (lap[j] + r_[j] * (f.empty() ? 0.0 : f[j]));
            lap[j] = rhs / a - vm_[j];
        }
        std::swap(vm_, v_);
        std::swap(v_, vp_);
        ++level_;
    }

    /// u = v / r at the current level.
    void u_into(std::span<double> out) const {
        for (int j = 0; j < nr_; ++j) out[j] = v_[j] / r_[j];
    }

    /// Discrete energy between the previous and current level; exactly conserved
    /// by step() when the source vanishes.
    double energy() const {
        std::vector<double> lap(nr_);
        apply_d2(v_, lap);
        double e = 0.0;
        for (int j = 0; j < nr_; ++j) {
            const double vt = (v_[j] - vm_[j]) / dt_;
            e += vt * vt - lap[j] * vm_[j] + 0.5 * pot_[j] * (v_[j] * v_[j] + vm_[j] * vm_[j]);
        }
        return e * dr_;
    }

    /// Plain energy sum (v_t^2 + v_r^2 + l(l+1) v^2 / r^2) dr using centred differences.
    double naive_energy(std::span<const double> v_next) const {
        double e = 0.0;
        for (int j = 0; j < nr_; ++j) {
            const double vt = (v_next[j] - vm_[j]) / (2.0 * dt_);
            const double left = (j == 0) ? ghost_sign_ * v_[0] : v_[j - 1];
            const double right = (j + 1 < nr_) ? v_[j + 1] : 0.0;
            const double vr = (right - left) / (2.0 * dr_);
            e += vt * vt + vr * vr + pot_[j] * v_[j] * v_[j];
        }
        return e * dr_;
    }

    double ghost_sign() const { return ghost_sign_; }

private:
    void apply_d2(std::span<const double> v, std::span<double> out) const {
        const double inv = 1.0 / (dr_ * dr_);
        for (int j = 0; j < nr_; ++j) {
            const double left = (j == 0) ? ghost_sign_ * v[0] : v[j - 1];
            const double right = (j + 1 < nr_) ? v[j + 1] : 0.0;
            out[j] = (right - 2.0 * v[j] + left) * inv;
        }
    }

    double dr_, dt_;
    int ell_, nr_;
    double ghost_sign_;
    std::vector<double> r_, pot_, vm_, v_, vp_;
    int level_ = 0;
};

/// Trajectory of a single (l, m) mode.
struct ModeTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> u;
    std::vector<double> energy; ///< discrete energy at each stored slice
    std::optional<BlowupInfo> blowup;
};

/// Evolves one mode from zero data. `source_at(n, out)` fills F_lm(t_n, r_j);
/// values outside r <= t + 1 are masked to zero.
template <class SourceAt>
ModeTrajectory evolve_mode(int ell, const Grid& grid, SourceAt&& source_at, int stride = 1) {
    grid.validate();
    require(stride >= 1, "evolve_mode: stride must be >= 1");
    ModeStepper st(grid, ell);
    std::vector<double> f(grid.nr), u(grid.nr);
    auto fill = [&](int n) {
        source_at(n, std::span<double>(f));
        const double t = grid.t(n);
        for (int j = 0; j < grid.nr; ++j)
            if (grid.r(j) > t + 1.0) f[j] = 0.0;
    };
    ModeTrajectory traj;
    traj.times.push_back(0.0);
    traj.u.emplace_back(grid.nr, 0.0);
    traj.energy.push_back(0.0);
    fill(0);
    st.start({}, {}, f);
    for (int n = 1; n <= grid.nt; ++n) {
        if (n % stride == 0 || n == grid.nt) {
            st.u_into(u);
            for (int j = 0; j < grid.nr; ++j) {
                if (!std::isfinite(u[j])) {
                    traj.blowup = BlowupInfo{grid.t(n), grid.r(j), ell};
                    return traj;
                }
            }
            traj.times.push_back(grid.t(n));
            traj.u.push_back(u);
            traj.energy.push_back(st.energy());
        }
        if (n == grid.nt) break;
        fill(n);
        st.step(f);
    }
    return traj;
}

/// Cubic Lagrange interpolation of v = r u at radius r from cell-centred u samples,
/// with parity ghosts at the origin and zeros past the outer edge.
inline double interpolate_v(std::span<const double> u, double dr, int ell, double r) {
    const int nr = static_cast<int>(u.size());
    const double sign = (ell % 2 == 0) ? -1.0 : 1.0;
    auto v_at = [&](int j) -> double {
        if (j < 0) {
            const int m = -j - 1;
            return (m < nr) ? sign * u[m] * (m + 0.5) * dr : 0.0;
        }
        return (j < nr) ? u[j] * (j + 0.5) * dr : 0.0;
    };
    const double x = r / dr - 0.5;
    const int j1 = static_cast<int>(std::floor(x));
    const double s = x - j1;
    const double v0 = v_at(j1 - 1), v1 = v_at(j1), v2 = v_at(j1 + 1), v3 = v_at(j1 + 2);
    return v0 * (-s * (s - 1.0) * (s - 2.0) / 6.0) + v1 * ((s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0) +
           v2 * (-(s + 1.0) * s * (s - 2.0) / 2.0) + v3 * ((s + 1.0) * s * (s - 1.0) / 6.0);
}

/// Solution of the linear problem with zero data: u_lm and d/dt u_lm at stored slices.
struct LinearSolution {
    Grid grid;
    RadialModeField u;
    RadialModeField ut;
    std::string source_id;
    int scheme_order = 2;
    std::optional<BlowupInfo> blowup;

    int degree() const { return grid.L; }
    std::size_t slices() const { return u.slices(); }
    double time(std::size_t k) const { return u.time(k); }

    /// u_lm at radius r (interpolated) on slice k.
    double mode_value(std::size_t k, std::size_t idx, double r) const {
        if (r <= 0.0) return origin_value(k, idx);
        const int ell = mode_label(static_cast<int>(idx)).l;
        return interpolate_v(u.mode(k, idx), grid.dr, ell, r) / r;
    }

    double mode_time_derivative(std::size_t k, std::size_t idx, double r) const {
        const int ell = mode_label(static_cast<int>(idx)).l;
        if (r <= 0.0) return 0.0;
        return interpolate_v(ut.mode(k, idx), grid.dr, ell, r) / r;
    }

    /// r -> 0 limit: zero for l >= 1, even quadratic extrapolation for l = 0.
    double origin_value(std::size_t k, std::size_t idx) const {
        if (idx != 0) return 0.0;
        const auto row = u.mode(k, 0);
        return (9.0 * row[0] - row[1]) / 8.0;
    }

    /// phi(t, r omega) on a stored slice, or cubic Hermite in t between slices using u and u_t.
    double value(double t, double r, Vec3 omega) const {
        const std::size_t nm = u.modes();
        std::vector<double> y(nm);
        const double th = std::acos(std::clamp(omega.z, -1.0, 1.0));
        const double ph = std::atan2(omega.y, omega.x);
        real_harmonics(grid.L, th, ph, y);
        auto at_slice = [&](std::size_t k, bool derivative) {
            double s = 0.0;
            for (std::size_t idx = 0; idx < nm; ++idx) {
                if (y[idx] == 0.0) continue;
                s += (derivative ? mode_time_derivative(k, idx, r) : mode_value(k, idx, r)) * y[idx];
            }
            return s;
        };
        const auto& ts = u.times();
        require(!ts.empty() && t >= ts.front() - 1e-12 && t <= ts.back() + 1e-12,
                "LinearSolution::value: time outside stored slices");
        auto it = std::lower_bound(ts.begin(), ts.end(), t - 1e-12);
        const std::size_t k1 = static_cast<std::size_t>(it - ts.begin());
        if (std::abs(ts[k1] - t) <= 1e-9 || k1 == 0) return at_slice(k1, false);
        const std::size_t k0 = k1 - 1;
        const double h = ts[k1] - ts[k0];
        const double a = (t - ts[k0]) / h;
        const double h00 = (1.0 + 2.0 * a) * (1.0 - a) * (1.0 - a), h10 = a * (1.0 - a) * (1.0 - a);
        const double h01 = a * a * (3.0 - 2.0 * a), h11 = a * a * (a - 1.0);
        return h00 * at_slice(k0, false) + h10 * h * at_slice(k0, true) + h01 * at_slice(k1, false) +
               h11 * h * at_slice(k1, true);
    }
};

struct SolveOptions {
    int slice_stride = 1;
};

/// Quadrature degree that projects a degree-d angular function onto band L exactly.
inline int projection_degree(int L, int d) { return std::max(L, (L + d + 1) / 2); }

/// Projects F(t, r_j, .) onto modes for all r_j inside the support; out is mode-major.
inline void project_source(const SourceSpec& source, const Grid& grid, const SphericalTransform& tf, double t,
                           std::vector<double>& out, std::vector<double>& nodal) {
    const std::size_t nm = tf.modes();
    std::fill(out.begin(), out.end(), 0.0);
    if (!source.active(t) || source.is_zero()) return;
    const double rs = source.support_radius(t);
    const auto& quad = tf.quadrature();
    std::vector<double> c(nm);
    const double y00 = std::sqrt(4.0 * std::numbers::pi);
    for (int j = 0; j < grid.nr; ++j) {
        const double r = grid.r(j);
        if (r > rs) break;
        if (source.angular_degree == 0) {
            out[j] = source(t, r, Vec3{0.0, 0.0, 1.0}) * y00;
            continue;
        }
        for (std::size_t i = 0; i < quad.size(); ++i) nodal[i] = source(t, r, quad.unit(i));
        tf.project_into(nodal, c);
        for (std::size_t idx = 0; idx < nm; ++idx) out[idx * grid.nr + j] = c[idx];
    }
}

/// Solves box phi = F with zero data by evolving every (l, m) mode up to grid.L.
inline LinearSolution solve_linear(const SourceSpec& source, const Grid& grid, SolveOptions opt = {}) {
    grid.validate();
    require(opt.slice_stride >= 1, "solve_linear: slice stride must be >= 1");
    const std::size_t nm = static_cast<std::size_t>(mode_count(grid.L));
    const int nr = grid.nr;
    SphericalTransform tf(grid.L, projection_degree(grid.L, source.angular_degree));
    std::vector<double> nodal(tf.nodes());

    std::vector<ModeStepper> steppers;
    steppers.reserve(nm);
    for (std::size_t idx = 0; idx < nm; ++idx) steppers.emplace_back(grid, mode_label(static_cast<int>(idx)).l);

    LinearSolution sol{grid, RadialModeField(grid.L, nr, grid.dr), RadialModeField(grid.L, nr, grid.dr), source.id, 2, std::nullopt};
    std::vector<double> f(nm * nr), slice_u(nm * nr), slice_ut(nm * nr, 0.0);

    project_source(source, grid, tf, 0.0, f, nodal);
    for (std::size_t idx = 0; idx < nm; ++idx)
        steppers[idx].start({}, {}, std::span<const double>(f).subspan(idx * nr, nr));
    sol.u.append_slice(0.0, std::vector<double>(nm * nr, 0.0));
    sol.ut.append_slice(0.0, std::vector<double>(nm * nr, 0.0));

    // Steppers sit at level n; slice n is recorded once level n + 1 exists so that
    // u_t can use the centred difference.
    std::vector<double> vprev(nm * nr);
    for (int n = 1; n <= grid.nt; ++n) {
        const bool record = (n % opt.slice_stride == 0) || n == grid.nt;
        if (record) {
            for (std::size_t idx = 0; idx < nm; ++idx) {
                const auto v = steppers[idx].v();
                const auto vm = steppers[idx].v_prev();
                std::copy(vm.begin(), vm.end(), vprev.begin() + idx * nr);
                for (int j = 0; j < nr; ++j) slice_u[idx * nr + j] = v[j] / grid.r(j);
            }
        }
        project_source(source, grid, tf, grid.t(n), f, nodal);
        for (std::size_t idx = 0; idx < nm; ++idx) steppers[idx].step(std::span<const double>(f).subspan(idx * nr, nr));
        if (record) {
            for (std::size_t idx = 0; idx < nm; ++idx) {
                const auto vp = steppers[idx].v();
                for (int j = 0; j < nr; ++j) {
                    const double val = slice_u[idx * nr + j];
                    if (!std::isfinite(val)) {
                        sol.blowup = BlowupInfo{grid.t(n), grid.r(j), static_cast<int>(idx)};
                        return sol;
                    }
                    slice_ut[idx * nr + j] = (vp[j] - vprev[idx * nr + j]) / (2.0 * grid.dt * grid.r(j));
                }
            }
            sol.u.append_slice(grid.t(n), slice_u);
            sol.ut.append_slice(grid.t(n), slice_ut);
        }
    }
    return sol;
}

} // namespace wavecert
