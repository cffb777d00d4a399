#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "wavecert/manufactured.hpp"
#include "wavecert/multiplier.hpp"
#include "wavecert/norms.hpp"

using namespace wavecert;

namespace {

using boost::math::quadrature::gauss_kronrod;

double gk(const std::function<double(double)>& f, double a, double b) {
    return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

/// Fields sampled exactly from the manufactured solution at the given times.
std::pair<RadialModeField, RadialModeField> sampled(const ManufacturedSolution& ms, int L, double dr, double r_max,
                                                    const std::vector<double>& times) {
    const int nr = static_cast<int>(std::lround(r_max / dr));
    RadialModeField u(L, nr, dr), ut(L, nr, dr);
    const std::size_t nm = static_cast<std::size_t>(mode_count(L));
    const std::size_t idx = static_cast<std::size_t>(mode_index(ms.l, ms.m));
    for (double t : times) {
        std::vector<double> a(nm * nr, 0.0), b(nm * nr, 0.0);
        for (int j = 0; j < nr; ++j) {
            const double r = (j + 0.5) * dr;
            a[idx * nr + j] = ms.u(t, r);
            b[idx * nr + j] = ms.ut(t, r);
        }
        u.append_slice(t, a);
        ut.append_slice(t, b);
    }
    return {std::move(u), std::move(ut)};
}

RadialProfile cosine_profile(double R) {
    return {[R](double r) { return r < R ? std::pow(std::cos(0.5 * std::numbers::pi * r / R), 3) : 0.0; },
            [R](double r) {
                if (r >= R) return 0.0;
                const double a = 0.5 * std::numbers::pi / R;
                return -3.0 * a * std::pow(std::cos(a * r), 2) * std::sin(a * r);
            },
            R};
}

} // namespace

TEST(WeightedEnergy, MatchesAnalyticIntegralsForManufacturedField) {
    const ManufacturedSolution ms{2, 1};
    const double t = 1.5, s = 1.5;
    auto [u, ut] = sampled(ms, 2, 1.0 / 512, 3.0, {t});
    const auto e = lhs_weighted_energy(slice_data(u, 0, &ut), s);
    const double ll = 6.0;
    auto B = [&](double r) { return std::pow(t + 2.0 - r, s); };
    const double grad = gk([&](double r) {
        const double a = ms.ut(t, r), b = ms.ur(t, r), c = ms.u(t, r);
        return B(r) * (a * a + b * b + ll * c * c / (r * r)) * r * r;
    }, 0.0, 1.0);
    const double phi = gk([&](double r) { return B(r) * ms.u(t, r) * ms.u(t, r); }, 0.0, 1.0);
    EXPECT_NEAR(e.grad / grad, 1.0, 1e-4);
    EXPECT_NEAR(e.phi_over_r / phi, 1.0, 1e-4);
    EXPECT_NEAR(e.angular / (ll * phi), 1.0, 1e-4);
}

TEST(WeightedEnergy, RejectsOffSliceTimeAndBadExponent) {
    const Grid g = Grid::make(1.0 / 16, 1.0, 0);
    const auto sol = solve_linear(bump_source(), g);
    EXPECT_THROW(lhs_weighted_energy(sol, 1.5, 0.5 * g.dt), PreconditionError);
    EXPECT_THROW(lhs_weighted_energy(sol, 2.0, 0.0), PreconditionError);
    EXPECT_NO_THROW(lhs_weighted_energy(sol, 1.5, g.t(g.nt)));
}

TEST(WeightedEnergy, DensityDominatesTwiceTheMinusWeightForm) {
    // Grid samples of A(phi_t+phi_r+phi/r)^2 + B(phi_t-phi_r-phi/r)^2 >= 2B(phi_t^2 + (phi_r+phi/r)^2).
    const auto src = bump_source();
    const Grid g = Grid::make(1.0 / 32, 3.0, 0);
    const auto sol = solve_linear(src, g, {8});
    for (std::size_t k = 1; k < sol.slices(); ++k) {
        const auto d = slice_data(sol.u, k, &sol.ut);
        for (int j = 0; j < weighted_extent(d); ++j) {
            const double r = d.r(j);
            const double vt = d.vt[0][j], vr = d.vr[0][j];
            const auto rr = rearrangement(vt / r, vr / r - d.u[0][j] / r, d.u[0][j], d.t, r, 1.5);
            EXPECT_TRUE(rr.bound_holds());
        }
    }
}

TEST(RhsWeightedSource, RadialBumpMatchesTwoDimensionalOracle) {
    const auto src = bump_source();
    const double s = 1.5, delta = 0.25, T = 3.0;
    const double v = rhs_weighted_source(src, s, delta, T);
    const double oracle = gk([&](double t) {
        const double R = std::min(src.support_radius(t), t + 2.0);
        if (!(R > 0.0)) return 0.0;
        return gk([&](double r) {
            const double f = src(t, r, Vec3{0, 0, 1});
            return 4.0 * std::numbers::pi * std::pow(t + 2.0 + r, s) * std::pow(t + 2.0 - r, 1.0 + 2.0 * delta) * f * f * r * r;
        }, 0.0, R);
    }, 0.0, 2.0);
    EXPECT_NEAR(v / std::sqrt(oracle), 1.0, 1e-4);
}

TEST(WeightedEnergy, ZeroAndRadialCases) {
    const Grid g = Grid::make(1.0 / 16, 2.0, 2);
    const auto z = solve_linear(zero_source(), g);
    const auto e0 = lhs_weighted_energy(z, 1.5, z.time(z.slices() - 1));
    EXPECT_EQ(e0.grad + e0.phi_over_r + e0.angular, 0.0);
    const auto b = solve_linear(bump_source(), g);
    const auto e1 = lhs_weighted_energy(b, 1.5, b.time(b.slices() - 1));
    EXPECT_GT(e1.grad, 0.0);
    EXPECT_EQ(e1.angular, 0.0);
}

TEST(RhsWeightedSource, DoublingSourceDoublesNorm) {
    const double a = rhs_weighted_source(bump_source(1.0), 1.5, 0.25, 3.0);
    const double b = rhs_weighted_source(bump_source(2.0), 1.5, 0.25, 3.0);
    EXPECT_NEAR(b, 2.0 * a, 1e-13 * b);
}

TEST(RhsWeightedSource, ZeroSourceAndBothSigns) {
    EXPECT_EQ(rhs_weighted_source(zero_source(), 1.5, 0.25, 3.0), 0.0);
    RhsOptions alt;
    alt.weight = SourceWeight::RMinusTwo;
    const auto src = angular_bump_source(1.0, 0.5, 0.7);
    const double a = rhs_weighted_source(src, 1.5, 0.25, 4.0);
    const double b = rhs_weighted_source(src, 1.5, 0.25, 4.0, 0.0, alt);
    EXPECT_GT(a, 0.0);
    EXPECT_GT(b, 0.0);
    EXPECT_NE(a, b);
    EXPECT_THROW(rhs_weighted_source(src, 1.5, 0.0, 4.0), PreconditionError);
}

TEST(LightconeFlux, OutgoingPulseLivesOnIncomingCones) {
    // phi = f(t - r) / r with f compactly supported: phi_t + phi_r + phi/r vanishes identically,
    // so the u = const flux is zero while the ubar = const flux carries the pulse.
    const double dr = 1.0 / 256;
    const int nr = static_cast<int>(8.0 / dr);
    auto f = [](double x) { return (x > 0.5 && x < 1.5) ? std::pow(std::sin(std::numbers::pi * (x - 0.5)), 4) : 0.0; };
    auto df = [](double x) {
        if (!(x > 0.5 && x < 1.5)) return 0.0;
        const double a = std::numbers::pi * (x - 0.5);
        return 4.0 * std::numbers::pi * std::pow(std::sin(a), 3) * std::cos(a);
    };
    Grid g = Grid::make(dr, 4.0, 0);
    LinearSolution sol{g, RadialModeField(0, nr, dr), RadialModeField(0, nr, dr), "pulse", 2, std::nullopt};
    const double c = std::sqrt(4.0 * std::numbers::pi);
    for (int k = 0; k <= 80; ++k) {
        const double t = 4.0 + 0.01 * k;
        std::vector<double> a(nr), b(nr);
        for (int j = 0; j < nr; ++j) {
            const double r = (j + 0.5) * dr;
            a[j] = c * f(r - t) / r; // incoming-free: depends on r - t, i.e. moves outwards
            b[j] = -c * df(r - t) / r;
        }
        sol.u.append_slice(t, a);
        sol.ut.append_slice(t, b);
    }
    const ConeTable tab(sol);
    const double out = lightcone_flux(tab, 1.5, Cone::Outgoing, 4.0 - 5.0);
    const double in = lightcone_flux(tab, 1.5, Cone::Incoming, 4.4 + 5.0);
    EXPECT_GT(in, 0.0);
    EXPECT_LE(out, 1e-3 * in);
    EXPECT_THROW(lightcone_flux(tab, 1.5, Cone::Incoming, 100.0), PreconditionError);
}

TEST(IntegratingCheck, SliceEnergyAndFluxesBoundedByWork) {
    for (const auto& src : {bump_source(), angular_bump_source(1.0, 0.5, 0.7), shell_source()}) {
        const Grid g = Grid::make(1.0 / 32, 5.0, src.angular_degree);
        const auto sol = solve_linear(src, g, {1});
        const auto chk = integrating_check(sol, src, 1.5, 32);
        EXPECT_GT(chk.work, 0.0) << src.id;
        EXPECT_TRUE(chk.holds()) << src.id << " E=" << chk.sup_slice_energy << " W=" << chk.work
                                 << " fo=" << chk.sup_flux_outgoing << " fi=" << chk.sup_flux_incoming;
    }
}

TEST(Hardy, MatchesTanhSinhOracle) {
    const auto p = cosine_profile(1.7);
    const double s = 1.5, t = 1.0;
    boost::math::quadrature::tanh_sinh<double> ts;
    auto B = [&](double r) { return std::pow(t + 2.0 - r, s); };
    const double lhs = ts.integrate([&](double r) { return B(r) * p.f(r) * p.f(r); }, 0.0, 1.7);
    const double rhs = ts.integrate([&](double r) {
        const double w = r * p.df(r) + p.f(r);
        return B(r) * w * w;
    }, 0.0, 1.7);
    EXPECT_NEAR(hardy_ratio(p, s, t, HardyVariant::Hardy2), lhs / rhs, 1e-10);
}

TEST(Hardy, QuadraticProfileAtTimeZero) {
    const RadialProfile p{[](double r) { return r < 1.0 ? r * (1.0 - r) : 0.0; },
                          [](double r) { return r < 1.0 ? 1.0 - 2.0 * r : 0.0; }, 1.0};
    auto B = [](double r) { return std::pow(2.0 - r, 1.5); };
    const double lhs = gk([&](double r) { return B(r) * r * r * (1.0 - r) * (1.0 - r); }, 0.0, 1.0);
    const double rhs = gk([&](double r) {
        const double w = (1.0 - 2.0 * r) + (1.0 - r);
        return B(r) * w * w * r * r;
    }, 0.0, 1.0);
    const double h2 = hardy_ratio(p, 1.5, 0.0, HardyVariant::Hardy2);
    EXPECT_NEAR(h2, lhs / rhs, 1e-12);
    EXPECT_LE(h2, 4.0);
    EXPECT_LE(hardy_ratio(p, 1.5, 0.0, HardyVariant::Hardy1), 2.0 + 2.0 * h2);
}

TEST(Hardy, BoundsHoldForRandomProfiles) {
    std::mt19937_64 rng(12345);
    double env2 = 0.0, env1 = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double t = 0.1 + 9.9 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const double s = 1.0 + 0.98 * std::uniform_real_distribution<double>(0.0, 1.0)(rng) + 0.01;
        const auto p = random_profile(rng, t);
        const double h2 = hardy_ratio(p, s, t, HardyVariant::Hardy2, 64);
        const double h1 = hardy_ratio(p, s, t, HardyVariant::Hardy1, 64);
        const double h3 = hardy_ratio(p, s, t, HardyVariant::Hardy3, 64);
        EXPECT_LE(h2, 4.0);
        EXPECT_LE(h1, 10.0);
        EXPECT_LE(h3, hardy3_proof_constant(s));
        env2 = std::max(env2, h2);
        env1 = std::max(env1, h1);
    }
    EXPECT_GT(env2, 0.0);
    EXPECT_GT(env1, 0.0);
}

TEST(Hardy, RefinementStableAndRejections) {
    std::mt19937_64 rng(7);
    const auto p = random_profile(rng, 2.0);
    for (auto v : {HardyVariant::Hardy2, HardyVariant::Hardy1, HardyVariant::Hardy3}) {
        const double a = hardy_ratio(p, 1.5, 2.0, v, 64), b = hardy_ratio(p, 1.5, 2.0, v, 128);
        EXPECT_NEAR(a, b, 1e-9 * b);
    }
    RadialProfile zero{[](double) { return 0.0; }, [](double) { return 0.0; }, 1.0};
    EXPECT_EQ(hardy_ratio(zero, 1.5, 1.0, HardyVariant::Hardy2), 0.0);
    EXPECT_THROW(hardy_ratio(cosine_profile(3.0), 1.5, 1.0, HardyVariant::Hardy2), PreconditionError);
    EXPECT_THROW(hardy_variant_from_string("hardy4"), PreconditionError);
}

TEST(TraceNorm, ShellProfilePeaksAtShellRadius) {
    const double dr = 1.0 / 64;
    const int nr = 256;
    RadialModeField u(1, nr, dr);
    std::vector<double> a(4 * nr, 0.0);
    const int jshell = 96;
    a[jshell] = 1.0;
    a[2 * nr + jshell] = 0.5;
    u.append_slice(2.0, a);
    const auto rep = trace_norm(slice_data(u, 0), 1.5);
    EXPECT_DOUBLE_EQ(rep.r_at_sup, u.radius(jshell));
    EXPECT_TRUE(rep.reduction_holds());
}

TEST(TraceNorm, ReductionAndStableConstantsOnSolutions) {
    for (const auto& src : {bump_source(), angular_bump_source(1.0, 0.5, 0.7), cone_fill_source()}) {
        double c[2] = {0.0, 0.0};
        for (int lev = 0; lev < 2; ++lev) {
            const Grid g = Grid::make(lev == 0 ? 1.0 / 32 : 1.0 / 64, 4.0, src.angular_degree);
            const auto sol = solve_linear(src, g, {4});
            for (std::size_t k = 1; k < sol.slices(); ++k) {
                const auto rep = trace_norm(slice_data(sol.u, k), 1.5);
                EXPECT_TRUE(rep.reduction_holds());
                c[lev] = std::max(c[lev], rep.constant());
            }
        }
        EXPECT_GT(c[1], 0.0);
        EXPECT_NEAR(c[0] / c[1], 1.0, 0.1) << src.id;
    }
}

TEST(TraceNorm, EachRegimeObeysItsExplicitBound) {
    for (const auto& src : {bump_source(), angular_bump_source(1.0, 0.5, 0.7), cone_fill_source(), shell_source()}) {
        const Grid g = Grid::make(1.0 / 64, 6.0, src.angular_degree);
        const auto sol = solve_linear(src, g, {4});
        double worst1 = 0.0, worst2 = 0.0;
        for (std::size_t k = 1; k < sol.slices(); ++k)
            for (double s : {1.2, 1.5, 1.8}) {
                const auto c = trace_case_check(slice_data(sol.u, k), s);
                worst1 = std::max(worst1, c.case1_ratio());
                worst2 = std::max(worst2, c.case2_ratio());
            }
        EXPECT_GT(worst1, 0.0) << src.id;
        EXPECT_GT(worst2, 0.0) << src.id;
        EXPECT_LE(worst1, 1.0) << src.id;
        EXPECT_LE(worst2, 1.0) << src.id;
    }
}

TEST(TraceNorm, RegimeBoundsForSampledShell) {
    // u = shell profile at one radius: both sides by hand.
    const double dr = 1.0 / 64, s = 1.5, t = 2.0;
    const int nr = 256, jshell = 100;
    RadialModeField u(0, nr, dr);
    std::vector<double> a(nr, 0.0);
    a[jshell] = 1.0;
    u.append_slice(t, a);
    const auto d = slice_data(u, 0);
    const auto c = trace_case_check(d, s);
    const double r = u.radius(jshell);
    ASSERT_LE(t, 3.0 * r - 2.0);
    EXPECT_NEAR(c.case2_lhs, r * r * std::pow(t + 2.0 - r, s - 1.0), 1e-14);
    EXPECT_NEAR(c.hardy3, std::sqrt(std::pow(t + 2.0 - r, s - 2.0) * r * r * dr), 1e-14);
    EXPECT_EQ(c.case1_lhs, 0.0);
}

TEST(MixedNorm, SigmaInfinityReproducesTraceNorm) {
    const auto src = angular_bump_source(1.0, 0.5, 0.7);
    const Grid g = Grid::make(1.0 / 32, 3.0, 2);
    const auto sol = solve_linear(src, g, {8});
    MixedNormSpec spec{trace_weight(1.5), std::numeric_limits<double>::infinity(), SphereNorm::Lbeta, 2.0, 2.0};
    const auto tf = nodal_transform(2);
    for (std::size_t k = 1; k < sol.slices(); ++k) {
        const double m = mixed_norm_slice(sol.u, k, spec, tf);
        const double tr = trace_norm(slice_data(sol.u, k), 1.5).trace;
        EXPECT_NEAR(m, tr, 1e-12 * std::max(1.0, tr));
    }
}

TEST(MixedNorm, RadialLsigmaAgainstOracle) {
    // Single l = 0 coefficient h(r): its L^2(S^2) norm is |h|.
    const double dr = 1.0 / 1024;
    const int nr = 2048;
    RadialModeField u(0, nr, dr);
    std::vector<double> a(nr);
    auto h = [](double r) { return r < 1.0 ? std::pow(1.0 - r * r, 3) : 0.0; };
    for (int j = 0; j < nr; ++j) a[j] = h(u.radius(j));
    u.append_slice(0.0, a);
    const MixedNormSpec spec{{0.0, 0.0, 0.0}, 3.0, SphereNorm::Lbeta, 2.0};
    const double oracle = std::cbrt(gk([&](double r) { return std::pow(h(r), 3) * r * r; }, 0.0, 1.0));
    EXPECT_NEAR(mixed_norm(u, spec), oracle, 1e-5 * oracle);
    EXPECT_THROW(mixed_norm(u, MixedNormSpec{{}, 1.5, SphereNorm::Lbeta, 2.0}), PreconditionError);
}

TEST(MixedNorm, HolderInterpolationHolds) {
    for (const auto& src : {angular_bump_source(1.0, 0.5, 0.7), shell_source()}) {
        const Grid g = Grid::make(1.0 / 32, 4.0, 2);
        const auto sol = solve_linear(src, g, {8});
        for (double theta : {0.05, 0.3, 0.5, 0.7}) {
            const auto c = interpolation_check(sol.u, 1.5, theta, 4.0);
            EXPECT_TRUE(c.holds()) << src.id << " theta=" << theta << " ratio=" << c.worst_slice_ratio;
            EXPECT_GT(c.middle, 0.0);
        }
    }
}

TEST(MixedNorm, ConstantOnSphereHasEqualH1AndL2Norms) {
    RadialModeField u(2, 64, 1.0 / 32);
    std::vector<double> a(9 * 64, 0.0);
    for (int j = 0; j < 32; ++j) a[j] = 1.0 - j / 32.0;
    u.append_slice(1.0, a);
    const double l2 = mixed_norm(u, {{}, 2.0, SphereNorm::Lbeta, 2.0});
    const double h1 = mixed_norm(u, {{}, 2.0, SphereNorm::H1, 2.0});
    EXPECT_NEAR(h1, l2, 1e-13 * l2);
    const auto c = interpolation_check(u, 1.5, 0.5, 4.0);
    EXPECT_DOUBLE_EQ(c.sigma, 4.0);
    EXPECT_NEAR(c.beta, 8.0 / 3.0, 1e-15);
}

TEST(EstimateRatio, StableAcrossRefinementAndVacuousForZero) {
    EstimateOptions opt;
    opt.t_max = 4.0;
    const auto rep = estimate_ratio(bump_source(), WeightParams{1.5, 0.25}, opt);
    EXPECT_EQ(rep.trend.size(), 2u);
    EXPECT_GT(rep.ratio, 0.0);
    EXPECT_TRUE(rep.stable());
    EXPECT_NEAR(rep.ratio, rep.lhs / rep.rhs, 1e-12 * rep.ratio);
    for (const auto& row : rep.slices) EXPECT_LE(row.lhs, rep.lhs);
    for (const auto& tp : rep.trend) EXPECT_TRUE(tp.integrating.holds());
    const auto z = estimate_ratio(zero_source(), WeightParams{1.5, 0.25}, opt);
    EXPECT_TRUE(z.vacuous);
    EXPECT_EQ(z.ratio, 0.0);
    EXPECT_THROW(estimate_ratio(bump_source(), WeightParams{2.5, 0.25}, opt), PreconditionError);
}

TEST(EstimateRatio, ShiftedVariantUsesInterpolatedNorm) {
    EstimateOptions opt;
    opt.t_max = 3.0;
    WeightParams wp{1.5, 0.25};
    wp.alpha = 0.25;
    const auto rep = estimate_ratio(angular_bump_source(1.0, 0.5, 0.7), wp, opt);
    EXPECT_EQ(rep.id, "weighted-estimate-shifted");
    EXPECT_GT(rep.ratio, 0.0);
    EXPECT_TRUE(rep.stable());
}
