#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "wavecert/semilinear.hpp"

using namespace wavecert;

namespace {

struct OracleRun {
    double T = 0.0;
    bool blowup = false;
    double final_amplitude = 0.0;
};

/// Vertex-centred leapfrog for v = r u with v(0) = 0: v_tt = v_rr + c(t) r |v/r|^p,
/// radial data u = eps f(r), u_t = eps g(r).
OracleRun radial_oracle(double p, double eps, double g_scale, double horizon, double h, double threshold, bool damped = false) {
    const double dt = 0.5 * h;
    const int nt = static_cast<int>(std::ceil(horizon / dt));
    const int n = static_cast<int>(std::ceil((horizon + 4.0) / h));
    std::vector<double> vm(n + 1, 0.0), v(n + 1, 0.0), vp(n + 1, 0.0);
    auto f0 = [](double r) { return r < 1.0 ? std::pow(1.0 - r * r, 4) : 0.0; };
    auto c = [&](double t) { return damped ? std::pow(1.0 + t, 1.0 - p) : 1.0; };
    auto force = [&](const std::vector<double>& w, int j, double t) {
        const double r = j * h;
        return c(t) * r * std::pow(std::abs(w[j] / r), p);
    };
    for (int j = 1; j < n; ++j) {
        const double r = j * h;
        vm[j] = r * eps * f0(r);
    }
    for (int j = 1; j < n; ++j) {
        const double r = j * h;
        const double vt = r * eps * g_scale * f0(r) + (damped ? r * eps * f0(r) : 0.0);
        const double lap = (vm[j + 1] - 2.0 * vm[j] + vm[j - 1]) / (h * h);
        v[j] = vm[j] + dt * vt + 0.5 * dt * dt * (lap + force(vm, j, 0.0));
    }
    OracleRun out;
    for (int k = 1; k <= nt; ++k) {
        const double t = k * dt;
        double amp = 0.0;
        for (int j = 1; j < n; ++j) amp = std::max(amp, std::abs(v[j] / (j * h)));
        out.final_amplitude = amp;
        if (!std::isfinite(amp) || amp > threshold) {
            out.blowup = true;
            out.T = t;
            return out;
        }
        if (k == nt) break;
        for (int j = 1; j < n; ++j)
            vp[j] = 2.0 * v[j] - vm[j] + dt * dt * ((v[j + 1] - 2.0 * v[j] + v[j - 1]) / (h * h) + force(v, j, t));
        std::swap(vm, v);
        std::swap(v, vp);
    }
    out.T = nt * dt;
    return out;
}

} // namespace

TEST(CauchyData, SupportCertificate) {
    EXPECT_NO_THROW(bump_data(1.0).certify());
    EXPECT_NO_THROW(angular_data(1.0).certify());
    CauchyData wide = bump_data(1.0);
    wide.f = [](double r, Vec3) { return std::exp(-r * r); };
    EXPECT_THROW(wide.certify(), DomainError);
    EXPECT_THROW(data_by_id("gaussian", 1.0), PreconditionError);
}

TEST(Liouville, DataMapAndRoundTrip) {
    const CauchyData d = angular_data(0.5);
    const CauchyData fwd = liouville(d, Direction::Forward);
    const CauchyData back = liouville(fwd, Direction::Inverse);
    for (double r : {0.0, 0.2, 0.7, 0.99}) {
        const Vec3 w{0.6, 0.0, 0.8};
        EXPECT_DOUBLE_EQ(fwd.g(r, w), d.f(r, w) + d.g(r, w));
        EXPECT_NEAR(back.g(r, w), d.g(r, w), 1e-14);
        EXPECT_DOUBLE_EQ(back.f(r, w), d.f(r, w));
    }
    // (f, 0) maps to velocity f.
    const CauchyData still = liouville(bump_data(1.0), Direction::Forward);
    EXPECT_DOUBLE_EQ(still.g(0.3, {0, 0, 1}), profile::ball(0.3));
}

TEST(Liouville, FieldRoundTripAndZero) {
    RadialModeField u(1, 8, 0.25), zero(1, 8, 0.25);
    for (int k = 0; k < 3; ++k) {
        std::vector<double> row(4 * 8), z(4 * 8, 0.0);
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = std::sin(1.0 + i + 7.0 * k);
        u.append_slice(0.5 * k, row);
        zero.append_slice(0.5 * k, z);
    }
    const auto fwd = liouville(u, Direction::Forward);
    const auto back = liouville(fwd, Direction::Inverse);
    for (std::size_t k = 0; k < u.slices(); ++k)
        for (std::size_t i = 0; i < u.slice(k).size(); ++i) {
            EXPECT_NEAR(back.slice(k)[i], u.slice(k)[i], 1e-14);
            EXPECT_DOUBLE_EQ(fwd.slice(k)[i], (1.0 + 0.5 * k) * u.slice(k)[i]);
        }
    const auto z = liouville(zero, Direction::Forward);
    for (double x : z.slice(2)) EXPECT_EQ(x, 0.0);
}

TEST(Evolve, ZeroDataStaysZero) {
    for (bool damped : {false, true}) {
        const auto rec = evolve_semilinear(2.0, bump_data(0.0), damped, 5.0);
        EXPECT_EQ(rec.outcome, Outcome::GlobalToHorizon);
        EXPECT_DOUBLE_EQ(rec.T, 5.0);
        for (double q : rec.Q) EXPECT_EQ(q, 0.0);
        for (double a : rec.amplitude) EXPECT_EQ(a, 0.0);
        EXPECT_TRUE(std::isinf(rec.threshold));
    }
}

TEST(Evolve, BlowupTimeMatchesIndependentRadialScheme) {
    SemilinearOptions opt;
    opt.dr = 1.0 / 16.0;
    const auto rec = evolve_semilinear(2.0, bump_data(12.0), false, 12.0, opt);
    ASSERT_EQ(rec.outcome, Outcome::Blowup);
    const auto ref = radial_oracle(2.0, 12.0, 0.0, 12.0, 1.0 / 64.0, rec.threshold);
    ASSERT_TRUE(ref.blowup);
    EXPECT_NEAR(rec.T / ref.T, 1.0, 0.03) << rec.T << " vs " << ref.T;
}

TEST(Evolve, SmallDataAmplitudeMatchesIndependentRadialScheme) {
    SemilinearOptions opt;
    opt.dr = 1.0 / 32.0;
    for (bool damped : {false, true}) {
        const auto rec = evolve_semilinear(1.6, bump_data(2.0), damped, 6.0, opt);
        const auto ref = radial_oracle(1.6, 2.0, 0.0, 6.0, 1.0 / 128.0, std::numeric_limits<double>::infinity(), damped);
        // The amplitude is reported in the evolved variable (Liouville-transformed when damped).
        EXPECT_NEAR(rec.amplitude.back() / ref.final_amplitude, 1.0, 0.03) << damped;
    }
}

TEST(Evolve, ForcedUnitFactorReproducesUndampedRun) {
    SemilinearOptions opt;
    opt.keep_trajectory = true;
    opt.unit_damping_factor = true;
    const CauchyData d = angular_data(0.8);
    const auto damped = evolve_semilinear(2.0, d, true, 6.0, opt);
    opt.unit_damping_factor = false;
    const auto plain = evolve_semilinear(2.0, liouville(d, Direction::Forward), false, 6.0, opt);
    ASSERT_EQ(damped.trajectory->slices(), plain.trajectory->slices());
    for (std::size_t k = 0; k < plain.trajectory->slices(); ++k)
        for (std::size_t i = 0; i < plain.trajectory->slice(k).size(); ++i)
            ASSERT_EQ(damped.trajectory->slice(k)[i], plain.trajectory->slice(k)[i]);
    EXPECT_EQ(damped.amplitude, plain.amplitude);
}

TEST(Evolve, RejectsBadArguments) {
    EXPECT_THROW(evolve_semilinear(1.0, bump_data(1.0), false, 5.0), PreconditionError);
    SemilinearOptions opt;
    opt.cfl = 1.2;
    EXPECT_THROW(evolve_semilinear(2.0, bump_data(1.0), false, 5.0, opt), PreconditionError);
    opt = {};
    opt.L = 1;
    EXPECT_THROW(evolve_semilinear(2.0, angular_data(1.0), false, 5.0, opt), PreconditionError);
    EXPECT_THROW(evolve_semilinear(3.0, bump_data(1.0), true, 5.0), DomainError);
}

TEST(Bootstrap, ZeroHomogeneityAndWeights) {
    SemilinearOptions opt;
    opt.keep_trajectory = true;
    const auto rec = evolve_semilinear(2.5, angular_data(1e-3), false, 4.0, opt);
    RadialModeField u = *rec.trajectory;
    const std::size_t k = u.slices() - 1;
    const double q = bootstrap_functional(u, k, 2.5, Application::Undamped);
    EXPECT_NEAR(q, rec.Q.back(), 1e-15 * q);
    u.scale(2.0);
    EXPECT_NEAR(bootstrap_functional(u, k, 2.5, Application::Undamped), 2.0 * q, 1e-13 * q);
    u.scale(0.0);
    EXPECT_EQ(bootstrap_functional(u, k, 2.5, Application::Undamped), 0.0);

    const BootstrapFunctional und(2.5, Application::Undamped, 2);
    EXPECT_DOUBLE_EQ(und.spec().weight.c, 0.4);
    EXPECT_TRUE(std::isinf(und.spec().sigma));
    EXPECT_EQ(und.spec().sphere, SphereNorm::H2);
    const BootstrapFunctional dmp(2.0, Application::Damped, 2);
    EXPECT_DOUBLE_EQ(dmp.spec().sigma, 40.0);
    EXPECT_EQ(dmp.spec().sphere, SphereNorm::W1beta);
    EXPECT_NEAR(dmp.spec().weight.c, (0.5 + 0.05) / 2.0 + 0.25, 1e-15);
    EXPECT_THROW(BootstrapFunctional(3.2, Application::Damped, 2), DomainError);
}

TEST(Bootstrap, ChainRuleConstantIsOneForRadialAndFiniteForAngularData) {
    const auto radial = evolve_semilinear(1.5, bump_data(0.5), false, 3.0);
    EXPECT_NEAR(radial.chain_rule_constant, 1.0, 1e-12);
    const auto ang = evolve_semilinear(1.5, angular_data(0.5), false, 3.0);
    EXPECT_TRUE(std::isfinite(ang.chain_rule_constant));
    EXPECT_GT(ang.chain_rule_constant, 0.0);
}

TEST(DetectBlowup, Classification) {
    const std::vector<double> t{0, 1, 2, 3};
    EXPECT_EQ(detect_blowup(t, {1, 2, 3, 4}, 10.0, 1.0).outcome, Outcome::GlobalToHorizon);
    const auto b = detect_blowup(t, {1, 2, 30, std::numeric_limits<double>::quiet_NaN()}, 10.0, 1.0);
    EXPECT_EQ(b.outcome, Outcome::Blowup);
    EXPECT_EQ(b.T, 2.0);
    EXPECT_EQ(detect_blowup(t, {1, std::numeric_limits<double>::infinity(), 3, 4}, 10.0, 1.0).T, 1.0);
    EXPECT_THROW(detect_blowup(t, {1, 2, 3, 4}, 0.5, 1.0), PreconditionError);
}

TEST(Dichotomy, SmallDataUndampedStaysBounded) {
    const auto rec = evolve_semilinear(2.5, bump_data(1e-3), false, 50.0);
    EXPECT_EQ(rec.outcome, Outcome::GlobalToHorizon);
    EXPECT_TRUE(rec.bounded_q());
    for (double q : rec.Q) EXPECT_TRUE(std::isfinite(q) && q >= 0.0);
}

TEST(Dichotomy, LargePositiveDataBlowsUpStablyUnderRefinement) {
    SemilinearOptions opt;
    opt.dr = 1.0 / 16.0;
    const auto rec = evolve_with_refinement(2.0, bump_data(5.0), false, 50.0, opt);
    EXPECT_EQ(rec.outcome, Outcome::Blowup);
    EXPECT_TRUE(rec.refinement_agrees());
    EXPECT_LT(rec.T, 50.0);
}

TEST(Sweep, LifespanNonincreasingInEpsilonAndErrorsRecorded) {
    const auto cells = lifespan_sweep({2.0}, {5.0, 8.0, 12.0, 20.0}, false, 40.0);
    ASSERT_EQ(cells.size(), 4u);
    for (const auto& c : cells) ASSERT_TRUE(c.record.has_value()) << c.error;
    EXPECT_TRUE(lifespan_monotone(cells));
    EXPECT_LT(cells.back().record->T, cells.front().record->T);

    const auto bad = lifespan_sweep({2.0, 3.5}, {1e-3}, true, 2.0);
    ASSERT_EQ(bad.size(), 2u);
    EXPECT_TRUE(bad[0].record.has_value());
    EXPECT_FALSE(bad[1].record.has_value());
    EXPECT_FALSE(bad[1].error.empty());
}

TEST(Dichotomy, DampedGrowthSeparatesAtTheShiftedCriticalPower) {
    // eps = 3: p = 2 decays monotonically to the horizon, p = 1.6 turns around and grows.
    const auto above = evolve_semilinear(2.0, bump_data(3.0), true, 50.0);
    const auto below = evolve_semilinear(1.6, bump_data(3.0), true, 50.0);
    EXPECT_TRUE(above.bounded_q());
    EXPECT_FALSE(above.q_grows());
    EXPECT_TRUE(below.q_grows());
}
