#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "wavecert/kirchhoff.hpp"

using namespace wavecert;

namespace {

// Independent oracle for a radial source F(tau, |y|): the sphere mean over |x + rho w|
// reduces to (1 / (2 rho |x|)) int_{|rho - |x||}^{rho + |x|} F(tau, s) s ds.
double radial_kirchhoff_oracle(const SourceSpec& src, double t, double rx) {
    using boost::math::quadrature::gauss_kronrod;
    auto shell = [&](double rho) {
        if (rho <= 0.0) return 0.0;
        const double tau = t - rho;
        auto inner = [&](double s) { return src(tau, s, Vec3{0, 0, 1}) * s; };
        const double a = std::abs(rho - rx), b = rho + rx;
        return rho * gauss_kronrod<double, 61>::integrate(inner, a, b, 12, 1e-13) / (2.0 * rho * rx);
    };
    return gauss_kronrod<double, 61>::integrate(shell, 0.0, t, 15, 1e-12);
}

} // namespace

TEST(Kirchhoff, UnitSourceGivesHalfTSquared) {
    for (double t : {0.5, 1.0, 2.0, 3.7}) {
        const auto res = kirchhoff_eval(unit_source(), t, Vec3{0.2, -0.1, 0.4});
        EXPECT_NEAR(res.value, 0.5 * t * t, 1e-12);
        EXPECT_FALSE(res.warning);
    }
}

TEST(Kirchhoff, ZeroSourceGivesZero) {
    EXPECT_EQ(kirchhoff_eval(zero_source(), 2.0, Vec3{0.3, 0, 0}).value, 0.0);
}

TEST(Kirchhoff, MatchesRadialOneDimensionalOracle) {
    const auto src = bump_source();
    for (double rx : {0.3, 1.0, 2.2}) {
        const double oracle = radial_kirchhoff_oracle(src, 3.0, rx);
        const auto res = kirchhoff_eval(src, 3.0, Vec3{0.0, rx, 0.0});
        EXPECT_NEAR(res.value, oracle, 1e-7 * std::abs(oracle) + 1e-12) << rx;
        EXPECT_LE(res.error_estimate, 1e-6 * std::abs(oracle) + 1e-12);
    }
}

TEST(Kirchhoff, EmptyBackwardConeIsExactlyZero) {
    // tau0 = 1 and R = 1, so the backward cone from t - |x| = 9 > 2 never meets the support.
    const auto src = bump_source(1.0, 1.0, 1.0);
    EXPECT_EQ(kirchhoff_eval(src, 10.0, Vec3{1.0, 0.0, 0.0}).value, 0.0);
    EXPECT_EQ(kirchhoff_eval(src, 10.0, Vec3{0.0, 0.0, 0.0}).value, 0.0);
}

TEST(Kirchhoff, SolverAgreesWithOracleForBump) {
    const auto src = bump_source();
    const auto probes = probe_set(20, 1.0, 3.0);
    const Grid g1 = Grid::make(1.0 / 32, 3.0, 4);
    const Grid g2 = Grid::make(1.0 / 64, 3.0, 4);
    const auto c1 = compare_with_kirchhoff(solve_linear(src, g1, {4}), src, probes);
    const auto c2 = compare_with_kirchhoff(solve_linear(src, g2, {4}), src, probes);
    EXPECT_LE(c2.relative_l2, 0.02);
    EXPECT_LT(c2.relative_l2, c1.relative_l2);
    EXPECT_FALSE(c2.oracle_warning);
}

TEST(Kirchhoff, SolverAgreesWithOracleForAngularBump) {
    const auto src = angular_bump_source(1.0, 0.5, 0.7);
    const auto probes = probe_set(20, 1.0, 3.0);
    const Grid g = Grid::make(1.0 / 64, 3.0, 4);
    const auto c = compare_with_kirchhoff(solve_linear(src, g, {4}), src, probes);
    EXPECT_LE(c.relative_l2, 0.02);
}

TEST(Kirchhoff, SpecExampleBumpAtTEqualsThree) {
    const auto src = bump_source();
    const Grid g = Grid::make(1.0 / 64, 3.0, 0);
    const auto sol = solve_linear(src, g, {8});
    const double k = kirchhoff_eval(src, 3.0, Vec3{1.0, 0.0, 0.0}).value;
    const double s = sol.value(3.0, 1.0, Vec3{1.0, 0.0, 0.0});
    EXPECT_NEAR(s, k, 0.02 * std::abs(k));
}

TEST(Huygens, TrailingResidualSmallAndShrinking) {
    const auto src = angular_bump_source(1.0, 0.5, 0.7, 1.0, 1.0);
    const auto probes = trailing_probes(src, 10.0, 4, 4);
    const double coarse = huygens_residual(solve_linear(src, Grid::make(1.0 / 32, 10.0, 2), {8}), src, probes);
    const double fine = huygens_residual(solve_linear(src, Grid::make(1.0 / 64, 10.0, 2), {8}), src, probes);
    EXPECT_LE(fine, 1e-4);
    EXPECT_LE(fine, 0.5 * coarse);
    EXPECT_EQ(huygens_residual_kirchhoff(src, probes), 0.0);
}

TEST(Huygens, SpecProbeAndZeroSource) {
    SourceSpec src = bump_source(1.0, 1.0, 1.0);
    src.spatial_radius = 1.0;
    const std::vector<Probe> probe{{10.0, Vec3{1.0, 0.0, 0.0}}};
    const Grid g = Grid::make(1.0 / 64, 10.0, 0);
    EXPECT_LE(huygens_residual(solve_linear(src, g, {16}), src, probe), 1e-4);
    EXPECT_EQ(huygens_residual_kirchhoff(src, probe), 0.0);
    SourceSpec z = zero_source();
    z.time_support = 1.0;
    z.spatial_radius = 1.0;
    EXPECT_EQ(huygens_residual(solve_linear(z, g, {16}), z, probe), 0.0);
}

TEST(Huygens, RejectsEmptyTrailingRegion) {
    const auto src = bump_source(1.0, 1.0, 1.0);
    const Grid g = Grid::make(1.0 / 16, 3.0, 0);
    const std::vector<Probe> probe{{2.0, Vec3{1.0, 0.0, 0.0}}};
    EXPECT_THROW(huygens_residual(solve_linear(src, g), src, probe), PreconditionError);
}

TEST(ConeDomination, HoldsAtTwentyProbes) {
    const auto src = bump_source();
    const auto probes = probe_set(20, 0.5, 4.0);
    const auto rep = cone_weight_domination_check(src, 0.25, probes);
    EXPECT_TRUE(rep.all_hold);
    EXPECT_EQ(rep.entries.size(), 20u);
    const auto rep0 = cone_weight_domination_check(angular_bump_source(1.0, 0.5, 0.7), 0.0, probes);
    EXPECT_TRUE(rep0.all_hold);
}

TEST(ConeDomination, SupportArithmeticOnTheCone) {
    // Source supported where tau + |y| <= 1: on the backward cone tau + 2 + |y| <= 3,
    // and for a probe with t - r = 0 the left weight is 2^alpha.
    SourceSpec src = bump_source(1.0, 0.5, 0.5);
    const double alpha = 0.25;
    const std::vector<Probe> probes{{1.0, Vec3{1.0, 0.0, 0.0}}, {0.75, Vec3{0.0, 0.75, 0.0}}};
    const auto rep = cone_weight_domination_check(src, alpha, probes);
    EXPECT_TRUE(rep.all_hold);
    for (const auto& e : rep.entries) {
        const double left_weight = std::pow(e.probe.t + 2.0 - e.probe.x.norm(), alpha);
        EXPECT_LE(left_weight / std::pow(3.0, alpha), 1.0);
    }
}
