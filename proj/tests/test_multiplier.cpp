#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wavecert/multiplier.hpp"

using namespace wavecert;

TEST(WeightEval, Examples) {
    EXPECT_NEAR(weight_eval(0.0, 0.0, 1.5, Sign::Plus), std::pow(2.0, 1.5), 1e-15);
    EXPECT_NEAR(weight_eval(0.0, 0.0, 1.5, Sign::Plus), 2.828427, 1e-6);
    EXPECT_DOUBLE_EQ(weight_eval(3.0, 4.0, 1.2, Sign::Minus), 1.0);
    EXPECT_NEAR(weight_eval(1.0, 2.0, 1.8, Sign::Plus), std::exp(1.8 * std::log(5.0)), 1e-12);
    EXPECT_NEAR(weight_eval(1.0, 2.0, 1.8, Sign::Plus), 18.11949, 1e-5);
    EXPECT_THROW(weight_eval(1.0, 3.5, 1.5, Sign::Minus), DomainError);
}

TEST(WeightEval, MinusWeightIsAtLeastOneOnSupport) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double t = 50.0 * u(rng), r = (t + 1.0) * u(rng), s = 1.0 + u(rng);
        EXPECT_GE(weight_eval(t, r, s, Sign::Minus), 1.0);
    }
}

TEST(ApplyMultiplier, Examples) {
    const double c = 0.7, t = 1.3, r = 0.4, s = 1.6;
    EXPECT_NEAR(apply_multiplier(0, 0, c, t, r, s), c / r * (std::pow(t + 2 + r, s) - std::pow(t + 2 - r, s)), 1e-13);
    EXPECT_NEAR(apply_multiplier(0, 0, c, t, r, 1.0), 2.0 * c, 1e-14);
    EXPECT_NEAR(apply_multiplier(1, 0, 0, 0.0, 1.0, 1.5), std::pow(3.0, 1.5) + 1.0, 1e-14);
    EXPECT_NEAR(apply_multiplier(1, 0, 0, 0.0, 1.0, 1.5), 6.196152, 1e-6);
    EXPECT_THROW(apply_multiplier(1, 1, 1, 1.0, 0.0, 1.5), DomainError);
}

TEST(Jet, MatchesCentredDifferencesOnCatalogue) {
    // Independent oracle for the exact derivatives: 4th-order centred differences of the value.
    const double h = 1e-3;
    for (const auto& tf : radial_test_functions()) {
        for (auto [t, r] : {std::pair{0.7, 0.5}, std::pair{3.1, 2.6}, std::pair{6.0, 1.2}}) {
            const Jet2 j = tf.g(t, r);
            auto f = [&](double a, double b) { return tf.g(a, b).v; };
            auto d1 = [&](auto&& fn) { return (-fn(2) + 8 * fn(1) - 8 * fn(-1) + fn(-2)) / (12 * h); };
            auto d2 = [&](auto&& fn) { return (-fn(2) + 16 * fn(1) - 30 * fn(0) + 16 * fn(-1) - fn(-2)) / (12 * h * h); };
            const double gt = d1([&](int k) { return f(t + k * h, r); });
            const double gr = d1([&](int k) { return f(t, r + k * h); });
            const double gtt = d2([&](int k) { return f(t + k * h, r); });
            const double grr = d2([&](int k) { return f(t, r + k * h); });
            const double gtr = d1([&](int k) { return d1([&](int i) { return f(t + k * h, r + i * h); }); });
            const double sc = 1.0 + std::abs(j.v) + std::abs(j.tt) + std::abs(j.rr);
            EXPECT_NEAR(j.t, gt, 1e-8 * sc) << tf.id;
            EXPECT_NEAR(j.r, gr, 1e-8 * sc) << tf.id;
            EXPECT_NEAR(j.tt, gtt, 1e-6 * sc) << tf.id;
            EXPECT_NEAR(j.rr, grr, 1e-6 * sc) << tf.id;
            EXPECT_NEAR(j.tr, gtr, 1e-6 * sc) << tf.id;
        }
    }
}

TEST(Jet, CatalogueIsSupportedInsideTheCone) {
    for (const auto& tf : radial_test_functions()) {
        for (double t : {0.0, 1.0, 7.5}) {
            EXPECT_EQ(tf.g(t, t + 1.0).v, 0.0) << tf.id;
            EXPECT_EQ(tf.g(t, t + 1.5).v, 0.0) << tf.id;
        }
    }
}

TEST(IdentityResidual, EachPartHoldsForRadialCatalogue) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& tf : radial_test_functions()) {
        double worst[4] = {0, 0, 0, 0};
        for (int i = 0; i < 500; ++i) {
            const double t = 10.0 * u(rng), r = 1e-3 + (t + 1.0) * u(rng), s = 1.0 + u(rng);
            for (int part = 0; part < 4; ++part)
                worst[part] = std::max(worst[part], identity_residual(tf, t, r, s, static_cast<IdentityPart>(part)));
        }
        for (int part = 0; part < 4; ++part) EXPECT_LE(worst[part], 1e-9) << tf.id << " part " << part;
    }
}

TEST(IdentityResidual, SingleModeSphereIntegrated) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto [l, m] : {std::pair{1, 0}, std::pair{2, 1}, std::pair{3, -2}}) {
        const auto tf = mode_test_function(l, m);
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double t = 8.0 * u(rng), r = 0.05 + t * u(rng), s = 1.0 + u(rng);
            for (int part = 0; part < 4; ++part)
                worst = std::max(worst, identity_residual_sphere(tf, t, r, s, static_cast<IdentityPart>(part)));
        }
        EXPECT_LE(worst, 1e-9) << tf.id;
    }
}

TEST(IdentityResidual, SingleModePointwiseWithAngularDivergence) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto tf = mode_test_function(2, 1);
    double worst = 0.0;
    for (int i = 0; i < 300; ++i) {
        const double t = 5.0 * u(rng), r = 0.05 + t * u(rng), s = 1.0 + u(rng);
        const double z = 2.0 * u(rng) - 1.0, ph = 2.0 * std::numbers::pi * u(rng);
        const double st = std::sqrt(1.0 - z * z);
        const Vec3 w{st * std::cos(ph), st * std::sin(ph), z};
        worst = std::max(worst, identity_residual(tf, t, r, w, s, IdentityPart::Combined));
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(IdentityResidual, MutatedExponentIsDetected) {
    const auto tf = radial_test_functions()[0];
    double least = 1.0;
    for (double t : {0.5, 2.0, 5.0})
        for (double r : {0.3, 1.0})
            least = std::min(least, identity_residual(tf, t, r, 1.5, IdentityPart::Combined, 0.1));
    EXPECT_GT(least, 1e-4);
    const auto mode = mode_test_function(2, 1);
    EXPECT_GT(identity_residual_sphere(mode, 2.0, 1.0, 1.5, IdentityPart::Combined, 0.1), 1e-4);
}

TEST(IdentityResidual, RejectsOriginAndOutsideRegion) {
    const auto tf = radial_test_functions()[0];
    EXPECT_THROW(identity_residual(tf, 1.0, 0.0, 1.5, IdentityPart::First), PreconditionError);
    EXPECT_THROW(identity_residual(tf, 1.0, 3.5, 1.5, IdentityPart::First), PreconditionError);
    EXPECT_THROW(identity_part_from_string("fourth"), PreconditionError);
}

TEST(TaylorGap, Examples) {
    EXPECT_NEAR(taylor_gap(0.0, 1.0, 1.5), 1.5 * std::sqrt(3.0) - 2.5, 1e-14);
    EXPECT_NEAR(taylor_gap(0.0, 1.0, 1.5), 0.098076, 1e-6);
    for (double t : {0.0, 3.0, 99.0}) {
        for (double s : {1.0, 1.3, 2.0}) EXPECT_EQ(taylor_gap(t, 0.0, s), 0.0);
        for (double r : {0.0, 0.5 * t, t + 1.0}) EXPECT_EQ(taylor_gap(t, r, 1.0), 0.0);
    }
    EXPECT_THROW(taylor_gap(1.0, 2.5, 1.5), PreconditionError);
}

TEST(TaylorGap, AgreesWithDirectSubtractionInLongDouble) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20000; ++i) {
        const double t = 100.0 * u(rng), r = (t + 1.0) * u(rng), s = 1.0 + u(rng);
        const long double T = t, R = r, S = s;
        const long double direct = (T + 2 - (S - 1) * R) * std::pow(T + 2 + R, S - 1) -
                                   std::pow(T + 2 - R, S - 1) * (T + 2 + (S - 1) * R);
        const double g = taylor_gap(t, r, s);
        EXPECT_NEAR(g, static_cast<double>(direct), 1e-11 * std::pow(t + 2.0, s));
        EXPECT_GE(g, -1e-12);
    }
}

TEST(Rearrangement, FormsAgreeAndBoundHolds) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double t = 30.0 * u(rng), r = 1e-2 + (t + 1.0) * u(rng), s = 1.0 + u(rng);
        const auto rr = rearrangement(n(rng), n(rng), n(rng), t, r, s);
        EXPECT_LE(rr.form_mismatch(), 1e-12);
        EXPECT_TRUE(rr.bound_holds());
    }
}
