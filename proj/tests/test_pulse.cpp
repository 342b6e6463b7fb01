#include "fluxshape/errors.hpp"
#include "fluxshape/pulse.hpp"
#include "fluxshape/rc_response.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fluxshape;

namespace {

constexpr double kTauPulse = 8e-6;

HarmonicPulse random_pulse(std::mt19937_64& rng, std::size_t n, double tau_pulse = kTauPulse) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
    }
    return {tau_pulse, u(rng), a, b};
}

} // namespace

TEST(HarmonicPulse, RejectsInvalidConstruction) {
    EXPECT_THROW(HarmonicPulse(0.0, 0.0, {}, {}), ValidationError);
    EXPECT_THROW(HarmonicPulse(-1.0, 0.0, {}, {}), ValidationError);
    EXPECT_THROW(HarmonicPulse(INFINITY, 0.0, {}, {}), ValidationError);
    EXPECT_THROW(HarmonicPulse(1.0, 0.0, {1.0}, {}), ValidationError);
    EXPECT_THROW(HarmonicPulse(1.0, NAN, {}, {}), ValidationError);
    EXPECT_THROW(HarmonicPulse(1.0, 0.0, {1.0}, {INFINITY}), ValidationError);
}

TEST(HarmonicPulse, OmegaDerivedFromPeriod) {
    const HarmonicPulse p(kTauPulse, 0.0, {}, {});
    EXPECT_DOUBLE_EQ(p.omega(), 2.0 * std::numbers::pi / kTauPulse);
}

TEST(Evaluate, ZeroPulseIsZero) {
    const auto p = HarmonicPulse::zero(kTauPulse, 4);
    for (double t : {0.0, 1e-6, 3.3e-6, -5e-6}) EXPECT_EQ(evaluate(p, t), 0.0);
}

TEST(Evaluate, BiharmonicValues) {
    const HarmonicPulse p(kTauPulse, 0.0, {0.0, 0.0}, {1.0, -2.0});
    EXPECT_EQ(evaluate(p, 0.0), 0.0);
    EXPECT_NEAR(evaluate(p, kTauPulse / 8.0), std::sin(std::numbers::pi / 4.0) - 2.0, 1e-15);
    EXPECT_NEAR(evaluate(p, kTauPulse / 8.0), -1.2928932188134525, 1e-15);
}

TEST(Evaluate, DcOnlyPulse) {
    const HarmonicPulse p(kTauPulse, 0.7, {}, {});
    EXPECT_EQ(evaluate(p, 1.23e-6), 0.7);
    EXPECT_EQ(condition_one_residual(p), 0.7);
    EXPECT_EQ(condition_three_residual(p, 1e-5), 0.0);
}

TEST(ConditionOne, Examples) {
    EXPECT_EQ(condition_one_residual(HarmonicPulse(kTauPulse, 0.0, {0.0, 0.0}, {1.0, 3.0})), 0.0);
    EXPECT_EQ(condition_one_residual(HarmonicPulse(kTauPulse, 0.0, {1.0, 2.0}, {0.0, 0.0})), 3.0);
    EXPECT_EQ(condition_one_residual(HarmonicPulse(kTauPulse, -3.0, {1.0, 2.0}, {0.0, 0.0})), 0.0);
}

TEST(ConditionThree, Examples) {
    EXPECT_EQ(condition_three_residual(HarmonicPulse::zero(kTauPulse, 3), 1e-5), 0.0);

    const HarmonicPulse single(kTauPulse, 0.0, {0.0}, {1.0});
    const double tau = 8.79 / single.omega();
    // 1 / (1 + 8.79^2)
    EXPECT_NEAR(condition_three_residual(single, tau), 0.012777250361276757, 1e-15);
    EXPECT_THROW(condition_three_residual(single, 0.0), ValidationError);
}

TEST(Sample, QuarterPeriodSine) {
    const HarmonicPulse p(kTauPulse, 0.0, {0.0}, {1.0});
    const auto s = sample(p, kTauPulse / 4.0, 1);
    ASSERT_EQ(s.size(), 4u);
    const double expected[] = {0.0, 1.0, 0.0, -1.0};
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_DOUBLE_EQ(s[k].t, k * kTauPulse / 4.0);
        EXPECT_NEAR(s[k].v, expected[k], 1e-15);
    }
}

TEST(Sample, MatchesEvaluateAndRejectsUndersampling) {
    std::mt19937_64 rng(7);
    const auto p = random_pulse(rng, 5);
    const auto s = sample(p, 1e-7, 3);
    EXPECT_EQ(s.size(), 240u);
    EXPECT_EQ(s.front().t, 0.0);
    for (const auto& pt : s) EXPECT_EQ(pt.v, evaluate(p, pt.t));

    const auto z = sample(HarmonicPulse::zero(kTauPulse, 2), 1e-7, 1);
    for (const auto& pt : z) EXPECT_EQ(pt.v, 0.0);

    EXPECT_THROW(sample(p, kTauPulse / 3.9, 1), ValidationError);
    EXPECT_THROW(sample(p, 0.0, 1), ValidationError);
    EXPECT_THROW(sample(p, 1e-7, 0), ValidationError);
}

TEST(PulseProperties, PeriodicityAndLinearity) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> t_dist(0.0, 10.0 * kTauPulse);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = static_cast<std::size_t>(trial % 17);  // up to 16 harmonics
        const auto p = random_pulse(rng, n);
        const auto q = random_pulse(rng, (n + 3) % 17);
        const auto sum = p + q;
        for (int k = 0; k < 20; ++k) {
            const double t = t_dist(rng);
            const double v = evaluate(p, t);
            const double scale = std::max(1.0, p.max_abs_coefficient() * (2.0 * n + 1.0));
            EXPECT_NEAR(evaluate(p, t + kTauPulse), v, 1e-12 * scale);
            EXPECT_NEAR(evaluate(sum, t), v + evaluate(q, t), 1e-12 * scale);
        }
        EXPECT_EQ(evaluate(p, 0.0), condition_one_residual(p));
    }
}

TEST(PulseProperties, SineOnlyConditionThreeMatchesKexp) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0), lwt(-1.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 8;
        std::vector<double> b(n);
        for (auto& x : b) x = u(rng);
        const HarmonicPulse p(kTauPulse, 0.0, std::vector<double>(n, 0.0), b);
        const double tau = std::pow(10.0, lwt(rng)) / p.omega();
        const double wt = p.omega() * tau;
        const double lhs = condition_three_residual(p, tau) * -wt;
        const double rhs = k_exp(p, tau);
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}
