#include "fluxshape/errors.hpp"
#include "fluxshape/rc_response.hpp"
#include "fluxshape/synthesis.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace fluxshape;

namespace {

constexpr double kTauPulse = 8e-6;
constexpr double kOmega = 2.0 * std::numbers::pi / kTauPulse;

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

TEST(RCLine, Invariants) {
    const RCLine line(50.0, 2e-7);
    EXPECT_DOUBLE_EQ(line.tau(), 1e-5);
    EXPECT_THROW(RCLine(0.0, 1e-6), ValidationError);
    EXPECT_THROW(RCLine(50.0, -1e-6), ValidationError);
    EXPECT_DOUBLE_EQ(RCLine::from_tau(13e-6).capacitance(), 13e-6 / 50.0);
}

TEST(ClosedForm, ZeroPulse) {
    const auto p = HarmonicPulse::zero(kTauPulse, 3);
    const RCLine line = RCLine::from_tau(11.2e-6);
    for (double t : {0.0, 2e-6, 40e-6}) {
        EXPECT_EQ(capacitor_voltage(p, line, t), 0.0);
        EXPECT_EQ(line_current(p, line, t), 0.0);
    }
    EXPECT_EQ(k_exp(p, 1e-5), 0.0);
}

TEST(ClosedForm, DcChargingIsTextbookRc) {
    const HarmonicPulse p(kTauPulse, 1.0, {}, {});
    const RCLine line(50.0, 2e-7);
    for (double t : {0.0, 1e-6, 1e-5, 5e-5}) {
        EXPECT_NEAR(capacitor_voltage(p, line, t), 1.0 - std::exp(-t / line.tau()), 1e-15);
        EXPECT_NEAR(line_current(p, line, t), std::exp(-t / line.tau()) / 50.0, 1e-17);
    }
}

TEST(ClosedForm, StartsFromRest) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const HarmonicPulse p(kTauPulse, u(rng), {u(rng), u(rng)}, {u(rng), u(rng)});
        EXPECT_NEAR(capacitor_voltage(p, RCLine::from_tau(3e-6), 0.0), 0.0, 1e-15);
    }
}

TEST(ClosedForm, SteadyStateAmplitudeOfSingleSine) {
    const HarmonicPulse p(kTauPulse, 0.0, {0.0}, {1.0});
    const RCLine line = RCLine::from_tau(8.79 / kOmega);
    // Amplitude from the maximum of the steady-state part over a fine period grid.
    double amp = 0.0;
    for (int k = 0; k < 20000; ++k) {
        amp = std::max(amp, std::abs(steady_state_voltage(p, line, k * kTauPulse / 20000.0)));
    }
    EXPECT_NEAR(amp, 1.0 / std::sqrt(1.0 + 8.79 * 8.79), 1e-7);
    EXPECT_NEAR(amp, 0.11303650012839551, 1e-7);
}

TEST(ClosedForm, CurrentIsCapacitanceTimesFiniteDifference) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const RCLine line = RCLine::from_tau(11.2e-6);
    for (int trial = 0; trial < 10; ++trial) {
        const HarmonicPulse p(kTauPulse, u(rng), {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
        for (double t : {1e-6, 4.4e-6, 17e-6}) {
            const double h = 1e-10;
            const double fd = line.capacitance() *
                              (capacitor_voltage(p, line, t + h) - capacitor_voltage(p, line, t - h)) / (2 * h);
            EXPECT_NEAR(line_current(p, line, t), fd, 1e-7 * std::max(1e-3, std::abs(fd)));
        }
    }
}

TEST(Kexp, Examples) {
    const HarmonicPulse single(kTauPulse, 0.0, {0.0}, {1.0});
    const double tau = 8.79 / kOmega;
    EXPECT_NEAR(k_exp(single, tau), -0.11231203067562268, 1e-15);
    // omega tau >> 1 limit -b1 / (omega tau) agrees within 2%.
    EXPECT_NEAR(k_exp(single, tau) / (-1.0 / 8.79), 1.0, 0.02);

    const auto bi = solve_biharmonic(1.0, kOmega, tau);
    EXPECT_NEAR(k_exp(bi, tau), 0.0, 1e-14);
    EXPECT_THROW(k_exp(single, 0.0), ValidationError);
}

TEST(Kexp, LinearInCoefficients) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const HarmonicPulse p(kTauPulse, u(rng), {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
        const HarmonicPulse q(kTauPulse, u(rng), {u(rng), u(rng)}, {u(rng), u(rng)});
        const double alpha = u(rng) * 3.0, beta = u(rng) * 3.0;
        const double tau = std::pow(10.0, 2.0 * u(rng)) / kOmega;
        EXPECT_NEAR(k_exp(p * alpha + q * beta, tau), alpha * k_exp(p, tau) + beta * k_exp(q, tau), 1e-12);
    }
}

TEST(ClosedForm, TransientIsolation) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const RCLine line = RCLine::from_tau(11.2e-6);
    for (int trial = 0; trial < 20; ++trial) {
        const HarmonicPulse p(kTauPulse, u(rng), {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
        const double k = k_exp(p, line.tau());
        for (double t = 0.0; t < 50e-6; t += 1.7e-6) {
            EXPECT_NEAR(capacitor_voltage(p, line, t) - steady_state_voltage(p, line, t),
                        -k * std::exp(-t / line.tau()), 1e-10);
        }
    }
}

TEST(ClosedForm, ExactBiharmonicCurrentVanishesAtEnds) {
    const double tau = 11.2e-6;
    const auto bi = solve_biharmonic(1.0, kOmega, tau);
    const RCLine line(50.0, tau / 50.0);
    EXPECT_NEAR(line_current(bi, line, 0.0), 0.0, 1e-10);
    EXPECT_NEAR(line_current(bi, line, kTauPulse), 0.0, 1e-10);
}

TEST(OdeOracle, HomogeneousDecay) {
    const RCLine line = RCLine::from_tau(10e-6);
    const auto grid = uniform_grid(50e-6, 10e-6 / 100.0);
    const auto out = ode_oracle([](double) { return 0.0; }, line, grid, 1.0, 1e-4);
    for (const auto& s : out) {
        const double expected = std::exp(-s.t / line.tau());
        EXPECT_NEAR(s.v_c / expected, 1.0, 1e-8);
    }
}

TEST(OdeOracle, UnitStep) {
    const RCLine line = RCLine::from_tau(10e-6);
    const auto grid = uniform_grid(50e-6, 2e-8);
    const auto out = ode_oracle([](double) { return 1.0; }, line, grid, 0.0, 4e-6);
    for (const auto& s : out) {
        EXPECT_NEAR(s.v_c, 1.0 - std::exp(-s.t / line.tau()), 1e-8);
        EXPECT_NEAR(s.current, std::exp(-s.t / line.tau()) / line.resistance(), 1e-8 / line.resistance());
    }
}

TEST(OdeOracle, RejectsCoarseOrUnsortedGrids) {
    const RCLine line = RCLine::from_tau(10e-6);
    auto zero = [](double) { return 0.0; };
    EXPECT_THROW(ode_oracle(zero, line, uniform_grid(1e-4, 10e-6 / 40.0), 0.0, 1.0), ValidationError);
    EXPECT_THROW(ode_oracle(zero, line, uniform_grid(1e-5, 1e-7), 0.0, 8e-6 / 50.0), ValidationError);
    const std::vector<double> unsorted{0.0, 2e-8, 1e-8};
    EXPECT_THROW(ode_oracle(zero, line, unsorted, 0.0, 8e-6), ValidationError);
}

TEST(OdeOracle, MatchesClosedFormOverFivePeriods) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0), lwt(-1.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 1 + trial % 8;
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) { a[i] = u(rng); b[i] = u(rng); }
        const HarmonicPulse p(kTauPulse, u(rng), a, b);
        const RCLine line = RCLine::from_tau(std::pow(10.0, lwt(rng)) / kOmega);
        const double step = std::min(line.tau() / 50.0, kTauPulse / (400.0 * n));
        const auto grid = uniform_grid(5 * kTauPulse, step);
        const auto out = ode_oracle([&](double t) { return evaluate(p, t); }, line, grid,
                                    capacitor_voltage(p, line, 0.0), kTauPulse);
        std::vector<double> vc_ref, vc_err, i_ref, i_err;
        for (const auto& s : out) {
            vc_ref.push_back(capacitor_voltage(p, line, s.t));
            i_ref.push_back(line_current(p, line, s.t));
            vc_err.push_back(s.v_c - vc_ref.back());
            i_err.push_back(s.current - i_ref.back());
        }
        EXPECT_LT(max_abs(vc_err) / max_abs(vc_ref), 1e-6) << "trial " << trial;
        EXPECT_LT(max_abs(i_err) / max_abs(i_ref), 1e-6) << "trial " << trial;
    }
}

TEST(OdeOracle, SquarePulseDroopsAndUndershoots) {
    const double tau = 10e-6, width = 5e-6, start = 2e-6;
    const RCLine line = RCLine::from_tau(tau);
    auto square = [&](double t) { return (t >= start && t < start + width) ? 1.0 : 0.0; };
    const auto grid = uniform_grid(40e-6, 10e-9);
    const auto out = ode_oracle(square, line, grid, 0.0, width);
    // Delivered signal is the drop across R.
    auto delivered = [&](std::size_t k) { return square(out[k].t) - out[k].v_c; };
    const auto at = [&](double t) { return static_cast<std::size_t>(std::llround(t / 10e-9)); };
    const double early = delivered(at(start + 0.1e-6));
    const double late = delivered(at(start + width - 0.1e-6));
    EXPECT_GT(early, late);  // droop
    EXPECT_GT(late, 0.0);
    const double after = delivered(at(start + width + 0.1e-6));
    EXPECT_LT(after, 0.0);   // undershoot opposite to the pulse
    EXPECT_NEAR(after, -(1.0 - std::exp(-width / tau)) * std::exp(-0.1e-6 / tau), 2e-3);
}

TEST(SquareTransient, Examples) {
    EXPECT_NEAR(square_pulse_flux_transient(1.0, 8e-6, 13e-6, 0.0), -1.0 + std::exp(-8.0 / 13.0), 1e-15);
    EXPECT_NEAR(square_pulse_flux_transient(1.0, 8e-6, 13e-6, 0.0), -0.4595670035134659, 1e-12);
    EXPECT_NEAR(square_pulse_flux_transient(0.3, 8e-6, 13e-6, 1.0, 0.25), 0.25, 1e-15);
    for (double d : {0.0, 1e-6, 1e-4}) EXPECT_EQ(square_pulse_flux_transient(1.0, 0.0, 13e-6, d), 0.0);
    EXPECT_THROW(square_pulse_flux_transient(1.0, 8e-6, 0.0, 0.0), ValidationError);
    EXPECT_THROW(square_pulse_flux_transient(1.0, 8e-6, 1e-6, -1.0), ValidationError);
}
