#include "fluxshape/device.hpp"
#include "fluxshape/errors.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace fluxshape;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

CouplerDevice device_at(double phi_idle) {
    auto d = CouplerDevice::reference();
    d.phi_idle = phi_idle;
    return d;
}

double brute_force_qubit_level(double phi, const CouplerDevice& d, bool upper) {
    Eigen::Matrix2d h;
    h << d.omega_q, d.g, d.g, coupler_frequency(phi, d);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h, Eigen::EigenvaluesOnly);
    return upper ? es.eigenvalues()(1) : es.eigenvalues()(0);
}

std::vector<double> delays(double step, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = step * static_cast<double>(k);
    return v;
}

} // namespace

TEST(CouplerFrequency, Examples) {
    const auto d = CouplerDevice::reference();
    EXPECT_EQ(coupler_frequency(0.0, d), d.omega_max);
    EXPECT_EQ(coupler_frequency(0.5, d), 0.0);
    EXPECT_EQ(coupler_frequency(-1.5, d), 0.0);
    EXPECT_NEAR(coupler_frequency(0.25, d) / d.omega_max, 0.8408964152537146, 1e-15);
}

TEST(CouplerFrequency, SymmetricAndPeriodic) {
    const auto d = CouplerDevice::reference();
    for (double phi = -1.3; phi < 1.3; phi += 0.0137) {
        EXPECT_EQ(coupler_frequency(phi, d), coupler_frequency(-phi, d));
        EXPECT_NEAR(coupler_frequency(phi + 1.0, d), coupler_frequency(phi, d), 1e-12 * d.omega_max);
    }
}

TEST(DressedFrequency, UncoupledReturnsBareQubit) {
    auto d = device_at(0.0);
    d.g = 0.0;
    for (double phi : {-0.4, -0.1, 0.0, 0.2, 0.3}) EXPECT_EQ(dressed_qubit_frequency(phi, d), d.omega_q);
}

TEST(DressedFrequency, SymmetricSplittingAtResonance) {
    auto d = device_at(0.0);
    d.omega_q = d.omega_max;
    EXPECT_EQ(qubit_branch(d), Branch::lower);
    EXPECT_NEAR(dressed_qubit_frequency(0.0, d), d.omega_q - d.g, 1e-6);
}

TEST(DressedFrequency, ReferenceDeviceAtZeroFlux) {
    const auto d = device_at(0.0);
    EXPECT_EQ(qubit_branch(d), Branch::lower);
    const double shift_hz = (d.omega_q - dressed_qubit_frequency(0.0, d)) / kTwoPi;
    EXPECT_NEAR(shift_hz / 1e6, 33.60553704245986, 1e-6);
    EXPECT_NEAR((d.omega_q - d.omega_max) / kTwoPi / 1e6, -84.5, 1e-6);
}

TEST(DressedFrequency, MatchesBruteForceDiagonalization) {
    for (double idle : {-0.278, 0.0, 0.1}) {
        const auto d = device_at(idle);
        const bool upper = qubit_branch(d) == Branch::upper;
        for (double phi = -0.49; phi < 0.49; phi += 0.01) {
            const double expect = brute_force_qubit_level(phi, d, upper);
            EXPECT_NEAR(dressed_qubit_frequency(phi, d), expect, 1e-12 * expect) << idle << " " << phi;
        }
    }
}

TEST(DressedFrequency, IdleBiasBranchSelection) {
    const auto d = CouplerDevice::reference();
    EXPECT_EQ(qubit_branch(d), Branch::upper);
    // At the idle point the qubit-like level lies within g of the bare qubit.
    EXPECT_LT(std::abs(dressed_qubit_frequency(d.phi_idle, d) - d.omega_q), d.g);
}

TEST(DressedFrequency, ContinuousAcrossAvoidedCrossing) {
    for (double idle : {-0.278, 0.0}) {
        const auto d = device_at(idle);
        const double step = 1e-4;
        for (double phi = -0.45; phi < 0.45; phi += step) {
            const double jump = std::abs(dressed_qubit_frequency(phi + step, d) - dressed_qubit_frequency(phi, d));
            const double bound = std::abs(coupler_frequency(phi + step, d) - coupler_frequency(phi, d));
            EXPECT_LE(jump, bound * (1.0 + 1e-9) + 1e-3) << phi;
        }
    }
}

TEST(DressedFrequency, LevelRepulsion) {
    const auto d = CouplerDevice::reference();
    const auto res = resonance_flux(d);
    ASSERT_TRUE(res.has_value());
    EXPECT_NEAR(coupler_frequency(*res, d), d.omega_q, 1e-6 * d.omega_q);
    EXPECT_NEAR(branch_gap(*res, d) / (2.0 * d.g), 1.0, 1e-9);
    for (double phi = -0.49; phi < 0.49; phi += 0.001) EXPECT_GE(branch_gap(phi, d), 2.0 * d.g * (1.0 - 1e-12));

    auto unreachable = d;
    unreachable.omega_q = 1.1 * d.omega_max;
    EXPECT_FALSE(resonance_flux(unreachable).has_value());
}

TEST(DeviceValidation, RejectsBadParameters) {
    auto d = CouplerDevice::reference();
    d.phi_idle = 0.5;
    EXPECT_THROW(d.validate(), ValidationError);
    d = CouplerDevice::reference();
    d.g = -1.0;
    EXPECT_THROW(d.validate(), ValidationError);
    d = CouplerDevice::reference();
    d.omega_max = 0.0;
    EXPECT_THROW(d.validate(), ValidationError);
}

TEST(SimulateRamsey, IdleFluxGivesNoOscillation) {
    const auto d = CouplerDevice::reference();
    RamseyConfig cfg{8e-6, delays(1e-6, 40), 75e-6, std::nullopt, 0};
    const auto tr = simulate_ramsey(d, [&](double) { return d.phi_idle; }, cfg);
    for (std::size_t k = 0; k < tr.delays.size(); ++k) {
        EXPECT_DOUBLE_EQ(tr.x[k], std::exp(-tr.delays[k] / 75e-6));
        EXPECT_EQ(tr.y[k], 0.0);
    }
}

TEST(SimulateRamsey, ConstantDetuningIsLinearPhase) {
    const auto d = CouplerDevice::reference();
    const double phi1 = d.phi_idle + 0.003;
    const double delta = dressed_qubit_frequency(phi1, d) - dressed_qubit_frequency(d.phi_idle, d);
    RamseyConfig cfg{8e-6, delays(0.37e-6, 50), std::nullopt, std::nullopt, 0};
    const auto tr = simulate_ramsey(d, [&](double) { return phi1; }, cfg);
    for (std::size_t k = 0; k < tr.delays.size(); ++k) {
        const double expect = delta * tr.delays[k];
        EXPECT_NEAR(tr.phase[k], expect, 1e-9 * std::max(1.0, std::abs(expect)));
        EXPECT_NEAR(tr.x[k], std::cos(expect), 1e-9);
        EXPECT_NEAR(tr.y[k], std::sin(expect), 1e-9);
    }
}

TEST(SimulateRamsey, PhaseIsAdditive) {
    const auto d = CouplerDevice::reference();
    const auto flux = square_transient_flux(d.phi_idle, 0.02, 8e-6, 13e-6);
    const double ta = 13.37e-6, tb = 21.1e-6;

    RamseyConfig whole{8e-6, {ta + tb}, std::nullopt, std::nullopt, 0};
    RamseyConfig first{8e-6, {ta}, std::nullopt, std::nullopt, 0};
    RamseyConfig second{8e-6 + ta, {tb}, std::nullopt, std::nullopt, 0};
    const double p = simulate_ramsey(d, flux, whole).phase[0];
    const double pa = simulate_ramsey(d, flux, first).phase[0];
    const double pb = simulate_ramsey(d, flux, second).phase[0];
    EXPECT_NEAR(p, pa + pb, 1e-9);
    EXPECT_GT(std::abs(p), 1.0);
}

TEST(SimulateRamsey, TransientPhaseMatchesFineQuadrature) {
    const auto d = CouplerDevice::reference();
    const auto flux = square_transient_flux(d.phi_idle, 0.02, 8e-6, 13e-6);
    RamseyConfig cfg{8e-6, delays(5e-6, 13), std::nullopt, std::nullopt, 0};
    const auto tr = simulate_ramsey(d, flux, cfg);

    const double w0 = dressed_qubit_frequency(d.phi_idle, d);
    const double h = 1e-10;
    double acc = 0.0;
    std::size_t k = 1;
    double t = 0.0;
    for (; k < tr.delays.size(); ++k) {
        // Trapezoid with a 0.1 ns step.
        while (t < tr.delays[k] - 0.5 * h) {
            const double f0 = dressed_qubit_frequency(flux(8e-6 + t), d) - w0;
            const double f1 = dressed_qubit_frequency(flux(8e-6 + t + h), d) - w0;
            acc += 0.5 * h * (f0 + f1);
            t += h;
        }
        EXPECT_NEAR(tr.phase[k], acc, 1e-5 * std::max(1.0, std::abs(acc)));
    }
}

TEST(SimulateRamsey, SeededNoiseIsDeterministic) {
    const auto d = CouplerDevice::reference();
    const auto flux = square_transient_flux(d.phi_idle, 0.02, 8e-6, 13e-6);
    RamseyConfig cfg{8e-6, delays(1e-6, 30), 75e-6, 0.05, 42};
    const auto a = simulate_ramsey(d, flux, cfg);
    const auto b = simulate_ramsey(d, flux, cfg);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.y, b.y);
    cfg.rng_seed = 43;
    const auto c = simulate_ramsey(d, flux, cfg);
    EXPECT_NE(a.x, c.x);
    EXPECT_EQ(a.phase, c.phase);
}

TEST(SimulateRamsey, RejectsBadInput) {
    const auto d = CouplerDevice::reference();
    RamseyConfig cfg{8e-6, delays(1e-6, 5), std::nullopt, std::nullopt, 0};
    EXPECT_THROW(simulate_ramsey(d, [](double) { return std::numeric_limits<double>::quiet_NaN(); }, cfg),
                 ValidationError);
    cfg.delay_grid = {0.0, 2e-6, 1e-6};
    EXPECT_THROW(simulate_ramsey(d, [&](double) { return d.phi_idle; }, cfg), ValidationError);
    cfg.delay_grid = {0.0, 1e-6};
    cfg.t2 = 0.0;
    EXPECT_THROW(simulate_ramsey(d, [&](double) { return d.phi_idle; }, cfg), ValidationError);
}

TEST(PulseFlux, MatchesOdeOracleCurrent) {
    auto d = CouplerDevice::reference();
    const double tp = 8e-6;
    const RCLine line = RCLine::from_tau(13e-6);
    const HarmonicPulse p(tp, 0.0, {0.0, 0.0}, {1.0, -1.5});
    const auto flux = pulse_flux(p, line, d);
    auto v_in = [&](double t) { return t < tp ? evaluate(p, t) : 0.0; };
    const auto grid = uniform_grid(3 * tp, 2e-9);
    const auto rc = ode_oracle(v_in, line, grid, 0.0, tp);
    for (std::size_t k = 1; k < grid.size(); k += 97) {
        const double t = grid[k];
        if (std::abs(t - tp) < 1e-8) continue;
        const double expect = d.phi_idle + d.flux_per_volt * line.resistance() * rc[k].current;
        EXPECT_NEAR(flux(t), expect, 1e-8) << t;
    }
}

TEST(Fig1Demo, FailsToReturnToIdle) {
    const auto demo = fig1_demo(10e-6, kTwoPi * 5e9, 0.2);
    ASSERT_EQ(demo.onset_frequency.size(), 3u);
    EXPECT_EQ(demo.t.size(), demo.frequency.size());
    EXPECT_GT(std::abs(demo.post_pulse_frequency[0] - demo.idle_frequency), kTwoPi * 1e6);
    EXPECT_GT(std::abs(demo.onset_frequency[1] - demo.onset_frequency[0]), kTwoPi * 1e6);
    EXPECT_EQ(demo.frequency.front(), demo.idle_frequency);
}

TEST(Fig1Demo, LongTimeConstantApproachesIdeal) {
    const auto demo = fig1_demo(1e3, kTwoPi * 5e9, 0.2);
    for (std::size_t k = 0; k < demo.t.size(); ++k) EXPECT_NEAR(demo.distorted_flux[k], demo.ideal_flux[k], 1e-7);
    for (double f : demo.post_pulse_frequency) EXPECT_NEAR(f, demo.idle_frequency, 1e-6 * demo.idle_frequency);
}
