#pragma once

#include "fluxshape/pulse.hpp"
#include "fluxshape/rc_response.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace fluxshape {

/// Flux-tunable coupler hybridized with a fixed-frequency qubit.
/// Frequencies are angular (rad/s); flux is in units of the flux quantum.
struct CouplerDevice {
    double omega_max;      ///< coupler frequency at zero flux
    double omega_q;        ///< bare qubit frequency
    double g;              ///< qubit-coupler coupling
    double flux_per_volt;  ///< flux per volt across the line resistance (R * I)
    double phi_idle;       ///< idle bias, |phi_idle| < 0.5

    /// Throws ValidationError when an invariant does not hold.
    void validate() const;

    /// Q1 / coupler parameters of the measured device, idling at -0.278.
    static CouplerDevice reference();
};

/// omega_max sqrt(|cos(pi phi)|).
double tunable_frequency(double phi, double omega_max);
double coupler_frequency(double phi, const CouplerDevice& device);

enum class Branch { lower, upper };

/// Eigen-branch the qubit occupies at the idle bias: upper if the qubit sits
/// above the coupler there, otherwise lower. Following one eigen-branch keeps
/// the dressed frequency continuous through the avoided crossing.
Branch qubit_branch(const CouplerDevice& device);

/// Eigenvalue of [[omega_q, g], [g, omega_c(phi)]] on the qubit branch.
/// With g = 0 the modes are uncoupled and this returns omega_q.
double dressed_qubit_frequency(double phi, const CouplerDevice& device);

/// Separation of the two dressed branches, 2 sqrt(Delta^2/4 + g^2).
double branch_gap(double phi, const CouplerDevice& device);

/// Flux in [0, 0.5] where omega_c = omega_q, or nullopt if the coupler never
/// reaches the qubit frequency.
std::optional<double> resonance_flux(const CouplerDevice& device);

using FluxWaveform = std::function<double(double)>;

struct RamseyConfig {
    double tau_pulse;
    std::vector<double> delay_grid;           ///< non-negative, strictly increasing
    std::optional<double> t2;                 ///< decay envelope e^{-tau_d/T2}
    std::optional<double> readout_noise_sigma;
    std::uint64_t rng_seed = 0;
    double integration_step = 10e-9;          ///< sub-interval width of the phase quadrature

    void validate() const;
};

struct RamseyTrace {
    std::vector<double> delays;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> phase;  ///< noiseless accumulated phase, rad
};

/// Phase accumulated from the end of the flux pulse,
///   phi(tau_d) = integral_{tau_pulse}^{tau_pulse + tau_d} [w(Phi(t)) - w(Phi_idle)] dt,
/// and <X> = env cos(phi), <Y> = env sin(phi) plus optional Gaussian readout noise.
RamseyTrace simulate_ramsey(const CouplerDevice& device, const FluxWaveform& flux, const RamseyConfig& config);

/// Flux seen by the device for a square pulse of the given amplitude and width
/// after high-pass filtering by the line: phi_idle + A e^{-t/tau} during the
/// pulse and phi_idle + square_pulse_flux_transient(...) afterwards.
FluxWaveform square_transient_flux(double phi_idle, double amplitude, double tau_pulse, double tau);

/// Flux from one period of `pulse` driven through `line`, then V_in = 0:
/// phi_idle + flux_per_volt * R * I(t).
FluxWaveform pulse_flux(const HarmonicPulse& pulse, const RCLine& line, const CouplerDevice& device);

struct Fig1Options {
    double amplitude = 0.1;        ///< flux step of each square pulse
    double pulse_width = 5e-6;
    double pulse_spacing = 15e-6;  ///< rising edge to rising edge
    int pulse_count = 3;
    double lead_in = 5e-6;
    double tail = 20e-6;
    double dt = 20e-9;
};

struct Fig1Demo {
    std::vector<double> t;
    std::vector<double> ideal_flux;
    std::vector<double> distorted_flux;
    std::vector<double> frequency;  ///< rad/s
    double idle_frequency;
    std::vector<double> onset_frequency;      ///< first sample after each rising edge
    std::vector<double> post_pulse_frequency; ///< first sample after each falling edge
};

/// Square pulse train through the RC line (RK4 oracle) mapped to the frequency
/// of a tunable qubit with maximum frequency omega_max.
Fig1Demo fig1_demo(double tau, double omega_max, double phi_idle, const Fig1Options& options = {});

} // namespace fluxshape
