#pragma once

#include "fluxshape/pulse.hpp"

#include <functional>
#include <span>
#include <vector>

namespace fluxshape {

/// First-order series RC model of a flux control line. tau = R * C.
class RCLine {
public:
    RCLine(double resistance, double capacitance);

    /// Line with the given time constant and resistance (C = tau / R).
    static RCLine from_tau(double tau, double resistance = 50.0);

    double resistance() const noexcept { return r_; }
    double capacitance() const noexcept { return c_; }
    double tau() const noexcept { return r_ * c_; }

private:
    double r_;
    double c_;
};

/// Coefficient of the decaying e^{-t/tau} term in the delivered current (times R):
///   k_exp = a0 + sum_n (a_n - n w tau b_n) / (1 + (n w tau)^2).
/// Zero is Condition II (transient cancellation).
double k_exp(const HarmonicPulse& pulse, double tau);

/// Closed-form capacitor voltage for a pulse switched on at t = 0 with V_c(0) = 0.
double capacitor_voltage(const HarmonicPulse& pulse, const RCLine& line, double t);

/// Capacitor voltage with the transient term removed (DC plus filtered harmonics).
double steady_state_voltage(const HarmonicPulse& pulse, const RCLine& line, double t);

/// I(t) = C dV_c/dt; the transient term is (k_exp / R) e^{-t/tau}.
double line_current(const HarmonicPulse& pulse, const RCLine& line, double t);

struct RCSample {
    double t;
    double v_c;
    double current;
};

/// Fixed-step classical RK4 integration of tau dV_c/dt + V_c = V_in on t_grid.
///
/// The grid must be strictly increasing with every step <= tau/50 and
/// <= signal_timescale/200 (signal_timescale is the shortest feature of v_in
/// you care about, e.g. the pulse period). Current is (V_in - V_c)/R.
std::vector<RCSample> ode_oracle(const std::function<double(double)>& v_in, const RCLine& line,
                                 std::span<const double> t_grid, double v_c_initial,
                                 double signal_timescale);

/// t = 0, step, 2 step, ... up to and including t_end (within rounding).
std::vector<double> uniform_grid(double t_end, double step);

/// Residual flux t_delay after a square pulse of width tau_pulse filtered by the
/// high-pass response of the line:
///   A (-e^{-t_delay/tau} + e^{-(t_delay + tau_pulse)/tau}) + B.
double square_pulse_flux_transient(double amplitude, double tau_pulse, double tau, double t_delay,
                                   double baseline = 0.0);

} // namespace fluxshape
