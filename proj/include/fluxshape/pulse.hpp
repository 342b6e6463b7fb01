#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fluxshape {

/**
 * Periodic input voltage expressed as a truncated sine-cosine Fourier series
 *
 *   V_in(t) = a0 + sum_{n=1..N} [a_n cos(n w t) + b_n sin(n w t)],  w = 2 pi / tau_pulse.
 *
 * Coefficients are in volts (AWG output). The fundamental angular frequency is
 * always derived from tau_pulse. N = 0 (DC only) is allowed.
 */
class HarmonicPulse {
public:
    /// Throws ValidationError if tau_pulse is not positive and finite, if the
    /// coefficient lists differ in length, or if any coefficient is non-finite.
    HarmonicPulse(double tau_pulse, double a0, std::vector<double> a, std::vector<double> b);

    /// Zero signal with N harmonics.
    static HarmonicPulse zero(double tau_pulse, std::size_t harmonics = 0);

    double tau_pulse() const noexcept { return tau_pulse_; }
    double omega() const noexcept;
    double a0() const noexcept { return a0_; }
    /// Cosine coefficients a_1..a_N; element [n-1] is harmonic n.
    std::span<const double> a() const noexcept { return a_; }
    /// Sine coefficients b_1..b_N; element [n-1] is harmonic n.
    std::span<const double> b() const noexcept { return b_; }
    std::size_t harmonics() const noexcept { return a_.size(); }

    /// Largest absolute coefficient, including a0.
    double max_abs_coefficient() const noexcept;

    /// Coefficient-wise sum; both pulses must share tau_pulse (harmonic counts may differ).
    HarmonicPulse operator+(const HarmonicPulse& other) const;
    HarmonicPulse operator*(double scale) const;

    bool operator==(const HarmonicPulse&) const = default;

private:
    double tau_pulse_;
    double a0_;
    std::vector<double> a_;
    std::vector<double> b_;
};

struct SignalSample {
    double t;
    double v;
};

double evaluate(const HarmonicPulse& pulse, double t);

/// a0 + sum a_n. Zero iff V_in(0) = V_in(tau_pulse) = 0.
double condition_one_residual(const HarmonicPulse& pulse);

/// sum_n n (n w tau a_n + b_n) / (1 + (n w tau)^2). Zero iff the delivered
/// current (and flux) starts and ends at zero.
double condition_three_residual(const HarmonicPulse& pulse, double tau);

/// Uniform samples t_k = k dt, k = 0 .. round(n_periods tau_pulse / dt) - 1.
/// Rejects dt > tau_pulse / 4.
std::vector<SignalSample> sample(const HarmonicPulse& pulse, double dt, int n_periods);

} // namespace fluxshape
