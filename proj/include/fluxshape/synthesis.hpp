#pragma once

#include "fluxshape/pulse.hpp"

#include <span>
#include <vector>

namespace fluxshape {

/// Assumed time constant = m * true time constant. m > 1 overestimates.
class MischarModel {
public:
    MischarModel(double tau_true, double m);

    double tau_true() const noexcept { return tau_true_; }
    double m() const noexcept { return m_; }
    double tau_assumed() const noexcept { return m_ * tau_true_; }

private:
    double tau_true_;
    double m_;
};

/// b1 sin(wt) + b2 sin(2wt) with b2 = -(b1/2)(1+(2 w tau)^2)/(1+(w tau)^2),
/// which cancels k_exp for a line whose time constant is tau_assumed.
HarmonicPulse solve_biharmonic(double b1, double omega, double tau_assumed);

struct TopHarmonicDesign {
    HarmonicPulse pulse;
    /// Condition III residual at tau_assumed; not enforced by the construction.
    double condition_three_residual;
};

/// Extends N-1 given harmonics with an N-th harmonic chosen so that
/// Condition I holds (a_N = -(a0 + sum a_n)) and k_exp vanishes at tau_assumed.
/// Throws DegenerateDesignError if the b_N multiplier of Condition II is too
/// small to cancel the remaining terms.
TopHarmonicDesign solve_top_harmonic(double a0, std::span<const double> a, std::span<const double> b,
                                     double omega, double tau_assumed);

/// k_exp at tau_true of the bi-harmonic pulse designed for m * tau_true.
double residual_kexp_mischaracterized(double b1, double omega, double tau_true, double m);

enum class PulseFamily { cosine_only, sine_only, biharmonic };

/// Dominant-term approximations of k_exp for heavily overestimated tau (m >> 1)
/// with a0 = 0 and w tau > 1:
///   cosine_only: coeffs are a_1..a_{N-1};
///   sine_only:   coeffs are b_1..b_{N-1};
///   biharmonic:  coeffs = {b1}, returns 3 b1 / (4 (w tau)^3).
/// Throws ValidationError for w tau <= 1.
double asymptotic_kexp(PulseFamily family, std::span<const double> coeffs, double omega, double tau);

/// k_exp of b1 sin(wt) - 2 b1 sin(2wt) at w tau = omega_tau:
///   3 b1 x / (1 + 5x^2 + 4x^4).
double biharmonic_limit_kexp(double b1, double omega_tau);

} // namespace fluxshape
