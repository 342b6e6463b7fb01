#pragma once

#include "fluxshape/pulse.hpp"
#include "fluxshape/rc_response.hpp"

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace fluxshape {

/// Angular frequency of the 8 us pulses used throughout the measurements.
inline constexpr double kReferenceOmega = 2.0 * std::numbers::pi / 8e-6;

/// k_exp over (w tau, m); row i is omega_tau_values[i], column j is m_values[j].
struct SweepGrid {
    std::vector<double> omega_tau_values;
    std::vector<double> m_values;
    std::vector<double> k_exp;  // row-major, omega_tau_values.size() * m_values.size()

    double at(std::size_t i, std::size_t j) const { return k_exp[i * m_values.size() + j]; }
};

/// count points log-spaced on [lo, hi], endpoints exact.
std::vector<double> logspace(double lo, double hi, std::size_t count);

/// 50 points on [1, 30] in w tau.
std::vector<double> default_omega_tau_axis();
/// 50 points on [0.01, 100] in m.
std::vector<double> default_m_axis();

/// Cells are independent; the result does not depend on thread count.
SweepGrid sweep_kexp(double b1, std::span<const double> omega_tau_values, std::span<const double> m_values,
                     double omega = kReferenceOmega, unsigned threads = 0);

struct KexpComparison {
    double single_sine;  ///< b = [b1]
    double biharmonic;   ///< b = [b1, -2 b1], the m >> 1 design
};

KexpComparison compare_single_vs_biharmonic(double b1, double omega, double tau);

struct NetZeroMetrics {
    double input_area;      ///< integral of V_in over one period, V s
    double capacitor_area;  ///< integral of V_c over the first period from rest, V s
};

/// Closed-form areas over [0, tau_pulse]. Harmonics integrate to zero, so
/// input_area = a0 tau_pulse and capacitor_area = a0 tau_pulse - k_exp tau (1 - e^{-tau_pulse/tau}).
NetZeroMetrics net_zero_metrics(const HarmonicPulse& pulse, const RCLine& line);

/// Composite Simpson cross-check of net_zero_metrics with an even number of intervals.
NetZeroMetrics net_zero_metrics_quadrature(const HarmonicPulse& pulse, const RCLine& line,
                                           std::size_t intervals = 4096);

struct PhaseStatistics {
    std::size_t count;
    double mean;
    double standard_deviation;  ///< n-1 denominator
    double mean_stderr;         ///< s / sqrt(n)
    double std_stderr;          ///< s / sqrt(2 (n-1)), normal-theory approximation
};

PhaseStatistics phase_statistics(std::span<const double> samples);

} // namespace fluxshape
