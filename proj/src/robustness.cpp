#include "fluxshape/robustness.hpp"

#include "fluxshape/errors.hpp"
#include "fluxshape/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace fluxshape {

std::vector<double> logspace(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0 && hi >= lo)) throw ValidationError("logspace needs 0 < lo <= hi");
    if (count < 2) return {lo};
    std::vector<double> out(count);
    const double l0 = std::log10(lo);
    const double step = (std::log10(hi) - l0) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = std::pow(10.0, l0 + step * static_cast<double>(i));
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> default_omega_tau_axis() { return logspace(1.0, 30.0, 50); }
std::vector<double> default_m_axis() { return logspace(0.01, 100.0, 50); }

SweepGrid sweep_kexp(double b1, std::span<const double> omega_tau_values, std::span<const double> m_values,
                     double omega, unsigned threads) {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!std::all_of(omega_tau_values.begin(), omega_tau_values.end(), positive) ||
        !std::all_of(m_values.begin(), m_values.end(), positive)) {
        throw ValidationError("sweep grid values must be positive and finite");
    }
    if (!(omega > 0.0)) throw ValidationError("omega must be positive");

    SweepGrid grid{{omega_tau_values.begin(), omega_tau_values.end()},
                   {m_values.begin(), m_values.end()},
                   std::vector<double>(omega_tau_values.size() * m_values.size(), 0.0)};
    const std::size_t rows = grid.omega_tau_values.size();
    const std::size_t cols = grid.m_values.size();

    auto fill_rows = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double tau = grid.omega_tau_values[i] / omega;
            for (std::size_t j = 0; j < cols; ++j) {
                grid.k_exp[i * cols + j] = residual_kexp_mischaracterized(b1, omega, tau, grid.m_values[j]);
            }
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(rows, 1)));
    if (threads <= 1) {
        fill_rows(0, rows);
        return grid;
    }
    std::vector<std::jthread> workers;
    const std::size_t chunk = (rows + threads - 1) / threads;
    for (std::size_t begin = 0; begin < rows; begin += chunk) {
        workers.emplace_back(fill_rows, begin, std::min(rows, begin + chunk));
    }
    workers.clear();
    return grid;
}

KexpComparison compare_single_vs_biharmonic(double b1, double omega, double tau) {
    if (!(omega > 0.0) || !(tau > 0.0)) throw ValidationError("omega and tau must be positive");
    const double tau_pulse = 2.0 * std::numbers::pi / omega;
    const HarmonicPulse single(tau_pulse, 0.0, {0.0}, {b1});
    const HarmonicPulse bi(tau_pulse, 0.0, {0.0, 0.0}, {b1, -2.0 * b1});
    return {k_exp(single, tau), k_exp(bi, tau)};
}

NetZeroMetrics net_zero_metrics(const HarmonicPulse& pulse, const RCLine& line) {
    const double tp = pulse.tau_pulse();
    const double tau = line.tau();
    const double dc = pulse.a0() * tp;
    // integral_0^tp -k e^{-t/tau} dt = k tau expm1(-tp/tau)
    return {dc, dc + k_exp(pulse, tau) * tau * std::expm1(-tp / tau)};
}

NetZeroMetrics net_zero_metrics_quadrature(const HarmonicPulse& pulse, const RCLine& line,
                                           std::size_t intervals) {
    if (intervals < 2) throw ValidationError("need at least two quadrature intervals");
    if (intervals % 2 != 0) ++intervals;
    const double tp = pulse.tau_pulse();
    const double h = tp / static_cast<double>(intervals);
    double in = 0.0, cap = 0.0;
    for (std::size_t k = 0; k <= intervals; ++k) {
        const double t = static_cast<double>(k) * h;
        const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        in += w * evaluate(pulse, t);
        cap += w * capacitor_voltage(pulse, line, t);
    }
    return {in * h / 3.0, cap * h / 3.0};
}

PhaseStatistics phase_statistics(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw ValidationError("phase statistics need at least two samples");
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return {n, mean, sd, sd / std::sqrt(static_cast<double>(n)),
            sd / std::sqrt(2.0 * static_cast<double>(n - 1))};
}

} // namespace fluxshape
