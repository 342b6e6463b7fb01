#include "fluxshape/rc_response.hpp"

#include "fluxshape/errors.hpp"

#include <cmath>
#include <string>

namespace fluxshape {

namespace {

// Filtered harmonic amplitudes of the capacitor voltage:
//   cos term (a_n - x b_n)/(1+x^2), sin term (x a_n + b_n)/(1+x^2), x = n w tau.
struct FilteredHarmonic {
    double n;
    double cos_coeff;
    double sin_coeff;
};

template <typename Fn>
void for_each_harmonic(const HarmonicPulse& pulse, double tau, Fn&& fn) {
    const double wt = pulse.omega() * tau;
    const auto a = pulse.a();
    const auto b = pulse.b();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        const double x = n * wt;
        const double denom = 1.0 + x * x;
        fn(FilteredHarmonic{n, (a[i] - x * b[i]) / denom, (x * a[i] + b[i]) / denom});
    }
}

} // namespace

RCLine::RCLine(double resistance, double capacitance) : r_(resistance), c_(capacitance) {
    if (!(std::isfinite(r_) && r_ > 0.0)) throw ValidationError("resistance must be positive");
    if (!(std::isfinite(c_) && c_ > 0.0)) throw ValidationError("capacitance must be positive");
}

RCLine RCLine::from_tau(double tau, double resistance) {
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    return {resistance, tau / resistance};
}

double k_exp(const HarmonicPulse& pulse, double tau) {
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    double k = pulse.a0();
    for_each_harmonic(pulse, tau, [&](const FilteredHarmonic& h) { k += h.cos_coeff; });
    return k;
}

double steady_state_voltage(const HarmonicPulse& pulse, const RCLine& line, double t) {
    const double w = pulse.omega();
    double v = pulse.a0();
    for_each_harmonic(pulse, line.tau(), [&](const FilteredHarmonic& h) {
        v += h.cos_coeff * std::cos(h.n * w * t) + h.sin_coeff * std::sin(h.n * w * t);
    });
    return v;
}

double capacitor_voltage(const HarmonicPulse& pulse, const RCLine& line, double t) {
    const double tau = line.tau();
    return steady_state_voltage(pulse, line, t) - k_exp(pulse, tau) * std::exp(-t / tau);
}

double line_current(const HarmonicPulse& pulse, const RCLine& line, double t) {
    const double tau = line.tau();
    const double w = pulse.omega();
    double oscillating = 0.0;
    for_each_harmonic(pulse, tau, [&](const FilteredHarmonic& h) {
        oscillating += h.n * (h.sin_coeff * std::cos(h.n * w * t) - h.cos_coeff * std::sin(h.n * w * t));
    });
    return k_exp(pulse, tau) * std::exp(-t / tau) / line.resistance() +
           line.capacitance() * w * oscillating;
}

std::vector<RCSample> ode_oracle(const std::function<double(double)>& v_in, const RCLine& line,
                                 std::span<const double> t_grid, double v_c_initial,
                                 double signal_timescale) {
    const double tau = line.tau();
    if (t_grid.empty()) return {};
    if (!(signal_timescale > 0.0)) throw ValidationError("signal_timescale must be positive");
    const double max_step = std::min(tau / 50.0, signal_timescale / 200.0);
    // Grids built by accumulation drift by a few ulps; allow that much slack.
    const double slack = 1.0 + 1e-9;
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double h = t_grid[k] - t_grid[k - 1];
        if (!(h > 0.0)) throw ValidationError("t_grid must be strictly increasing");
        if (h > max_step * slack) {
            throw ValidationError("ode_oracle step " + std::to_string(h) + " s exceeds limit " +
                                  std::to_string(max_step) + " s");
        }
    }

    const double r = line.resistance();
    auto rhs = [&](double t, double vc) { return (v_in(t) - vc) / tau; };

    std::vector<RCSample> out;
    out.reserve(t_grid.size());
    double vc = v_c_initial;
    out.push_back({t_grid[0], vc, (v_in(t_grid[0]) - vc) / r});
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double t = t_grid[k - 1];
        const double h = t_grid[k] - t;
        const double k1 = rhs(t, vc);
        const double k2 = rhs(t + 0.5 * h, vc + 0.5 * h * k1);
        const double k3 = rhs(t + 0.5 * h, vc + 0.5 * h * k2);
        const double k4 = rhs(t + h, vc + h * k3);
        vc += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push_back({t_grid[k], vc, (v_in(t_grid[k]) - vc) / r});
    }
    return out;
}

std::vector<double> uniform_grid(double t_end, double step) {
    if (!(step > 0.0) || !(t_end >= 0.0)) throw ValidationError("grid requires step > 0 and t_end >= 0");
    const auto n = static_cast<std::size_t>(std::floor(t_end / step + 1e-9));
    std::vector<double> grid(n + 1);
    for (std::size_t k = 0; k <= n; ++k) grid[k] = static_cast<double>(k) * step;
    return grid;
}

double square_pulse_flux_transient(double amplitude, double tau_pulse, double tau, double t_delay,
                                   double baseline) {
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    if (!(tau_pulse >= 0.0)) throw ValidationError("tau_pulse must be non-negative");
    if (!(t_delay >= 0.0)) throw ValidationError("t_delay must be non-negative");
    // -e^{-d/tau} (1 - e^{-tp/tau}) written with expm1 so tau_pulse -> 0 is exact.
    return amplitude * std::exp(-t_delay / tau) * std::expm1(-tau_pulse / tau) + baseline;
}

} // namespace fluxshape
