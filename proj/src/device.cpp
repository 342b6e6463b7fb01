#include "fluxshape/device.hpp"

#include "fluxshape/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace fluxshape {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

template <typename Fn>
double integrate(Fn&& fn, double lo, double hi, double max_step) {
    if (hi <= lo) return 0.0;
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / max_step)));
    const double h = (hi - lo) / static_cast<double>(pieces);
    double total = 0.0;
    for (std::size_t p = 0; p < pieces; ++p) {
        const double mid = lo + (static_cast<double>(p) + 0.5) * h;
        double s = 0.0;
        for (std::size_t i = 0; i < kGaussNodes.size(); ++i) s += kGaussWeights[i] * fn(mid + 0.5 * h * kGaussNodes[i]);
        total += 0.5 * h * s;
    }
    return total;
}

// cos(pi x) with exact zeros at half-integers and exact symmetry in x.
double cos_pi(double x) {
    double r = std::fmod(std::abs(x), 2.0);
    if (r > 1.0) r = 2.0 - r;
    return std::sin(std::numbers::pi * (0.5 - r));
}

} // namespace

void CouplerDevice::validate() const {
    if (!(omega_max > 0.0) || !std::isfinite(omega_max)) throw ValidationError("omega_max must be positive");
    if (!(omega_q > 0.0) || !std::isfinite(omega_q)) throw ValidationError("omega_q must be positive");
    if (!(g >= 0.0) || !std::isfinite(g)) throw ValidationError("g must be non-negative");
    if (!std::isfinite(flux_per_volt)) throw ValidationError("flux_per_volt must be finite");
    if (!(std::abs(phi_idle) < 0.5)) throw ValidationError("|phi_idle| must be below 0.5");
}

CouplerDevice CouplerDevice::reference() {
    return {kTwoPi * 4.8575e9, kTwoPi * 4.7730e9, kTwoPi * 63e6, 0.01, -0.278};
}

double tunable_frequency(double phi, double omega_max) {
    return omega_max * std::sqrt(std::abs(cos_pi(phi)));
}

double coupler_frequency(double phi, const CouplerDevice& device) {
    return tunable_frequency(phi, device.omega_max);
}

Branch qubit_branch(const CouplerDevice& device) {
    return device.omega_q > coupler_frequency(device.phi_idle, device) ? Branch::upper : Branch::lower;
}

double dressed_qubit_frequency(double phi, const CouplerDevice& device) {
    if (device.g == 0.0) return device.omega_q;
    const double wc = coupler_frequency(phi, device);
    const double half_delta = 0.5 * (device.omega_q - wc);
    const double mean = 0.5 * (device.omega_q + wc);
    const double split = std::hypot(half_delta, device.g);
    return qubit_branch(device) == Branch::upper ? mean + split : mean - split;
}

double branch_gap(double phi, const CouplerDevice& device) {
    const double half_delta = 0.5 * (device.omega_q - coupler_frequency(phi, device));
    return 2.0 * std::hypot(half_delta, device.g);
}

std::optional<double> resonance_flux(const CouplerDevice& device) {
    if (device.omega_q > device.omega_max) return std::nullopt;
    double lo = 0.0, hi = 0.5;  // omega_c decreases from omega_max to 0 on this interval
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        (coupler_frequency(mid, device) > device.omega_q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void RamseyConfig::validate() const {
    if (!(tau_pulse >= 0.0) || !std::isfinite(tau_pulse)) throw ValidationError("tau_pulse must be non-negative");
    if (delay_grid.empty()) throw ValidationError("delay grid is empty");
    if (!(delay_grid.front() >= 0.0)) throw ValidationError("delays must be non-negative");
    for (std::size_t k = 1; k < delay_grid.size(); ++k) {
        if (!(delay_grid[k] > delay_grid[k - 1])) throw ValidationError("delay grid must be strictly increasing");
    }
    if (t2 && !(*t2 > 0.0)) throw ValidationError("T2 must be positive");
    if (readout_noise_sigma && !(*readout_noise_sigma >= 0.0)) throw ValidationError("noise sigma must be >= 0");
    if (!(integration_step > 0.0)) throw ValidationError("integration_step must be positive");
}

RamseyTrace simulate_ramsey(const CouplerDevice& device, const FluxWaveform& flux, const RamseyConfig& config) {
    device.validate();
    config.validate();

    const double w_idle = dressed_qubit_frequency(device.phi_idle, device);
    auto detuning = [&](double t) {
        const double phi = flux(t);
        if (!std::isfinite(phi)) {
            throw ValidationError("flux waveform returned a non-finite value at t = " + std::to_string(t));
        }
        return dressed_qubit_frequency(phi, device) - w_idle;
    };

    const std::size_t n = config.delay_grid.size();
    RamseyTrace trace{config.delay_grid, std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};

    std::mt19937_64 rng(config.rng_seed);
    std::normal_distribution<double> noise(0.0, config.readout_noise_sigma.value_or(0.0));
    const bool noisy = config.readout_noise_sigma.value_or(0.0) > 0.0;

    double phase = 0.0;
    double t_prev = config.tau_pulse;
    for (std::size_t k = 0; k < n; ++k) {
        const double t_next = config.tau_pulse + config.delay_grid[k];
        phase += integrate(detuning, t_prev, t_next, config.integration_step);
        t_prev = t_next;

        const double env = config.t2 ? std::exp(-config.delay_grid[k] / *config.t2) : 1.0;
        trace.phase[k] = phase;
        trace.x[k] = env * std::cos(phase);
        trace.y[k] = env * std::sin(phase);
        if (noisy) {
            trace.x[k] += noise(rng);
            trace.y[k] += noise(rng);
        }
    }
    return trace;
}

FluxWaveform square_transient_flux(double phi_idle, double amplitude, double tau_pulse, double tau) {
    if (!(tau > 0.0) || !(tau_pulse >= 0.0)) throw ValidationError("square transient needs tau > 0, tau_pulse >= 0");
    return [=](double t) {
        if (t < tau_pulse) return phi_idle + amplitude * std::exp(-std::max(t, 0.0) / tau);
        return square_pulse_flux_transient(amplitude, tau_pulse, tau, t - tau_pulse, phi_idle);
    };
}

FluxWaveform pulse_flux(const HarmonicPulse& pulse, const RCLine& line, const CouplerDevice& device) {
    const double tp = pulse.tau_pulse();
    const double v_c_end = capacitor_voltage(pulse, line, tp);
    const double r = line.resistance();
    const double tau = line.tau();
    const double scale = device.flux_per_volt;
    const double idle = device.phi_idle;
    return [=](double t) {
        if (t <= 0.0) return idle;
        if (t <= tp) return idle + scale * r * line_current(pulse, line, t);
        // Source off: the capacitor discharges through R, R I = -V_c.
        return idle - scale * v_c_end * std::exp(-(t - tp) / tau);
    };
}

Fig1Demo fig1_demo(double tau, double omega_max, double phi_idle, const Fig1Options& o) {
    if (!(tau > 0.0) || !(omega_max > 0.0)) throw ValidationError("tau and omega_max must be positive");
    if (o.pulse_count < 1 || !(o.pulse_width > 0.0) || !(o.pulse_spacing >= o.pulse_width)) {
        throw ValidationError("invalid pulse train");
    }
    const double t_end = o.lead_in + (o.pulse_count - 1) * o.pulse_spacing + o.pulse_width + o.tail;

    auto ideal = [&](double t) {
        const double rel = t - o.lead_in;
        if (rel < 0.0) return 0.0;
        const double within = std::fmod(rel, o.pulse_spacing);
        const auto index = static_cast<int>(std::floor(rel / o.pulse_spacing));
        return (index < o.pulse_count && within < o.pulse_width) ? o.amplitude : 0.0;
    };

    const auto grid = uniform_grid(t_end, o.dt);
    const auto rc = ode_oracle(ideal, RCLine::from_tau(tau), grid, 0.0, o.pulse_width);

    Fig1Demo demo;
    demo.idle_frequency = tunable_frequency(phi_idle, omega_max);
    demo.t = grid;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double in = ideal(grid[k]);
        demo.ideal_flux.push_back(phi_idle + in);
        // Flux follows the current, i.e. the drop across R.
        const double phi = phi_idle + (in - rc[k].v_c);
        demo.distorted_flux.push_back(phi);
        demo.frequency.push_back(tunable_frequency(phi, omega_max));
    }
    auto index_after = [&](double t) {
        return std::min(grid.size() - 1, static_cast<std::size_t>(std::ceil(t / o.dt - 1e-9)) + 1);
    };
    for (int p = 0; p < o.pulse_count; ++p) {
        const double rise = o.lead_in + p * o.pulse_spacing;
        demo.onset_frequency.push_back(demo.frequency[index_after(rise)]);
        demo.post_pulse_frequency.push_back(demo.frequency[index_after(rise + o.pulse_width)]);
    }
    return demo;
}

} // namespace fluxshape
