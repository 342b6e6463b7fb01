#include "fluxshape/pulse.hpp"

#include "fluxshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fluxshape {

namespace {

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

HarmonicPulse::HarmonicPulse(double tau_pulse, double a0, std::vector<double> a, std::vector<double> b)
    : tau_pulse_(tau_pulse), a0_(a0), a_(std::move(a)), b_(std::move(b)) {
    if (!(std::isfinite(tau_pulse_) && tau_pulse_ > 0.0)) {
        throw ValidationError("tau_pulse must be positive and finite, got " + std::to_string(tau_pulse_));
    }
    if (a_.size() != b_.size()) {
        throw ValidationError("cosine and sine coefficient lists differ in length (" +
                              std::to_string(a_.size()) + " vs " + std::to_string(b_.size()) + ")");
    }
    if (!std::isfinite(a0_) || !all_finite(a_) || !all_finite(b_)) {
        throw ValidationError("pulse coefficients must be finite");
    }
}

HarmonicPulse HarmonicPulse::zero(double tau_pulse, std::size_t harmonics) {
    return {tau_pulse, 0.0, std::vector<double>(harmonics, 0.0), std::vector<double>(harmonics, 0.0)};
}

double HarmonicPulse::omega() const noexcept { return 2.0 * std::numbers::pi / tau_pulse_; }

double HarmonicPulse::max_abs_coefficient() const noexcept {
    double m = std::abs(a0_);
    for (std::size_t i = 0; i < a_.size(); ++i) {
        m = std::max({m, std::abs(a_[i]), std::abs(b_[i])});
    }
    return m;
}

HarmonicPulse HarmonicPulse::operator+(const HarmonicPulse& other) const {
    if (tau_pulse_ != other.tau_pulse_) {
        throw ValidationError("cannot add pulses with different tau_pulse");
    }
    const std::size_t n = std::max(a_.size(), other.a_.size());
    std::vector<double> a(n, 0.0), b(n, 0.0);
    for (std::size_t i = 0; i < a_.size(); ++i) {
        a[i] += a_[i];
        b[i] += b_[i];
    }
    for (std::size_t i = 0; i < other.a_.size(); ++i) {
        a[i] += other.a_[i];
        b[i] += other.b_[i];
    }
    return {tau_pulse_, a0_ + other.a0_, std::move(a), std::move(b)};
}

HarmonicPulse HarmonicPulse::operator*(double scale) const {
    std::vector<double> a(a_), b(b_);
    for (auto& x : a) x *= scale;
    for (auto& x : b) x *= scale;
    return {tau_pulse_, a0_ * scale, std::move(a), std::move(b)};
}

double evaluate(const HarmonicPulse& pulse, double t) {
    const double w = pulse.omega();
    const auto a = pulse.a();
    const auto b = pulse.b();
    double v = pulse.a0();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double phase = static_cast<double>(i + 1) * w * t;
        v += a[i] * std::cos(phase) + b[i] * std::sin(phase);
    }
    return v;
}

double condition_one_residual(const HarmonicPulse& pulse) {
    double s = pulse.a0();
    for (double an : pulse.a()) s += an;
    return s;
}

double condition_three_residual(const HarmonicPulse& pulse, double tau) {
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    const double wt = pulse.omega() * tau;
    const auto a = pulse.a();
    const auto b = pulse.b();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        const double x = n * wt;
        s += n * (x * a[i] + b[i]) / (1.0 + x * x);
    }
    return s;
}

std::vector<SignalSample> sample(const HarmonicPulse& pulse, double dt, int n_periods) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
    if (n_periods < 1) throw ValidationError("n_periods must be a positive integer");
    if (dt > pulse.tau_pulse() / 4.0) {
        throw ValidationError("dt exceeds tau_pulse/4; the fundamental would be undersampled");
    }
    const auto count = static_cast<std::size_t>(std::llround(n_periods * pulse.tau_pulse() / dt));
    std::vector<SignalSample> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) * dt;
        out.push_back({t, evaluate(pulse, t)});
    }
    return out;
}

} // namespace fluxshape
