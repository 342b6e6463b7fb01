#include "fluxshape/synthesis.hpp"

#include "fluxshape/errors.hpp"
#include "fluxshape/rc_response.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fluxshape {

namespace {

constexpr double kMinTopMultiplier = 1e-12;

double period_of(double omega) {
    if (!(std::isfinite(omega) && omega > 0.0)) throw ValidationError("omega must be positive");
    return 2.0 * std::numbers::pi / omega;
}

} // namespace

MischarModel::MischarModel(double tau_true, double m) : tau_true_(tau_true), m_(m) {
    if (!(tau_true_ > 0.0)) throw ValidationError("tau_true must be positive");
    if (!(m_ > 0.0)) throw ValidationError("estimation factor m must be positive");
}

HarmonicPulse solve_biharmonic(double b1, double omega, double tau_assumed) {
    if (b1 == 0.0 || !std::isfinite(b1)) throw ValidationError("b1 must be non-zero and finite");
    if (!(tau_assumed > 0.0)) throw ValidationError("tau_assumed must be positive");
    const double tau_pulse = period_of(omega);
    const double x = omega * tau_assumed;
    // (1+4x^2)/(1+x^2) = 4 - 3/(1+x^2) stays accurate for x -> infinity.
    const double b2 = -0.5 * b1 * (4.0 - 3.0 / (1.0 + x * x));
    return {tau_pulse, 0.0, {0.0, 0.0}, {b1, b2}};
}

TopHarmonicDesign solve_top_harmonic(double a0, std::span<const double> a, std::span<const double> b,
                                     double omega, double tau_assumed) {
    if (a.size() != b.size()) throw ValidationError("lower cosine and sine lists differ in length");
    if (a.empty()) throw ValidationError("top-harmonic design needs at least one lower harmonic (N >= 2)");
    if (!(tau_assumed > 0.0)) throw ValidationError("tau_assumed must be positive");
    const double tau_pulse = period_of(omega);

    std::vector<double> coeff_a(a.begin(), a.end());
    std::vector<double> coeff_b(b.begin(), b.end());
    const double n_top = static_cast<double>(a.size() + 1);
    const double x_top = n_top * omega * tau_assumed;

    const double a_top = -(a0 + [&] {
        double s = 0.0;
        for (double an : a) s += an;
        return s;
    }());

    // Condition II: lower + (a_N - x_N b_N)/(1+x_N^2) = 0, solved for b_N.
    const double lower = k_exp(HarmonicPulse(tau_pulse, a0, coeff_a, coeff_b), tau_assumed);
    const double denom = 1.0 + x_top * x_top;
    const double multiplier = x_top / denom;
    if (!(multiplier >= kMinTopMultiplier)) {
        throw DegenerateDesignError("top-harmonic multiplier N w tau/(1+(N w tau)^2) = " +
                                    std::to_string(multiplier) +
                                    "; Condition II cannot be met by b_N (tau_assumed too small or too large)");
    }
    const double b_top = (lower + a_top / denom) / multiplier;

    coeff_a.push_back(a_top);
    coeff_b.push_back(b_top);
    HarmonicPulse pulse(tau_pulse, a0, std::move(coeff_a), std::move(coeff_b));
    const double cond3 = condition_three_residual(pulse, tau_assumed);
    return {std::move(pulse), cond3};
}

double residual_kexp_mischaracterized(double b1, double omega, double tau_true, double m) {
    const MischarModel model(tau_true, m);
    return k_exp(solve_biharmonic(b1, omega, model.tau_assumed()), model.tau_true());
}

double asymptotic_kexp(PulseFamily family, std::span<const double> coeffs, double omega, double tau) {
    const double wt = omega * tau;
    if (!(wt > 1.0)) {
        throw ValidationError("asymptotic k_exp requires w tau > 1, got " + std::to_string(wt));
    }
    if (coeffs.empty()) throw ValidationError("asymptotic k_exp needs at least one coefficient");

    const double n_top = static_cast<double>(coeffs.size() + 1);
    const double x_top = n_top * wt;
    double direct = 0.0;
    double weighted = 0.0;
    switch (family) {
    case PulseFamily::cosine_only:
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            const double n = static_cast<double>(i + 1);
            direct += coeffs[i] / (1.0 + n * n * wt * wt);
            weighted += coeffs[i] / (n * n);
        }
        return direct - n_top * n_top / (1.0 + x_top * x_top) * weighted;
    case PulseFamily::sine_only:
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            const double n = static_cast<double>(i + 1);
            direct += -n * wt * coeffs[i] / (1.0 + n * n * wt * wt);
            weighted += coeffs[i] / n;
        }
        return direct + n_top * n_top * wt / (1.0 + x_top * x_top) * weighted;
    case PulseFamily::biharmonic:
        if (coeffs.size() != 1) throw ValidationError("biharmonic family takes exactly one coefficient (b1)");
        return 3.0 * coeffs[0] / (4.0 * wt * wt * wt);
    }
    throw ValidationError("unknown pulse family");
}

double biharmonic_limit_kexp(double b1, double omega_tau) {
    const double x2 = omega_tau * omega_tau;
    return 3.0 * b1 * omega_tau / (1.0 + 5.0 * x2 + 4.0 * x2 * x2);
}

} // namespace fluxshape
