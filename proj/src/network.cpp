#include "fluxshape/network.hpp"

#include "fluxshape/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

namespace fluxshape {

namespace {

constexpr long double kTwoPi = 2.0L * std::numbers::pi_v<long double>;
using entry = TwoPort::entry;

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

} // namespace

void validate(const WiringElement& element) {
    std::visit(overloaded{
                   [](const wiring::Attenuator& e) {
                       if (!(e.db >= 0.0) || !std::isfinite(e.db)) throw ValidationError("attenuation must be >= 0 dB");
                   },
                   [](const wiring::SeriesCapacitor& e) {
                       if (!positive(e.farads)) throw ValidationError("capacitance must be positive");
                   },
                   [](const wiring::SeriesResistor& e) {
                       if (!positive(e.ohms)) throw ValidationError("resistance must be positive");
                   },
                   [](const wiring::TransmissionLine& e) {
                       if (!positive(e.z0_ohms) || !positive(e.delay_s)) {
                           throw ValidationError("transmission line needs positive Z0 and delay");
                       }
                   },
                   [](const wiring::SeriesInductor& e) {
                       if (!positive(e.henries)) throw ValidationError("inductance must be positive");
                   },
               },
               element);
}

PiResistors pi_attenuator_resistors(double db, double z0) {
    if (!(db > 0.0)) throw ValidationError("pi synthesis needs attenuation > 0 dB");
    const double k = std::pow(10.0, db / 20.0);
    return {z0 * (k + 1.0) / (k - 1.0), z0 * (k * k - 1.0) / (2.0 * k)};
}

TwoPort element_abcd(const WiringElement& element, double f_hz) {
    if (!(f_hz > 0.0) || !std::isfinite(f_hz)) throw ValidationError("frequency must be positive");
    validate(element);
    const long double w = kTwoPi * f_hz;
    return std::visit(overloaded{
                          [](const wiring::Attenuator& e) {
                              if (e.db == 0.0) return TwoPort::identity();
                              const auto r = pi_attenuator_resistors(e.db);
                              const TwoPort shunt = TwoPort::shunt(1.0L / r.shunt);
                              return shunt * TwoPort::series(r.series) * shunt;
                          },
                          [w](const wiring::SeriesCapacitor& e) {
                              return TwoPort::series(1.0L / entry(0.0L, w * e.farads));
                          },
                          [](const wiring::SeriesResistor& e) { return TwoPort::series(e.ohms); },
                          [w](const wiring::TransmissionLine& e) {
                              const long double theta = w * e.delay_s;
                              const long double c = std::cos(theta), s = std::sin(theta);
                              return TwoPort{c, entry(0.0L, e.z0_ohms * s), entry(0.0L, s / e.z0_ohms), c};
                          },
                          [w](const wiring::SeriesInductor& e) {
                              return TwoPort::series(entry(0.0L, w * e.henries));
                          },
                      },
                      element);
}

TwoPort cascade(std::span<const WiringElement> elements, double f_hz) {
    if (elements.empty()) throw ValidationError("cascade needs at least one element");
    TwoPort total = element_abcd(elements.front(), f_hz);
    for (std::size_t i = 1; i < elements.size(); ++i) total = total * element_abcd(elements[i], f_hz);
    return total;
}

complex input_impedance(const TwoPort& network, complex load) {
    const entry zl(load.real(), load.imag());
    const entry denom = network.c * zl + network.d;
    if (std::abs(denom) < 1e-15L) throw SingularTerminationError("singular termination: |C Z_L + D| < 1e-15");
    const entry z = (network.a * zl + network.b) / denom;
    return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

ImpedanceSweep sweep_and_fit_rc(std::span<const WiringElement> elements, complex load,
                                std::span<const double> f_grid, double fit_band_hz) {
    if (f_grid.empty()) throw ValidationError("frequency grid is empty");
    for (std::size_t k = 0; k < f_grid.size(); ++k) {
        if (!(f_grid[k] > 0.0)) throw ValidationError("frequencies must be positive");
        if (k > 0 && !(f_grid[k] > f_grid[k - 1])) throw ValidationError("frequency grid must be ascending");
    }

    ImpedanceSweep out;
    out.fit_band_hz = fit_band_hz;
    out.f_hz.assign(f_grid.begin(), f_grid.end());
    for (double f : f_grid) out.z_in.push_back(input_impedance(cascade(elements, f), load));

    std::vector<std::size_t> band;
    for (std::size_t k = 0; k < f_grid.size(); ++k) {
        if (f_grid[k] <= fit_band_hz) band.push_back(k);
    }
    out.fit_points = band.size();
    if (band.size() < 2) throw ValidationError("fewer than two frequencies inside the RC fit band");

    // |Z|^2 = R^2 + (1/C^2) / w^2 is linear in (R^2, 1/C^2); that solve seeds a
    // Gauss-Newton refinement of the magnitude residuals in (ln R, ln C).
    const auto m = static_cast<Eigen::Index>(band.size());
    Eigen::MatrixXd lin(m, 2);
    Eigen::VectorXd mag(m), mag2(m), inv_w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t k = band[static_cast<std::size_t>(i)];
        const double w = kTwoPi * f_grid[k];
        inv_w(i) = 1.0 / w;
        mag(i) = std::abs(out.z_in[k]);
        mag2(i) = mag(i) * mag(i);
        lin(i, 0) = 1.0;
        lin(i, 1) = inv_w(i) * inv_w(i);
    }
    // Relative weighting keeps the low-frequency points from dominating.
    const Eigen::VectorXd rel = mag2.cwiseInverse();
    const Eigen::Vector2d sol = (rel.asDiagonal() * lin).colPivHouseholderQr().solve(rel.asDiagonal() * mag2);
    double r = std::sqrt(std::max(sol(0), 1e-30));
    double c = 1.0 / std::sqrt(std::max(sol(1), 1e-300));

    auto model = [&](double rr, double cc, Eigen::Index i) { return std::hypot(rr, inv_w(i) / cc); };
    for (int iter = 0; iter < 50; ++iter) {
        Eigen::MatrixXd jac(m, 2);
        Eigen::VectorXd res(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double zc = inv_w(i) / c;
            const double zm = model(r, c, i);
            res(i) = (zm - mag(i)) / mag(i);
            jac(i, 0) = r * r / zm / mag(i);         // d|Z|/d ln R
            jac(i, 1) = -zc * zc / zm / mag(i);      // d|Z|/d ln C
        }
        const Eigen::Vector2d step = jac.colPivHouseholderQr().solve(-res);
        r *= std::exp(step(0));
        c *= std::exp(step(1));
        if (step.cwiseAbs().maxCoeff() < 1e-14) break;
    }

    double ss = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double e = model(r, c, i) - mag(i);
        ss += e * e;
    }
    out.effective_r = r;
    out.effective_c = c;
    out.fit_rms = std::sqrt(ss / static_cast<double>(m));
    return out;
}

std::vector<WiringElement> default_wiring_chain(double bias_tee_farads) {
    return {wiring::SeriesCapacitor{bias_tee_farads}, wiring::Attenuator{20.0}, wiring::Attenuator{3.0},
            wiring::Attenuator{20.0}, wiring::Attenuator{3.0}, wiring::Attenuator{20.0},
            wiring::SeriesInductor{1e-9}};
}

} // namespace fluxshape
