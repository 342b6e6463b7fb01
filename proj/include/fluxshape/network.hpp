#pragma once

#include <complex>
#include <span>
#include <variant>
#include <vector>

namespace fluxshape {

using complex = std::complex<double>;

/// ABCD (transmission) matrix of a linear two-port. B in ohms, C in siemens.
/// Entries are extended precision so that long cascades keep AD - BC = 1.
struct TwoPort {
    using entry = std::complex<long double>;

    entry a{1.0L, 0.0L};
    entry b{0.0L, 0.0L};
    entry c{0.0L, 0.0L};
    entry d{1.0L, 0.0L};

    static TwoPort identity() { return {}; }
    static TwoPort series(entry z) { return {1.0L, z, 0.0L, 1.0L}; }
    static TwoPort shunt(entry y) { return {1.0L, 0.0L, y, 1.0L}; }

    entry determinant() const { return a * d - b * c; }

    /// Cascade: *this feeds `next` (source side on the left).
    TwoPort operator*(const TwoPort& next) const {
        return {a * next.a + b * next.c, a * next.b + b * next.d,
                c * next.a + d * next.c, c * next.b + d * next.d};
    }
};

namespace wiring {

/// Matched resistive pi attenuator for a 50 ohm system.
struct Attenuator { double db; };
struct SeriesCapacitor { double farads; };
struct SeriesResistor { double ohms; };
/// Lossless line.
struct TransmissionLine { double z0_ohms; double delay_s; };
struct SeriesInductor { double henries; };

} // namespace wiring

using WiringElement = std::variant<wiring::Attenuator, wiring::SeriesCapacitor, wiring::SeriesResistor,
                                   wiring::TransmissionLine, wiring::SeriesInductor>;

/// Throws ValidationError for non-positive parameters or negative attenuation.
void validate(const WiringElement& element);

inline constexpr double kSystemImpedance = 50.0;

/// Shunt and series resistors of the pi attenuator: shunt = Z0 (K+1)/(K-1),
/// series = Z0 (K^2-1)/(2K), K = 10^{dB/20}.
struct PiResistors {
    double shunt;
    double series;
};
PiResistors pi_attenuator_resistors(double db, double z0 = kSystemImpedance);

TwoPort element_abcd(const WiringElement& element, double f_hz);

/// Product of element matrices, source side first. Throws for an empty chain.
TwoPort cascade(std::span<const WiringElement> elements, double f_hz);

/// (A Z_L + B) / (C Z_L + D); throws SingularTerminationError when |C Z_L + D| < 1e-15.
complex input_impedance(const TwoPort& network, complex load);

struct ImpedanceSweep {
    std::vector<double> f_hz;
    std::vector<complex> z_in;
    double effective_r = 0.0;
    double effective_c = 0.0;
    double fit_rms = 0.0;        ///< RMS of |Z| - |R + 1/(j w C)| on the fit band, ohms
    double fit_band_hz = 1e6;
    std::size_t fit_points = 0;
};

/// Sweeps |Z_in| and fits an equivalent series RC on f <= fit_band_hz.
ImpedanceSweep sweep_and_fit_rc(std::span<const WiringElement> elements, complex load,
                                std::span<const double> f_grid, double fit_band_hz = 1e6);

/// Chain without the coax: bias-tee capacitor, 20+3+20+3+20 dB attenuators,
/// 1 nH wirebond, terminated in a short. `bias_tee_farads` sets the time
/// constant of the dominant RC (about 50 ohm times C).
std::vector<WiringElement> default_wiring_chain(double bias_tee_farads = 224e-9);

} // namespace fluxshape
