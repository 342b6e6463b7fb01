#pragma once

#include "fluxshape/device.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace fluxshape {

/// atan2(y, x) unwrapped by +-2 pi wherever consecutive raw phases jump by
/// more than pi. The first raw value is kept. Throws DegeneratePhaseError
/// where x^2 + y^2 < 1e-12.
std::vector<double> unwrap_phase(std::span<const double> x, std::span<const double> y);

/// Savitzky-Golay smoothing with a symmetric window of window_points. Near the
/// ends the window is truncated and the polynomial fit is evaluated off-centre.
std::vector<double> smooth(std::span<const double> series, int window_points, int poly_order);

/// d phase / dt / 2 pi in Hz: central differences inside, second-order
/// one-sided differences at the two ends.
std::vector<double> frequency_from_phase(std::span<const double> phase, double dt);

/// Inverts the dressed qubit frequency on the monotone flux branch holding
/// phi_idle (the half-period [-0.5, 0] or [0, 0.5]). Throws OutOfRangeError
/// if a target falls outside that branch's range, ValidationError if
/// phi_idle sits on the branch extremum at 0.
std::vector<double> frequency_to_flux(std::span<const double> freq_shift_hz, const CouplerDevice& device,
                                      double phi_idle);

enum class FitStatus { converged, iteration_cap, degenerate };

std::string_view to_string(FitStatus status);

struct TransientFit {
    double amplitude_A = 0.0;
    double offset_B = 0.0;
    double tau = 0.0;
    double residual_rms = 0.0;
    bool converged = false;
    FitStatus status = FitStatus::degenerate;
    int iterations = 0;
};

/// Weighted Levenberg-Marquardt fit of
///   A (-e^{-d/tau} + e^{-(d + tau_pulse)/tau}) + B
/// with the two end points at half weight. Needs at least 8 points.
TransientFit fit_transient(std::span<const double> flux, std::span<const double> delays, double tau_pulse);

struct SmoothingParams {
    int window_points = 11;
    int poly_order = 3;
};

struct PipelineInput {
    std::vector<double> delays;  ///< uniform spacing
    std::vector<double> x;
    std::vector<double> y;
    CouplerDevice device;
    double phi_idle;
    double tau_pulse;
    double fit_window;           ///< fit uses delays <= fit_window; no default on purpose
    SmoothingParams smoothing{};
};

struct PipelineResult {
    std::vector<double> phase;           ///< unwrapped
    std::vector<double> smoothed_phase;
    std::vector<double> frequency_hz;
    std::vector<double> flux;
    TransientFit fit;
    double acquired_phase;               ///< final phase minus mean of the first 3 samples
};

/// unwrap -> smooth -> differentiate -> invert the flux map -> fit.
/// Stage failures surface as PipelineError naming the stage.
PipelineResult run_pipeline(const PipelineInput& input);

} // namespace fluxshape
