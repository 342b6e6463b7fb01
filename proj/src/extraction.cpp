#include "fluxshape/extraction.hpp"

#include "fluxshape/errors.hpp"
#include "fluxshape/rc_response.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace fluxshape {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Weights that evaluate, at offset `at`, the least-squares polynomial of the
// given degree through samples at offsets first..last.
Eigen::VectorXd savgol_weights(int first, int last, int degree, int at) {
    const int count = last - first + 1;
    Eigen::MatrixXd vander(count, degree + 1);
    for (int r = 0; r < count; ++r) {
        const double x = static_cast<double>(first + r);
        double p = 1.0;
        for (int c = 0; c <= degree; ++c, p *= x) vander(r, c) = p;
    }
    const Eigen::MatrixXd pinv =
        vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(count, count));
    Eigen::VectorXd basis(degree + 1);
    double p = 1.0;
    for (int c = 0; c <= degree; ++c, p *= at) basis(c) = p;
    return pinv.transpose() * basis;
}

double transient_shape(double d, double tau, double tau_pulse) {
    return std::exp(-d / tau) * std::expm1(-tau_pulse / tau);
}

} // namespace

std::vector<double> unwrap_phase(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("quadrature series differ in length");
    if (x.size() < 2) throw ValidationError("need at least two quadrature points");
    std::vector<double> out(x.size());
    double offset = 0.0;
    double prev_raw = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] * x[k] + y[k] * y[k] < 1e-12) {
            throw DegeneratePhaseError("phase undefined at point " + std::to_string(k) + " (x^2 + y^2 < 1e-12)");
        }
        const double raw = std::atan2(y[k], x[k]);
        if (k > 0) {
            const double jump = raw - prev_raw;
            if (jump > std::numbers::pi) offset -= kTwoPi;
            else if (jump < -std::numbers::pi) offset += kTwoPi;
        }
        out[k] = raw + offset;
        prev_raw = raw;
    }
    return out;
}

std::vector<double> smooth(std::span<const double> series, int window_points, int poly_order) {
    const auto n = static_cast<int>(series.size());
    if (window_points < 3 || window_points % 2 == 0) throw ValidationError("window must be odd and >= 3");
    if (window_points > n) throw ValidationError("window longer than the series");
    if (poly_order < 1 || poly_order >= window_points) throw ValidationError("need 1 <= poly_order < window");

    const int half = window_points / 2;
    const Eigen::VectorXd centre = savgol_weights(-half, half, poly_order, 0);
    std::vector<double> out(series.size());
    for (int i = 0; i < n; ++i) {
        const int first = std::max(0, i - half) - i;
        const int last = std::min(n - 1, i + half) - i;
        const bool interior = first == -half && last == half;
        const Eigen::VectorXd w = interior ? centre : savgol_weights(first, last, std::min(poly_order, last - first), 0);
        double s = 0.0;
        for (int j = first; j <= last; ++j) s += w(j - first) * series[static_cast<std::size_t>(i + j)];
        out[static_cast<std::size_t>(i)] = s;
    }
    return out;
}

std::vector<double> frequency_from_phase(std::span<const double> phase, double dt) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    const std::size_t n = phase.size();
    if (n < 3) throw ValidationError("need at least three phase points");
    const double scale = 1.0 / (2.0 * dt * kTwoPi);
    std::vector<double> f(n);
    f.front() = (-3.0 * phase[0] + 4.0 * phase[1] - phase[2]) * scale;
    for (std::size_t k = 1; k + 1 < n; ++k) f[k] = (phase[k + 1] - phase[k - 1]) * scale;
    f.back() = (3.0 * phase[n - 1] - 4.0 * phase[n - 2] + phase[n - 3]) * scale;
    return f;
}

std::vector<double> frequency_to_flux(std::span<const double> freq_shift_hz, const CouplerDevice& device_in,
                                      double phi_idle) {
    CouplerDevice device = device_in;
    device.phi_idle = phi_idle;
    device.validate();
    if (phi_idle == 0.0) throw ValidationError("phi_idle = 0 is the branch extremum; the flux map is not invertible there");

    const double lo_edge = phi_idle < 0.0 ? -0.5 : 0.0;
    const double hi_edge = phi_idle < 0.0 ? 0.0 : 0.5;
    const double f_lo = dressed_qubit_frequency(lo_edge, device);
    const double f_hi = dressed_qubit_frequency(hi_edge, device);
    const bool increasing = f_hi > f_lo;
    const double w_idle = dressed_qubit_frequency(phi_idle, device);

    std::vector<double> out;
    out.reserve(freq_shift_hz.size());
    for (double shift : freq_shift_hz) {
        const double target = w_idle + kTwoPi * shift;
        if (!std::isfinite(target) || target < std::min(f_lo, f_hi) || target > std::max(f_lo, f_hi)) {
            throw OutOfRangeError("frequency shift " + std::to_string(shift) +
                                  " Hz leaves the codomain of the local flux branch");
        }
        double lo = lo_edge, hi = hi_edge;
        for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
            const double mid = 0.5 * (lo + hi);
            const bool below = dressed_qubit_frequency(mid, device) < target;
            ((below == increasing) ? lo : hi) = mid;
        }
        out.push_back(0.5 * (lo + hi));
    }
    return out;
}

std::string_view to_string(FitStatus status) {
    switch (status) {
    case FitStatus::converged: return "converged";
    case FitStatus::iteration_cap: return "iteration_cap";
    case FitStatus::degenerate: return "degenerate";
    }
    return "unknown";
}

namespace {

struct LmProblem {
    std::span<const double> flux;
    std::span<const double> delays;
    std::vector<double> weight;
    double tau_pulse;
    double spread;
};

struct LmResult {
    Eigen::Vector3d p;
    double cost = 0.0;
    FitStatus status = FitStatus::iteration_cap;
    int iterations = 0;
};

// Levenberg-Marquardt over (A, B, ln tau); ln tau keeps tau > 0.
LmResult levenberg_marquardt(const LmProblem& pr, Eigen::Vector3d p) {
    const std::size_t n = pr.flux.size();
    const auto rows = static_cast<Eigen::Index>(n);
    auto residuals = [&](const Eigen::Vector3d& q, Eigen::VectorXd& r) {
        const double tau = std::exp(q(2));
        for (std::size_t k = 0; k < n; ++k) {
            r(static_cast<Eigen::Index>(k)) = q(0) * transient_shape(pr.delays[k], tau, pr.tau_pulse) + q(1) - pr.flux[k];
        }
    };
    const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(pr.weight.data(), rows);
    auto cost_of = [&](const Eigen::VectorXd& r) { return (wv.array() * r.array().square()).sum(); };

    Eigen::VectorXd r(rows), r_trial(rows);
    Eigen::MatrixXd jac(rows, 3);
    residuals(p, r);
    LmResult out{p, cost_of(r)};
    double lambda = 1e-3;

    for (int iter = 1; iter <= 200; ++iter) {
        out.iterations = iter;
        const double tau = std::exp(out.p(2));
        for (std::size_t k = 0; k < n; ++k) {
            const double d = pr.delays[k];
            const double e1 = std::exp(-d / tau);
            const double e2 = std::exp(-(d + pr.tau_pulse) / tau);
            const auto row = static_cast<Eigen::Index>(k);
            jac(row, 0) = e2 - e1;
            jac(row, 1) = 1.0;
            jac(row, 2) = out.p(0) * (-(d / tau) * e1 + ((d + pr.tau_pulse) / tau) * e2);
        }
        const Eigen::Matrix3d jtj = jac.transpose() * wv.asDiagonal() * jac;
        const Eigen::Vector3d grad = jac.transpose() * (wv.array() * r.array()).matrix();

        const Eigen::Vector3d eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(jtj, Eigen::EigenvaluesOnly).eigenvalues();
        if (!(eig(0) > 1e-14 * eig(2))) {
            out.status = FitStatus::degenerate;
            return out;
        }

        bool accepted = false;
        Eigen::Vector3d step = Eigen::Vector3d::Zero();
        for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
            Eigen::Matrix3d damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal();
            step = damped.ldlt().solve(-grad);
            const Eigen::Vector3d trial = out.p + step;
            residuals(trial, r_trial);
            const double trial_cost = cost_of(r_trial);
            if (std::isfinite(trial_cost) && trial_cost <= out.cost) {
                out.p = trial;
                r = r_trial;
                out.cost = trial_cost;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
            } else {
                lambda *= 4.0;
            }
        }

        const bool small_step = !accepted ||
            (std::abs(step(0)) <= 1e-8 * std::abs(out.p(0)) &&
             std::abs(step(1)) <= 1e-8 * std::max(std::abs(out.p(1)), pr.spread) &&
             std::abs(std::expm1(step(2))) <= 1e-8);
        if (small_step) {
            out.status = FitStatus::converged;
            return out;
        }
    }
    return out;
}

// A and B are linear for fixed tau; solve them and return (A, B, weighted cost).
Eigen::Vector3d linear_at_tau(const LmProblem& pr, double tau) {
    double sw = 0, ss = 0, sf = 0, sss = 0, ssf = 0, sff = 0;
    for (std::size_t k = 0; k < pr.flux.size(); ++k) {
        const double w = pr.weight[k];
        const double sh = transient_shape(pr.delays[k], tau, pr.tau_pulse);
        sw += w; ss += w * sh; sf += w * pr.flux[k];
        sss += w * sh * sh; ssf += w * sh * pr.flux[k]; sff += w * pr.flux[k] * pr.flux[k];
    }
    const double det = sw * sss - ss * ss;
    if (!(std::abs(det) > 0.0)) return {0.0, sf / sw, sff - sf * sf / sw};
    const double a = (sw * ssf - ss * sf) / det;
    const double b = (sf - a * ss) / sw;
    const double cost = sff - a * ssf - b * sf;
    return {a, b, cost};
}

} // namespace

TransientFit fit_transient(std::span<const double> flux, std::span<const double> delays, double tau_pulse) {
    const std::size_t n = flux.size();
    if (n != delays.size()) throw ValidationError("flux and delay series differ in length");
    if (n < 8) throw ValidationError("transient fit needs at least 8 points");
    if (!(tau_pulse >= 0.0)) throw ValidationError("tau_pulse must be non-negative");

    LmProblem pr{flux, delays, std::vector<double>(n, 1.0), tau_pulse, 0.0};
    pr.weight.front() = pr.weight.back() = 0.5;

    TransientFit fit;
    double mean = 0.0;
    for (double v : flux) mean += v;
    mean /= static_cast<double>(n);
    // Final level: mean of the last 5% of the series.
    const std::size_t tail = std::max<std::size_t>(3, n / 20);
    double b_guess = 0.0;
    for (std::size_t k = n - tail; k < n; ++k) b_guess += flux[k];
    b_guess /= static_cast<double>(tail);
    double spread = 0.0;
    for (double v : flux) spread = std::max(spread, std::abs(v - b_guess));
    pr.spread = spread;
    const double scale = std::max(std::abs(mean), spread);
    if (!(spread > 1e-12 * std::max(1.0, scale))) {
        fit.offset_B = mean;
        fit.status = FitStatus::degenerate;
        return fit;
    }

    // Starting point: log-linear regression on the well-resolved part of |flux - flux_final|.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int used = 0;
    for (std::size_t k = 0; k + tail < n; ++k) {
        const double dev = std::abs(flux[k] - b_guess);
        if (dev > 0.05 * spread) {
            const double ly = std::log(dev);
            sx += delays[k]; sy += ly; sxx += delays[k] * delays[k]; sxy += delays[k] * ly;
            ++used;
        }
    }
    const double span = delays.back() - delays.front();
    double tau0 = span / 3.0;
    if (used >= 2) {
        const double slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
        if (slope < 0.0 && std::isfinite(slope)) tau0 = -1.0 / slope;
    }
    const double shape0 = transient_shape(delays.front(), tau0, tau_pulse);
    const double a0 = shape0 != 0.0 ? (flux.front() - b_guess) / shape0 : 0.0;
    LmResult best = levenberg_marquardt(pr, {a0, b_guess, std::log(tau0)});

    // Fallback when the regression start fails: scan tau with A, B solved exactly.
    if (best.status != FitStatus::converged) {
        const double dmin = std::max(span / static_cast<double>(n), 1e-12);
        double tau_scan = dmin, scan_cost = std::numeric_limits<double>::infinity();
        Eigen::Vector3d scan_ab = Eigen::Vector3d::Zero();
        for (int k = 0; k <= 120; ++k) {
            const double t = dmin * std::pow(100.0 * span / dmin, k / 120.0);
            const Eigen::Vector3d lin = linear_at_tau(pr, t);
            if (lin(2) < scan_cost) {
                scan_cost = lin(2);
                tau_scan = t;
                scan_ab = lin;
            }
        }
        const LmResult retry = levenberg_marquardt(pr, {scan_ab(0), scan_ab(1), std::log(tau_scan)});
        if (retry.status == FitStatus::converged || retry.cost < best.cost) best = retry;
    }

    fit.amplitude_A = best.p(0);
    fit.offset_B = best.p(1);
    fit.tau = std::exp(best.p(2));
    fit.status = best.status;
    fit.iterations = best.iterations;
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double e = fit.amplitude_A * transient_shape(delays[k], fit.tau, tau_pulse) + fit.offset_B - flux[k];
        ss += e * e;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
    fit.converged = fit.status == FitStatus::converged && fit.tau > 0.0 && std::isfinite(fit.tau);
    if (!fit.converged && fit.status == FitStatus::converged) fit.status = FitStatus::degenerate;
    return fit;
}

PipelineResult run_pipeline(const PipelineInput& in) {
    auto stage = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const ValidationError& e) {
            throw PipelineError(name, e.what(), true);
        } catch (const std::exception& e) {
            throw PipelineError(name, e.what(), false);
        }
    };

    const std::size_t n = in.delays.size();
    const double dt = stage("input", [&] {
        if (n < 3 || in.x.size() != n || in.y.size() != n) {
            throw ValidationError("delays and quadratures must have equal length >= 3");
        }
        const double step = (in.delays.back() - in.delays.front()) / static_cast<double>(n - 1);
        for (std::size_t k = 1; k < n; ++k) {
            if (std::abs(in.delays[k] - in.delays[k - 1] - step) > 1e-6 * step) {
                throw ValidationError("delay grid must be uniformly spaced");
            }
        }
        if (!(in.fit_window > in.delays.front())) throw ValidationError("fit window must exceed the first delay");
        return step;
    });

    PipelineResult out;
    out.phase = stage("unwrap", [&] { return unwrap_phase(in.x, in.y); });
    out.smoothed_phase = stage("smooth", [&] {
        return smooth(out.phase, in.smoothing.window_points, in.smoothing.poly_order);
    });
    out.frequency_hz = stage("frequency", [&] { return frequency_from_phase(out.smoothed_phase, dt); });
    out.flux = stage("flux", [&] { return frequency_to_flux(out.frequency_hz, in.device, in.phi_idle); });
    out.fit = stage("fit", [&] {
        std::size_t count = 0;
        while (count < n && in.delays[count] <= in.fit_window) ++count;
        return fit_transient(std::span(out.flux).first(count), std::span(in.delays).first(count), in.tau_pulse);
    });
    const std::size_t head = std::min<std::size_t>(3, n);
    double offset = 0.0;
    for (std::size_t k = 0; k < head; ++k) offset += out.phase[k];
    out.acquired_phase = out.phase.back() - offset / static_cast<double>(head);
    return out;
}

} // namespace fluxshape
