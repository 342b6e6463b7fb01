#include "fluxshape/fluxshape.hpp"

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fluxshape;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Transient-free flux pulse design for RC-filtered control lines";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<DegenerateDesignError>(m, "DegenerateDesignError", numerical.ptr());
    py::register_exception<PipelineError>(m, "PipelineError", PyExc_RuntimeError);

    py::class_<HarmonicPulse>(m, "HarmonicPulse")
        .def(py::init<double, double, std::vector<double>, std::vector<double>>(),
             py::arg("tau_pulse"), py::arg("a0"), py::arg("a"), py::arg("b"))
        .def_property_readonly("tau_pulse", &HarmonicPulse::tau_pulse)
        .def_property_readonly("omega", &HarmonicPulse::omega)
        .def_property_readonly("a0", &HarmonicPulse::a0)
        .def_property_readonly("a", [](const HarmonicPulse& p) { return std::vector<double>(p.a().begin(), p.a().end()); })
        .def_property_readonly("b", [](const HarmonicPulse& p) { return std::vector<double>(p.b().begin(), p.b().end()); })
        .def("__call__", [](const HarmonicPulse& p, double t) { return evaluate(p, t); })
        .def("__repr__", [](const HarmonicPulse& p) {
            return "HarmonicPulse(tau_pulse=" + std::to_string(p.tau_pulse()) + ", N=" + std::to_string(p.harmonics()) + ")";
        });

    py::class_<RCLine>(m, "RCLine")
        .def(py::init<double, double>(), py::arg("resistance"), py::arg("capacitance"))
        .def_static("from_tau", &RCLine::from_tau, py::arg("tau"), py::arg("resistance") = 50.0)
        .def_property_readonly("resistance", &RCLine::resistance)
        .def_property_readonly("capacitance", &RCLine::capacitance)
        .def_property_readonly("tau", &RCLine::tau);

    m.def("k_exp", &k_exp, py::arg("pulse"), py::arg("tau"));
    m.def("condition_one_residual", &condition_one_residual);
    m.def("condition_three_residual", &condition_three_residual, py::arg("pulse"), py::arg("tau"));
    m.def("capacitor_voltage", &capacitor_voltage, py::arg("pulse"), py::arg("line"), py::arg("t"));
    m.def("line_current", &line_current, py::arg("pulse"), py::arg("line"), py::arg("t"));

    m.def("solve_biharmonic", &solve_biharmonic, py::arg("b1"), py::arg("omega"), py::arg("tau_assumed"));
    m.def("solve_top_harmonic", [](double a0, const std::vector<double>& a, const std::vector<double>& b,
                                   double omega, double tau_assumed) {
        auto d = solve_top_harmonic(a0, a, b, omega, tau_assumed);
        return py::make_tuple(d.pulse, d.condition_three_residual);
    }, py::arg("a0"), py::arg("a"), py::arg("b"), py::arg("omega"), py::arg("tau_assumed"));
    m.def("residual_kexp_mischaracterized", &residual_kexp_mischaracterized,
          py::arg("b1"), py::arg("omega"), py::arg("tau_true"), py::arg("m"));
    m.def("biharmonic_limit_kexp", &biharmonic_limit_kexp, py::arg("b1"), py::arg("omega_tau"));

    m.attr("REFERENCE_OMEGA") = kReferenceOmega;
    m.def("sweep_kexp", [](double b1, const std::vector<double>& omega_tau, const std::vector<double>& ms,
                           double omega, unsigned threads) {
        auto g = sweep_kexp(b1, omega_tau, ms, omega, threads);
        std::vector<std::vector<double>> rows(g.omega_tau_values.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < g.m_values.size(); ++j) rows[i].push_back(g.at(i, j));
        }
        return rows;
    }, py::arg("b1"), py::arg("omega_tau"), py::arg("m"), py::arg("omega") = kReferenceOmega, py::arg("threads") = 0);

    py::class_<CouplerDevice>(m, "CouplerDevice")
        .def(py::init<double, double, double, double, double>(),
             py::arg("omega_max"), py::arg("omega_q"), py::arg("g"), py::arg("flux_per_volt"), py::arg("phi_idle"))
        .def_static("reference", &CouplerDevice::reference)
        .def_readwrite("omega_max", &CouplerDevice::omega_max)
        .def_readwrite("omega_q", &CouplerDevice::omega_q)
        .def_readwrite("g", &CouplerDevice::g)
        .def_readwrite("flux_per_volt", &CouplerDevice::flux_per_volt)
        .def_readwrite("phi_idle", &CouplerDevice::phi_idle)
        .def("validate", &CouplerDevice::validate);

    m.def("coupler_frequency", &coupler_frequency, py::arg("phi"), py::arg("device"));
    m.def("dressed_qubit_frequency", &dressed_qubit_frequency, py::arg("phi"), py::arg("device"));
    m.def("branch_gap", &branch_gap, py::arg("phi"), py::arg("device"));

    m.def("simulate_ramsey_square", [](const CouplerDevice& device, double amplitude, double tau_pulse, double tau,
                                       const std::vector<double>& delays, std::optional<double> t2,
                                       std::optional<double> noise, std::uint64_t seed) {
        RamseyConfig cfg{tau_pulse, delays, t2, noise, seed};
        auto tr = simulate_ramsey(device, square_transient_flux(device.phi_idle, amplitude, tau_pulse, tau), cfg);
        return py::make_tuple(tr.x, tr.y, tr.phase);
    }, py::arg("device"), py::arg("amplitude"), py::arg("tau_pulse"), py::arg("tau"), py::arg("delays"),
       py::arg("t2") = py::none(), py::arg("noise_sigma") = py::none(), py::arg("seed") = 0);

    py::class_<TransientFit>(m, "TransientFit")
        .def_readonly("amplitude_A", &TransientFit::amplitude_A)
        .def_readonly("offset_B", &TransientFit::offset_B)
        .def_readonly("tau", &TransientFit::tau)
        .def_readonly("residual_rms", &TransientFit::residual_rms)
        .def_readonly("converged", &TransientFit::converged)
        .def_property_readonly("status", [](const TransientFit& f) { return std::string(to_string(f.status)); });

    m.def("fit_transient", [](const std::vector<double>& flux, const std::vector<double>& delays, double tau_pulse) {
        return fit_transient(flux, delays, tau_pulse);
    }, py::arg("flux"), py::arg("delays"), py::arg("tau_pulse"));
    m.def("unwrap_phase", [](const std::vector<double>& x, const std::vector<double>& y) { return unwrap_phase(x, y); });

    m.def("default_chain_impedance", [](const std::vector<double>& f_hz, double bias_tee_farads) {
        auto chain = default_wiring_chain(bias_tee_farads);
        auto s = sweep_and_fit_rc(chain, 0.0, f_hz);
        return py::make_tuple(s.z_in, s.effective_r, s.effective_c);
    }, py::arg("f_hz"), py::arg("bias_tee_farads") = 224e-9);
}
