#include "fluxshape/io.hpp"

#include "fluxshape/errors.hpp"

#include <fmt/format.h>

#include <fstream>
#include <numbers>
#include <sstream>

namespace fluxshape::io {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

double number(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("missing key \"") + key + "\"");
    if (!j.at(key).is_number()) throw ValidationError(std::string("key \"") + key + "\" must be a number");
    return j.at(key).get<double>();
}

std::vector<double> number_list(const json& j, const char* key) {
    if (!j.contains(key)) return {};
    if (!j.at(key).is_array()) throw ValidationError(std::string("key \"") + key + "\" must be an array");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw ValidationError(std::string("key \"") + key + "\" must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

json to_json(const HarmonicPulse& pulse) {
    return {{"tau_pulse_s", pulse.tau_pulse()},
            {"a0", pulse.a0()},
            {"a", std::vector<double>(pulse.a().begin(), pulse.a().end())},
            {"b", std::vector<double>(pulse.b().begin(), pulse.b().end())}};
}

HarmonicPulse pulse_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("pulse JSON must be an object");
    return {number(j, "tau_pulse_s"), j.contains("a0") ? number(j, "a0") : 0.0, number_list(j, "a"),
            number_list(j, "b")};
}

json to_json(const RCLine& line) { return {{"r_ohms", line.resistance()}, {"c_farads", line.capacitance()}}; }

RCLine rc_line_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("RC line JSON must be an object");
    return {number(j, "r_ohms"), number(j, "c_farads")};
}

json to_json(const CouplerDevice& d) {
    return {{"omega_q_ghz", d.omega_q / kTwoPi / 1e9},
            {"omega_max_ghz", d.omega_max / kTwoPi / 1e9},
            {"g_mhz", d.g / kTwoPi / 1e6},
            {"phi_idle_phi0", d.phi_idle},
            {"flux_per_volt_phi0", d.flux_per_volt}};
}

CouplerDevice device_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("device JSON must be an object");
    CouplerDevice d = CouplerDevice::reference();
    if (j.contains("omega_q_ghz")) d.omega_q = kTwoPi * 1e9 * number(j, "omega_q_ghz");
    if (j.contains("omega_max_ghz")) d.omega_max = kTwoPi * 1e9 * number(j, "omega_max_ghz");
    if (j.contains("g_mhz")) d.g = kTwoPi * 1e6 * number(j, "g_mhz");
    if (j.contains("phi_idle_phi0")) d.phi_idle = number(j, "phi_idle_phi0");
    if (j.contains("flux_per_volt_phi0")) d.flux_per_volt = number(j, "flux_per_volt_phi0");
    d.validate();
    return d;
}

json to_json(std::span<const WiringElement> chain) {
    json out = json::array();
    for (const auto& e : chain) {
        out.push_back(std::visit(
            overloaded{
                [](const wiring::Attenuator& a) { return json{{"kind", "attenuator"}, {"db", a.db}}; },
                [](const wiring::SeriesCapacitor& c) { return json{{"kind", "series_capacitor"}, {"farads", c.farads}}; },
                [](const wiring::SeriesResistor& r) { return json{{"kind", "series_resistor"}, {"ohms", r.ohms}}; },
                [](const wiring::TransmissionLine& t) {
                    return json{{"kind", "transmission_line"}, {"z0_ohms", t.z0_ohms}, {"delay_s", t.delay_s}};
                },
                [](const wiring::SeriesInductor& l) { return json{{"kind", "series_inductor"}, {"henries", l.henries}}; },
            },
            e));
    }
    return out;
}

std::vector<WiringElement> chain_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ValidationError("chain JSON must be a non-empty array");
    std::vector<WiringElement> out;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("kind") || !e.at("kind").is_string()) {
            throw ValidationError("chain element needs a string \"kind\"");
        }
        const auto kind = e.at("kind").get<std::string>();
        WiringElement el;
        if (kind == "attenuator") el = wiring::Attenuator{number(e, "db")};
        else if (kind == "series_capacitor") el = wiring::SeriesCapacitor{number(e, "farads")};
        else if (kind == "series_resistor") el = wiring::SeriesResistor{number(e, "ohms")};
        else if (kind == "transmission_line") el = wiring::TransmissionLine{number(e, "z0_ohms"), number(e, "delay_s")};
        else if (kind == "series_inductor") el = wiring::SeriesInductor{number(e, "henries")};
        else throw ValidationError("unknown wiring element kind \"" + kind + "\"");
        validate(el);
        out.push_back(el);
    }
    return out;
}

json to_json(const PhaseStatistics& s) {
    return {{"n", s.count},
            {"mean", s.mean},
            {"mean_stderr", s.mean_stderr},
            {"standard_deviation", s.standard_deviation},
            {"standard_deviation_stderr", s.std_stderr}};
}

json pipeline_report(const PipelineResult& r) {
    return {{"tau_s", r.fit.tau},
            {"A", r.fit.amplitude_A},
            {"B", r.fit.offset_B},
            {"acquired_phase_rad", r.acquired_phase},
            {"residual_rms", r.fit.residual_rms},
            {"converged", r.fit.converged},
            {"status", std::string(to_string(r.fit.status))}};
}

std::string format_number(double v) { return fmt::format("{}", v); }

void write_csv(std::ostream& os, std::span<const std::string> header, std::span<const Row> rows) {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
        os << '\n';
    }
}

std::vector<double> CsvTable::column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == name) {
            std::vector<double> out;
            out.reserve(rows.size());
            for (const auto& r : rows) out.push_back(r.at(c));
            return out;
        }
    }
    throw ValidationError("CSV has no column \"" + name + "\"");
}

CsvTable read_csv(std::istream& is) {
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("CSV is empty");
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        Row row;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw ValidationError("CSV line " + std::to_string(lineno) + ": bad number \"" + cell + "\"");
            }
        }
        if (row.size() != t.header.size()) {
            throw ValidationError("CSV line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                                  " fields, expected " + std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    return read_csv(in);
}

} // namespace fluxshape::io
