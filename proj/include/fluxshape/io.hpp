#pragma once

#include "fluxshape/device.hpp"
#include "fluxshape/extraction.hpp"
#include "fluxshape/network.hpp"
#include "fluxshape/pulse.hpp"
#include "fluxshape/rc_response.hpp"
#include "fluxshape/robustness.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fluxshape::io {

using json = nlohmann::json;

/// {"tau_pulse_s", "a0", "a": [...], "b": [...]}
json to_json(const HarmonicPulse& pulse);
HarmonicPulse pulse_from_json(const json& j);

/// {"r_ohms", "c_farads"}
json to_json(const RCLine& line);
RCLine rc_line_from_json(const json& j);

/// Frequencies are f = w / 2 pi: {"omega_q_ghz", "omega_max_ghz", "g_mhz",
/// "phi_idle_phi0", "flux_per_volt_phi0"}. Missing keys fall back to the
/// reference device.
json to_json(const CouplerDevice& device);
CouplerDevice device_from_json(const json& j);

/// Ordered list of {"kind": "...", params...}.
json to_json(std::span<const WiringElement> chain);
std::vector<WiringElement> chain_from_json(const json& j);

json to_json(const PhaseStatistics& stats);

/// {"tau_s", "A", "B", "acquired_phase_rad", "residual_rms", "converged"} plus "status".
json pipeline_report(const PipelineResult& result);

/// Shortest representation that round-trips exactly.
std::string format_number(double v);

using Row = std::vector<double>;

void write_csv(std::ostream& os, std::span<const std::string> header, std::span<const Row> rows);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<Row> rows;

    /// Column by header name; throws ValidationError if absent.
    std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(std::istream& is);

json read_json_file(const std::filesystem::path& path);
CsvTable read_csv_file(const std::filesystem::path& path);

} // namespace fluxshape::io
