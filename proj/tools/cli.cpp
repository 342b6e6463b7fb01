#include "cli.hpp"

#include "fluxshape/fluxshape.hpp"
#include "fluxshape/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <limits>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fluxshape::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr double kMicro = 1e-6;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr const char* kVersion = "0.1.0";

// Files are staged in memory and written only once the command has succeeded.
struct Staged {
    std::string name;
    std::string content;
};

struct Context {
    std::string command;
    fs::path out_dir = ".";
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    json parameters = json::object();
    std::vector<Staged> files;

    void stage(std::string name, std::string content) { files.push_back({std::move(name), std::move(content)}); }
    void stage_json(std::string name, const json& j) { stage(std::move(name), j.dump(2) + "\n"); }
    void stage_csv(std::string name, const std::vector<std::string>& header, const std::vector<io::Row>& rows) {
        std::ostringstream os;
        io::write_csv(os, header, rows);
        stage(std::move(name), os.str());
    }
    json read_input_json(const std::string& path) {
        inputs.push_back(path);
        return io::read_json_file(path);
    }
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << content;
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

void flush(const Context& ctx) {
    fs::create_directories(ctx.out_dir);
    for (const auto& f : ctx.files) write_file(ctx.out_dir / f.name, f.content);
}

void write_manifest(const Context& ctx) {
    json outputs = json::array();
    for (const auto& f : ctx.files) outputs.push_back(f.name);
    const json manifest{{"command", ctx.command}, {"version", kVersion},    {"rng_seed", ctx.seed},
                        {"inputs", ctx.inputs},   {"outputs", outputs},     {"parameters", ctx.parameters}};
    write_file(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

double required(const std::optional<double>& v, const char* flag) {
    if (!v) throw ValidationError(std::string(flag) + " is required");
    return *v;
}

// Thrown when a command finished but did not converge; diagnostics are already staged.
struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

CouplerDevice load_device(Context& ctx, const std::string& path, const std::optional<double>& phi_idle) {
    CouplerDevice d = path.empty() ? CouplerDevice::reference() : io::device_from_json(ctx.read_input_json(path));
    if (phi_idle) d.phi_idle = *phi_idle;
    d.validate();
    return d;
}

// ---------------------------------------------------------------- design

struct DesignArgs {
    std::string request;
    std::string family;
    std::optional<double> b1, tau_pulse_us, tau_assumed_us;
    double a0 = 0.0;
    std::vector<double> a, b;
};

void cmd_design(DesignArgs args, Context& ctx, std::ostream& out) {
    std::optional<double> tau_pulse, tau_assumed;
    if (args.tau_pulse_us) tau_pulse = *args.tau_pulse_us * kMicro;
    if (args.tau_assumed_us) tau_assumed = *args.tau_assumed_us * kMicro;
    if (!args.request.empty()) {
        const json req = ctx.read_input_json(args.request);
        if (!req.is_object()) throw ValidationError("design request must be a JSON object");
        auto take = [&](const char* key, std::optional<double>& slot) {
            if (slot || !req.contains(key)) return;
            if (!req.at(key).is_number()) throw ValidationError(std::string("request key ") + key + " must be a number");
            slot = req.at(key).get<double>();
        };
        if (args.family.empty() && req.contains("family")) args.family = req.at("family").get<std::string>();
        take("b1", args.b1);
        take("tau_pulse_s", tau_pulse);
        take("tau_assumed_s", tau_assumed);
    }
    if (args.family.empty()) throw ValidationError("--family is required");
    const double tp = required(tau_pulse, "--tau-pulse-us");
    if (!(tp > 0.0)) throw ValidationError("--tau-pulse-us must be positive");
    const double omega = kTwoPi / tp;

    std::optional<HarmonicPulse> pulse;
    if (args.family == "biharmonic") {
        pulse = solve_biharmonic(required(args.b1, "--b1"), omega, required(tau_assumed, "--tau-assumed-us"));
    } else if (args.family == "single-sine") {
        pulse = HarmonicPulse(tp, 0.0, {0.0}, {required(args.b1, "--b1")});
    } else if (args.family == "top-harmonic") {
        if (args.a.size() != args.b.size() || args.a.empty()) {
            throw ValidationError("--a and --b must list the same non-zero number of lower harmonics");
        }
        pulse = solve_top_harmonic(args.a0, args.a, args.b, omega, required(tau_assumed, "--tau-assumed-us")).pulse;
    } else {
        throw ValidationError("--family must be biharmonic, single-sine or top-harmonic, got \"" + args.family + "\"");
    }

    json doc = io::to_json(*pulse);
    doc["family"] = args.family;
    doc["diagnostics"] = {{"k_exp_at_assumed", tau_assumed ? json(k_exp(*pulse, *tau_assumed)) : json(nullptr)},
                          {"cond1", condition_one_residual(*pulse)},
                          {"cond3", tau_assumed ? json(condition_three_residual(*pulse, *tau_assumed)) : json(nullptr)}};
    ctx.parameters = {{"family", args.family},           {"b1", optional_number(args.b1)},
                      {"tau_pulse_s", tp},               {"tau_assumed_s", optional_number(tau_assumed)},
                      {"a0", args.a0},                   {"a", args.a},
                      {"b", args.b}};
    ctx.stage_json("pulse.json", doc);
    out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------- respond / kexp

struct RespondArgs {
    std::string pulse;
    std::optional<double> tau_us;
    double r_ohms = 50.0;
    int periods = 1;
    std::optional<double> dt_us;
    bool oracle = false;
};

void cmd_respond(const RespondArgs& args, Context& ctx, std::ostream& out) {
    const HarmonicPulse pulse = io::pulse_from_json(ctx.read_input_json(args.pulse));
    const RCLine line = RCLine::from_tau(required(args.tau_us, "--tau-us") * kMicro, args.r_ohms);
    if (args.periods < 1) throw ValidationError("--periods must be at least 1");
    const double dt = args.dt_us ? *args.dt_us * kMicro : pulse.tau_pulse() / 400.0;
    const auto samples = sample(pulse, dt, static_cast<std::size_t>(args.periods));

    std::vector<std::string> header{"t_s", "v_in_v", "v_c_v", "current_a"};
    std::vector<io::Row> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) {
        rows.push_back({s.t, s.v, capacitor_voltage(pulse, line, s.t), line_current(pulse, line, s.t)});
    }
    if (args.oracle) {
        header.insert(header.end(), {"v_c_ode_v", "current_ode_a"});
        std::vector<double> grid;
        for (const auto& s : samples) grid.push_back(s.t);
        const auto ode = ode_oracle([&](double t) { return evaluate(pulse, t); }, line, grid, 0.0,
                                    pulse.tau_pulse() / static_cast<double>(std::max<std::size_t>(1, pulse.harmonics())));
        for (std::size_t k = 0; k < rows.size(); ++k) rows[k].insert(rows[k].end(), {ode[k].v_c, ode[k].current});
    }

    const double k = k_exp(pulse, line.tau());
    ctx.parameters = {{"tau_s", line.tau()}, {"r_ohms", line.resistance()}, {"periods", args.periods},
                      {"dt_s", dt},          {"oracle", args.oracle}};
    ctx.stage_csv("response.csv", header, rows);
    ctx.stage_json("response.json", {{"k_exp", k},
                                     {"line", io::to_json(line)},
                                     {"cond1", condition_one_residual(pulse)},
                                     {"cond3", condition_three_residual(pulse, line.tau())}});
    out << "k_exp=" << io::format_number(k) << "\n";
}

struct KexpArgs {
    std::string pulse;
    std::optional<double> tau_us;
};

void cmd_kexp(const KexpArgs& args, Context& ctx, std::ostream& out) {
    const HarmonicPulse pulse = io::pulse_from_json(ctx.read_input_json(args.pulse));
    const double tau = required(args.tau_us, "--tau-us") * kMicro;
    if (!(tau > 0.0)) throw ValidationError("--tau-us must be positive");
    const double k = k_exp(pulse, tau);
    ctx.parameters = {{"tau_s", tau}};
    ctx.stage_json("kexp.json", {{"k_exp", k}, {"tau_s", tau}});
    out << io::format_number(k) << "\n";
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    std::optional<double> b1;
    std::string grid;
    std::vector<double> omega_tau, m;
    double tau_pulse_us = 8.0;
    unsigned threads = 0;
};

void cmd_sweep(const SweepArgs& args, Context& ctx, std::ostream& out) {
    const double b1 = required(args.b1, "--b1");
    std::vector<double> wt = args.omega_tau, m = args.m;
    if (!args.grid.empty()) {
        if (args.grid != "default") throw ValidationError("--grid accepts only \"default\"");
        if (!wt.empty() || !m.empty()) throw ValidationError("--grid default cannot be combined with --omega-tau/--m");
        wt = default_omega_tau_axis();
        m = default_m_axis();
    }
    if (wt.empty() || m.empty()) throw ValidationError("give --grid default or both --omega-tau and --m");
    if (!(args.tau_pulse_us > 0.0)) throw ValidationError("--tau-pulse-us must be positive");
    const double omega = kTwoPi / (args.tau_pulse_us * kMicro);

    const auto grid = sweep_kexp(b1, wt, m, omega, args.threads);
    std::vector<io::Row> rows;
    rows.reserve(wt.size() * m.size());
    for (std::size_t i = 0; i < wt.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) rows.push_back({wt[i], m[j], grid.at(i, j)});
    }
    std::vector<io::Row> reference;
    const std::vector<double> b1_only{b1};
    for (double x : wt) {
        const auto cmp = compare_single_vs_biharmonic(b1, omega, x / omega);
        const double asym = x > 1.0 ? asymptotic_kexp(PulseFamily::biharmonic, b1_only, omega, x / omega)
                                    : std::numeric_limits<double>::quiet_NaN();
        reference.push_back({x, cmp.single_sine, cmp.biharmonic, asym});
    }
    ctx.parameters = {{"b1", b1}, {"omega_rad_s", omega}, {"omega_tau", wt}, {"m", m}};
    ctx.stage_csv("sweep.csv", {"omega_tau", "m", "k_exp"}, rows);
    ctx.stage_csv("reference.csv", {"omega_tau", "single_sine", "biharmonic_limit", "asymptotic"}, reference);
    out << "rows=" << rows.size() << "\n";
}

// ---------------------------------------------------------------- ramsey-sim

struct RamseyArgs {
    std::string device;
    std::optional<double> phi_idle;
    std::string waveform = "square";
    double amplitude = 0.02;
    std::string pulse;
    std::optional<double> tau_us;
    double r_ohms = 50.0;
    std::optional<double> tau_pulse_us;
    double delay_step_us = 0.1;
    double delay_max_us = 60.0;
    std::optional<double> t2_us;
    std::optional<double> noise_sigma;
};

void cmd_ramsey(const RamseyArgs& args, Context& ctx, std::ostream& out) {
    const CouplerDevice device = load_device(ctx, args.device, args.phi_idle);
    const double tau = required(args.tau_us, "--tau-us") * kMicro;
    if (!(tau > 0.0)) throw ValidationError("--tau-us must be positive");
    if (!(args.delay_step_us > 0.0) || !(args.delay_max_us >= 0.0)) {
        throw ValidationError("--delay-step-us must be positive and --delay-max-us non-negative");
    }

    FluxWaveform flux;
    double tau_pulse = 0.0;
    json waveform{{"kind", args.waveform}, {"tau_s", tau}};
    if (args.waveform == "square") {
        tau_pulse = required(args.tau_pulse_us, "--tau-pulse-us") * kMicro;
        flux = square_transient_flux(device.phi_idle, args.amplitude, tau_pulse, tau);
        waveform["amplitude_phi0"] = args.amplitude;
    } else if (args.waveform == "pulse") {
        if (args.pulse.empty()) throw ValidationError("--pulse is required for --waveform pulse");
        const HarmonicPulse p = io::pulse_from_json(ctx.read_input_json(args.pulse));
        if (args.tau_pulse_us && std::abs(*args.tau_pulse_us * kMicro - p.tau_pulse()) > 1e-12 * p.tau_pulse()) {
            throw ValidationError("--tau-pulse-us disagrees with the pulse file");
        }
        tau_pulse = p.tau_pulse();
        flux = pulse_flux(p, RCLine::from_tau(tau, args.r_ohms), device);
        waveform["r_ohms"] = args.r_ohms;
    } else {
        throw ValidationError("--waveform must be square or pulse");
    }

    const auto count = static_cast<std::size_t>(std::llround(args.delay_max_us / args.delay_step_us)) + 1;
    RamseyConfig cfg{tau_pulse, {}, std::nullopt, args.noise_sigma, ctx.seed};
    for (std::size_t k = 0; k < count; ++k) cfg.delay_grid.push_back(static_cast<double>(k) * args.delay_step_us * kMicro);
    if (args.t2_us) cfg.t2 = *args.t2_us * kMicro;

    const auto trace = simulate_ramsey(device, flux, cfg);
    std::vector<io::Row> rows;
    for (std::size_t k = 0; k < count; ++k) rows.push_back({trace.delays[k], trace.x[k], trace.y[k]});

    waveform["tau_pulse_s"] = tau_pulse;
    ctx.parameters = {{"waveform", waveform},
                      {"delay_step_s", args.delay_step_us * kMicro},
                      {"delay_max_s", args.delay_max_us * kMicro},
                      {"t2_s", cfg.t2 ? json(*cfg.t2) : json(nullptr)},
                      {"noise_sigma", optional_number(args.noise_sigma)}};
    ctx.stage_csv("trace.csv", {"tau_delay_s", "x_expect", "y_expect"}, rows);
    ctx.stage_json("device.json", io::to_json(device));
    out << "points=" << count << "\n";
}

// ---------------------------------------------------------------- extract

struct ExtractArgs {
    std::string trace;
    std::string device;
    std::optional<double> phi_idle;
    std::optional<double> tau_pulse_us;
    std::optional<double> fit_window_us;
    int sg_window = 11;
    int sg_order = 3;
};

void cmd_extract(const ExtractArgs& args, Context& ctx, std::ostream& out) {
    const CouplerDevice device = load_device(ctx, args.device, args.phi_idle);
    ctx.inputs.push_back(args.trace);
    const auto table = io::read_csv_file(args.trace);

    PipelineInput in{table.column("tau_delay_s"),
                     table.column("x_expect"),
                     table.column("y_expect"),
                     device,
                     device.phi_idle,
                     required(args.tau_pulse_us, "--tau-pulse-us") * kMicro,
                     required(args.fit_window_us, "--fit-window-us") * kMicro,
                     {args.sg_window, args.sg_order}};
    const auto result = run_pipeline(in);

    ctx.parameters = {{"phi_idle_phi0", device.phi_idle},
                      {"tau_pulse_s", in.tau_pulse},
                      {"fit_window_s", in.fit_window},
                      {"sg_window", args.sg_window},
                      {"sg_order", args.sg_order}};
    const json report = io::pipeline_report(result);
    if (!result.fit.converged) {
        ctx.files.clear();
        ctx.stage_json("report.json", report);
        throw NonConvergence(std::string("transient fit did not converge (") +
                             std::string(to_string(result.fit.status)) + ")");
    }
    std::vector<io::Row> rows;
    for (std::size_t k = 0; k < in.delays.size(); ++k) {
        rows.push_back({in.delays[k], result.phase[k], result.smoothed_phase[k], result.frequency_hz[k], result.flux[k]});
    }
    ctx.stage_csv("extraction.csv", {"tau_delay_s", "phase_rad", "smoothed_phase_rad", "frequency_hz", "flux_phi0"},
                  rows);
    ctx.stage_json("report.json", report);
    out << "A=" << io::format_number(result.fit.amplitude_A) << "\n";
    out << "acquired_phase_rad=" << io::format_number(result.acquired_phase) << "\n";
    out << "tau_us=" << io::format_number(result.fit.tau / kMicro) << "\n";
}

// ---------------------------------------------------------------- impedance

struct ImpedanceArgs {
    std::string chain;
    double bias_tee_nf = 224.0;
    double load_ohms = 0.0;
    double f_min_hz = 1e3;
    double f_max_hz = 1e9;
    int points = 601;
    std::string spacing = "log";
    double fit_band_hz = 1e6;
};

void cmd_impedance(const ImpedanceArgs& args, Context& ctx, std::ostream& out) {
    const auto chain = args.chain.empty() ? default_wiring_chain(args.bias_tee_nf * 1e-9)
                                          : io::chain_from_json(ctx.read_input_json(args.chain));
    if (!(args.f_min_hz > 0.0) || !(args.f_max_hz > args.f_min_hz) || args.points < 2) {
        throw ValidationError("need 0 < --f-min-hz < --f-max-hz and --points >= 2");
    }
    std::vector<double> f;
    if (args.spacing == "log") {
        f = logspace(args.f_min_hz, args.f_max_hz, static_cast<std::size_t>(args.points));
    } else if (args.spacing == "linear") {
        for (int k = 0; k < args.points; ++k) {
            f.push_back(args.f_min_hz + (args.f_max_hz - args.f_min_hz) * k / (args.points - 1));
        }
    } else {
        throw ValidationError("--spacing must be log or linear");
    }

    const auto sweep = sweep_and_fit_rc(chain, args.load_ohms, f, args.fit_band_hz);
    std::vector<io::Row> rows;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const auto z = sweep.z_in[k];
        rows.push_back({f[k], std::abs(z), z.real(), z.imag()});
    }
    ctx.parameters = {{"chain", io::to_json(chain)}, {"load_ohms", args.load_ohms}, {"spacing", args.spacing},
                      {"f_min_hz", args.f_min_hz},   {"f_max_hz", args.f_max_hz},   {"points", args.points}};
    ctx.stage_csv("impedance.csv", {"f_hz", "z_abs_ohms", "z_re", "z_im"}, rows);
    ctx.stage_json("fit.json", {{"effective_r_ohms", sweep.effective_r},
                                {"effective_c_farads", sweep.effective_c},
                                {"tau_eff_s", sweep.effective_r * sweep.effective_c},
                                {"fit_rms_ohms", sweep.fit_rms},
                                {"fit_band_hz", sweep.fit_band_hz},
                                {"fit_points", sweep.fit_points}});
    out << "tau_eff_us=" << io::format_number(sweep.effective_r * sweep.effective_c / kMicro) << "\n";
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
    std::string input;
    std::string column = "phase_rad";
};

void cmd_stats(const StatsArgs& args, Context& ctx, std::ostream& out) {
    ctx.inputs.push_back(args.input);
    const auto samples = io::read_csv_file(args.input).column(args.column);
    const auto stats = phase_statistics(samples);
    ctx.parameters = {{"column", args.column}};
    ctx.stage_json("stats.json", io::to_json(stats));
    out << "mean=" << io::format_number(stats.mean) << "\n";
    out << "std=" << io::format_number(stats.standard_deviation) << "\n";
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
    const char* env = std::getenv("FLUXSHAPE_SEED");
    if (!env || !*env) return fallback;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(std::string("FLUXSHAPE_SEED is not an unsigned integer: ") + env);
    }
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Flux pulse design, RC transient analysis and Ramsey extraction", "fluxshape"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Context ctx;
    std::string out_dir = ".";
    auto common = [&](CLI::App* sub) {
        sub->add_option("--out-dir", out_dir, "Directory for output files")->capture_default_str();
        sub->add_option("--seed", ctx.seed, "Random seed (FLUXSHAPE_SEED overrides)")->capture_default_str();
    };

    DesignArgs design;
    auto* s_design = app.add_subcommand("design", "Design a transient-free pulse");
    s_design->add_option("--request", design.request, "JSON request file");
    s_design->add_option("--family", design.family, "biharmonic, single-sine or top-harmonic");
    s_design->add_option("--b1", design.b1, "First sine coefficient, V");
    s_design->add_option("--tau-pulse-us", design.tau_pulse_us, "Pulse period, us");
    s_design->add_option("--tau-assumed-us", design.tau_assumed_us, "Assumed line time constant, us");
    s_design->add_option("--a0", design.a0, "DC coefficient for top-harmonic designs, V");
    s_design->add_option("--a", design.a, "Lower cosine coefficients, V")->delimiter(',');
    s_design->add_option("--b", design.b, "Lower sine coefficients, V")->delimiter(',');
    common(s_design);

    RespondArgs respond;
    auto* s_respond = app.add_subcommand("respond", "Closed-form RC response of a pulse");
    s_respond->add_option("--pulse", respond.pulse, "Pulse JSON")->required();
    s_respond->add_option("--tau-us", respond.tau_us, "Line time constant, us");
    s_respond->add_option("--r-ohms", respond.r_ohms, "Line resistance")->capture_default_str();
    s_respond->add_option("--periods", respond.periods, "Number of periods")->capture_default_str();
    s_respond->add_option("--dt-us", respond.dt_us, "Sample step, us (default period/400)");
    s_respond->add_flag("--oracle", respond.oracle, "Add RK4 oracle columns");
    common(s_respond);

    KexpArgs kexp;
    auto* s_kexp = app.add_subcommand("kexp", "Transient coefficient of a pulse");
    s_kexp->add_option("--pulse", kexp.pulse, "Pulse JSON")->required();
    s_kexp->add_option("--tau-us", kexp.tau_us, "Line time constant, us");
    common(s_kexp);

    SweepArgs sweep;
    auto* s_sweep = app.add_subcommand("sweep", "k_exp over omega tau and m");
    s_sweep->add_option("--b1", sweep.b1, "First sine coefficient, V");
    s_sweep->add_option("--grid", sweep.grid, "\"default\" for the 50 x 50 grid");
    s_sweep->add_option("--omega-tau", sweep.omega_tau, "omega tau values")->delimiter(',');
    s_sweep->add_option("--m", sweep.m, "Estimation factors")->delimiter(',');
    s_sweep->add_option("--tau-pulse-us", sweep.tau_pulse_us, "Pulse period, us")->capture_default_str();
    s_sweep->add_option("--threads", sweep.threads, "Worker threads (0 = hardware)")->capture_default_str();
    common(s_sweep);

    RamseyArgs ramsey;
    auto* s_ramsey = app.add_subcommand("ramsey-sim", "Synthetic Ramsey traces under a distorted flux");
    s_ramsey->add_option("--device", ramsey.device, "Device JSON (default: reference device)");
    s_ramsey->add_option("--phi-idle", ramsey.phi_idle, "Idle flux, Phi0");
    s_ramsey->add_option("--waveform", ramsey.waveform, "square or pulse")->capture_default_str();
    s_ramsey->add_option("--amplitude-phi0", ramsey.amplitude, "Square-pulse flux amplitude")->capture_default_str();
    s_ramsey->add_option("--pulse", ramsey.pulse, "Pulse JSON for --waveform pulse");
    s_ramsey->add_option("--tau-us", ramsey.tau_us, "True line time constant, us");
    s_ramsey->add_option("--r-ohms", ramsey.r_ohms, "Line resistance")->capture_default_str();
    s_ramsey->add_option("--tau-pulse-us", ramsey.tau_pulse_us, "Pulse length, us");
    s_ramsey->add_option("--delay-step-us", ramsey.delay_step_us, "Delay step, us")->capture_default_str();
    s_ramsey->add_option("--delay-max-us", ramsey.delay_max_us, "Largest delay, us")->capture_default_str();
    s_ramsey->add_option("--t2-us", ramsey.t2_us, "Decay envelope, us");
    s_ramsey->add_option("--noise-sigma", ramsey.noise_sigma, "Gaussian noise on <X>, <Y>");
    common(s_ramsey);

    ExtractArgs extract;
    auto* s_extract = app.add_subcommand("extract", "Recover the flux transient from a Ramsey trace");
    s_extract->add_option("--trace", extract.trace, "Trace CSV")->required();
    s_extract->add_option("--device", extract.device, "Device JSON (default: reference device)");
    s_extract->add_option("--phi-idle", extract.phi_idle, "Idle flux, Phi0");
    s_extract->add_option("--tau-pulse-us", extract.tau_pulse_us, "Pulse length, us");
    s_extract->add_option("--fit-window-us", extract.fit_window_us, "Fit delays up to this value, us");
    s_extract->add_option("--sg-window", extract.sg_window, "Savitzky-Golay window points")->capture_default_str();
    s_extract->add_option("--sg-order", extract.sg_order, "Savitzky-Golay order")->capture_default_str();
    common(s_extract);

    ImpedanceArgs imp;
    auto* s_imp = app.add_subcommand("impedance", "Input impedance of the flux wiring");
    s_imp->add_option("--chain", imp.chain, "Chain JSON (default: built-in wiring)");
    s_imp->add_option("--bias-tee-nf", imp.bias_tee_nf, "Bias-tee capacitance of the default chain")->capture_default_str();
    s_imp->add_option("--load-ohms", imp.load_ohms, "Real load impedance")->capture_default_str();
    s_imp->add_option("--f-min-hz", imp.f_min_hz, "Lowest frequency")->capture_default_str();
    s_imp->add_option("--f-max-hz", imp.f_max_hz, "Highest frequency")->capture_default_str();
    s_imp->add_option("--points", imp.points, "Number of frequencies")->capture_default_str();
    s_imp->add_option("--spacing", imp.spacing, "log or linear")->capture_default_str();
    s_imp->add_option("--fit-band-hz", imp.fit_band_hz, "Upper edge of the RC fit band")->capture_default_str();
    common(s_imp);

    StatsArgs stats;
    auto* s_stats = app.add_subcommand("stats", "Mean and spread of acquired phases");
    s_stats->add_option("--input", stats.input, "CSV with a phase column")->required();
    s_stats->add_option("--column", stats.column, "Column name")->capture_default_str();
    common(s_stats);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    CLI::App* chosen = app.get_subcommands().front();
    ctx.command = chosen->get_name();
    ctx.out_dir = out_dir;

    try {
        ctx.seed = seed_from_env(ctx.seed);
        if (chosen == s_design) cmd_design(design, ctx, out);
        else if (chosen == s_respond) cmd_respond(respond, ctx, out);
        else if (chosen == s_kexp) cmd_kexp(kexp, ctx, out);
        else if (chosen == s_sweep) cmd_sweep(sweep, ctx, out);
        else if (chosen == s_ramsey) cmd_ramsey(ramsey, ctx, out);
        else if (chosen == s_extract) cmd_extract(extract, ctx, out);
        else if (chosen == s_imp) cmd_impedance(imp, ctx, out);
        else if (chosen == s_stats) cmd_stats(stats, ctx, out);
        flush(ctx);
        write_manifest(ctx);
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const PipelineError& e) {
        err << "error: " << e.what() << "\n";
        if (e.validation()) return kExitValidation;
        ctx.files.clear();
        ctx.stage_json("diagnostics.json", {{"command", ctx.command}, {"stage", e.stage()}, {"error", e.what()}});
    } catch (const NonConvergence& e) {
        err << "error: " << e.what() << "\n";
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        ctx.files.clear();
        ctx.stage_json("diagnostics.json", {{"command", ctx.command}, {"error", e.what()}});
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        flush(ctx);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return kExitNonConvergence;
}

} // namespace fluxshape::cli
