// Command-line front end. Each subcommand reads files, calls the library and
// writes files; the numerics live in the library.
//
// Exit status: 0 success, 1 invalid input or usage, 2 numerical or estimation failure.

#include "degradiag/degradiag.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace dd = degradiag;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNumerical = 2;

// Timestamped progress lines, kept out of the payload files.
class SidecarLog {
public:
    void open(const fs::path& out)
    {
        if (out.empty())
            return;
        fs::path p = out;
        p += ".log";
        _file.open(p, std::ios::trunc);
    }

    void write(const std::string& msg)
    {
        if (!_file)
            return;
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        std::tm tm{};
        gmtime_r(&t, &tm);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
        _file << stamp << ' ' << msg << '\n';
        _file.flush();
    }

private:
    std::ofstream _file;
};

struct Options {
    std::string command;
    fs::path config;
    fs::path trace;
    fs::path out;
    fs::path in;
    fs::path svg;
    fs::path features_out;
    fs::path trace_out;
    std::string format = "time_current_voltage";
    std::size_t min_rows = 10;
    std::string direction = "discharge";

    double c_rate = 0.05;
    double dt = 10.0;
    std::size_t shells = 20;

    double x_lli = 0.0;
    double lam_ne = 0.0;
    double lam_pe = 0.0;

    std::string smoothing = "savitzky_golay";
    std::size_t window = 25;
    std::size_t order = 3;
    std::size_t resample = 1000;
    std::vector<double> peak_window{3.35, 3.55};
    std::vector<double> valley_window{3.70, 3.95};

    dd::DiagnosisThresholds thresholds;
    double grid_lower = 0.85;
    std::size_t grid_points = 61;
    std::size_t jobs = 1;
    std::size_t refine = 0;
    bool no_trace = false;
};

dd::SmoothingConfig smoothing_config(const Options& o)
{
    dd::SmoothingConfig cfg;
    cfg.method = dd::smoothing_method_from_string(o.smoothing);
    cfg.window_points = o.window;
    cfg.polynomial_order = o.order;
    cfg.resample_points = o.resample;
    dd::validate(cfg);
    return cfg;
}

dd::SearchWindows search_windows(const Options& o)
{
    dd::SearchWindows w;
    w.peak = {o.peak_window.at(0), o.peak_window.at(1)};
    w.valley = {o.valley_window.at(0), o.valley_window.at(1)};
    if (!(w.peak.lo < w.peak.hi) || !(w.valley.lo < w.valley.hi))
        throw dd::Error(dd::ErrorKind::Validation, "cli", "search windows must be [low high]");
    return w;
}

dd::EvaluationSettings evaluation_settings(const Options& o)
{
    if (!(o.c_rate > 0.0) || o.c_rate > 1.0)
        throw dd::Error(dd::ErrorKind::Validation, "cli", "--c-rate must lie in (0, 1]");
    if (!(o.dt > 0.0))
        throw dd::Error(dd::ErrorKind::Validation, "cli", "--dt must be positive");
    if (o.shells < 2)
        throw dd::Error(dd::ErrorKind::Validation, "cli", "--shells must be at least 2");
    dd::EvaluationSettings s;
    s.c_rate = o.c_rate;
    s.dt = o.dt;
    s.shells = o.shells;
    s.smoothing = smoothing_config(o);
    s.windows = search_windows(o);
    s.jobs = o.jobs;
    return s;
}

dd::MeasurementFileSpec measurement_spec(const Options& o)
{
    dd::MeasurementFileSpec spec;
    if (o.format == "time_current_voltage")
        spec.format = dd::MeasurementFormat::time_current_voltage;
    else if (o.format == "capacity_voltage")
        spec.format = dd::MeasurementFormat::capacity_voltage;
    else
        throw dd::Error(dd::ErrorKind::Validation, "cli", "unknown --format '" + o.format + "'");
    spec.direction = o.direction == "charge" ? dd::Direction::charge : dd::Direction::discharge;
    spec.min_rows = o.min_rows;
    return spec;
}

fs::path sibling(const fs::path& out, const std::string& suffix)
{
    fs::path p = out.parent_path() / out.stem();
    p += suffix;
    return p;
}

int run_simulate(const Options& o, SidecarLog& log)
{
    const auto s = evaluation_settings(o);
    const auto cell = dd::load_cell_config(o.config);
    dd::SimulationOptions opt;
    opt.shells = s.shells;
    opt.direction = o.direction == "charge" ? dd::Direction::charge : dd::Direction::discharge;
    log.write("simulate " + o.config.string() + " c_rate=" + dd::format_number(s.c_rate));
    const auto trace = dd::simulate_constant_current(cell, s.c_rate, s.dt, opt);
    dd::save_trace_csv(trace, o.out);
    log.write("wrote " + o.out.string() + " capacity_ah=" + dd::format_number(trace.capacity()));
    return kExitOk;
}

int run_inject(const Options& o, SidecarLog& log)
{
    const auto s = evaluation_settings(o);
    const auto cell = dd::load_cell_config(o.config);
    const dd::MechanismMagnitudes m{o.x_lli, o.lam_ne, o.lam_pe};
    const auto aged = dd::apply_mechanisms(cell, m);
    dd::validate(aged);
    dd::save_cell_config(aged, o.out);
    log.write("wrote aged config " + o.out.string());
    dd::SimulationOptions opt;
    opt.shells = s.shells;
    const auto trace = dd::simulate_constant_current(aged, s.c_rate, s.dt, opt);
    const fs::path trace_out = o.trace_out.empty() ? sibling(o.out, "_trace.csv") : o.trace_out;
    dd::save_trace_csv(trace, trace_out);
    log.write("wrote " + trace_out.string() + " capacity_ah=" + dd::format_number(trace.capacity()));
    return kExitOk;
}

int run_dca(const Options& o, SidecarLog& log)
{
    const auto cfg = smoothing_config(o);
    const auto windows = search_windows(o);
    const auto trace = dd::load_voltage_csv(o.trace, measurement_spec(o));
    const auto fx = dd::extract_features(trace, cfg, windows);
    dd::export_dca(fx.curve, o.out);
    const fs::path features = o.features_out.empty() ? sibling(o.out, "_features.json") : o.features_out;
    dd::save_features(fx.features, features);
    log.write("wrote " + o.out.string() + " and " + features.string());
    if (!o.svg.empty()) {
        dd::export_plot_svg({{o.trace.stem().string(), fx.curve}}, dd::feature_markers(fx.features, ""),
                            o.svg);
        log.write("wrote " + o.svg.string());
    }
    return kExitOk;
}

int run_diagnose(const Options& o, SidecarLog& log)
{
    dd::validate(o.thresholds);
    const auto s = evaluation_settings(o);
    const auto cell = dd::load_cell_config(o.config);
    const auto trace = dd::load_voltage_csv(o.trace, measurement_spec(o));
    const auto d = dd::diagnose(cell, trace, o.thresholds, s);
    dd::save_diagnosis(d, o.out);
    log.write("wrote " + o.out.string());
    return kExitOk;
}

int run_calibrate(const Options& o, SidecarLog& log)
{
    dd::CalibrationOptions copt;
    copt.thresholds = o.thresholds;
    dd::validate(copt.thresholds);
    copt.settings = evaluation_settings(o);
    copt.refinement_passes = o.refine;
    if (!(o.grid_lower > 0.0 && o.grid_lower < 1.0) || o.grid_points < 2)
        throw dd::Error(dd::ErrorKind::Validation, "cli",
                        "--grid-lower must lie in (0,1) and --grid-points be at least 2");
    const auto cell = dd::load_cell_config(o.config);
    const auto trace = dd::load_voltage_csv(o.trace, measurement_spec(o));
    const auto grids = dd::EstimationGrids::defaults_for(cell, o.grid_lower, o.grid_points);
    log.write("calibrate " + o.trace.string() + " jobs=" + std::to_string(o.jobs));

    dd::DegradationReport report;
    try {
        report = dd::calibrate(cell, trace, grids, copt);
    } catch (const dd::CalibrationError& e) {
        dd::save_report(e.partial_report(), o.out, !o.no_trace);
        log.write("partial report written: " + std::string(e.what()));
        throw;
    }
    dd::save_report(report, o.out, !o.no_trace);
    log.write("wrote " + o.out.string());

    if (!o.svg.empty()) {
        const auto s = copt.settings;
        dd::SimulationOptions opt;
        opt.shells = s.shells;
        const auto fitted = dd::simulate_constant_current(dd::calibrated_cell(cell, report), s.c_rate, s.dt, opt);
        const auto meas = dd::extract_features(trace, s.smoothing, s.windows);
        const auto sim = dd::extract_features(fitted, s.smoothing, s.windows);
        auto markers = dd::feature_markers(meas.features, "measured");
        for (auto& m : dd::feature_markers(sim.features, "simulated"))
            markers.push_back(m);
        dd::export_plot_svg({{"measured", meas.curve}, {"simulated", sim.curve}}, markers, o.svg,
                            "Measured vs calibrated simulation");
        log.write("wrote " + o.svg.string());
    }
    return kExitOk;
}

int run_report(const Options& o, SidecarLog& log)
{
    const auto report = dd::load_report(o.in);
    const std::string text = dd::format_report_text(report);
    if (o.out.empty()) {
        std::cout << text;
    } else {
        dd::write_file_atomic(o.out, text);
        log.write("wrote " + o.out.string());
    }
    return kExitOk;
}

void add_model_options(CLI::App* app, Options& o)
{
    app->add_option("--c-rate", o.c_rate, "C-rate of the constant-current discharge")->capture_default_str();
    app->add_option("--dt", o.dt, "Output time step, s")->capture_default_str();
    app->add_option("--shells", o.shells, "Radial finite-volume shells")->capture_default_str();
}

void add_dca_options(CLI::App* app, Options& o)
{
    app->add_option("--smoothing", o.smoothing, "none | moving_average | savitzky_golay")->capture_default_str();
    app->add_option("--window", o.window, "Smoothing window, odd number of points")->capture_default_str();
    app->add_option("--order", o.order, "Savitzky-Golay polynomial order")->capture_default_str();
    app->add_option("--resample", o.resample, "Uniform-charge points before differentiation (0 = raw)")
        ->capture_default_str();
    app->add_option("--peak-window", o.peak_window, "Low-voltage peak search window, V")->expected(2);
    app->add_option("--valley-window", o.valley_window, "High-voltage valley search window, V")->expected(2);
}

void add_trace_input(CLI::App* app, Options& o)
{
    app->add_option("--trace", o.trace, "Measured discharge CSV")->required();
    app->add_option("--format", o.format, "time_current_voltage | capacity_voltage")->capture_default_str();
    app->add_option("--min-rows", o.min_rows, "Minimum data rows accepted")->capture_default_str();
}

void add_threshold_options(CLI::App* app, Options& o)
{
    auto& t = o.thresholds;
    app->add_option("--valley-shift", t.valley_shift_significant, "Significant valley shift, V")->capture_default_str();
    app->add_option("--peak-ratio", t.peak_ratio_significant, "Significant peak ratio excess")->capture_default_str();
    app->add_option("--valley-ratio", t.valley_ratio_significant, "Significant valley ratio deficit")->capture_default_str();
    app->add_option("--residual-shift", t.residual_valley_shift, "Residual valley shift for LAM_PE, V")->capture_default_str();
    app->add_option("--capacity-tol", t.capacity_tolerance, "Relative capacity tolerance")->capture_default_str();
}

int exit_code_for(const dd::Error& e) { return e.is_numerical() ? kExitNumerical : kExitInvalid; }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Degradation diagnosis from slow-rate discharge data"};
    app.require_subcommand(1);
    Options o;

    auto* sim = app.add_subcommand("simulate", "Simulate a constant-current discharge");
    sim->add_option("--config", o.config, "Cell parameter JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", o.out, "Output trace CSV")->required();
    sim->add_option("--direction", o.direction, "discharge | charge")->check(CLI::IsMember({"discharge", "charge"}));
    add_model_options(sim, o);

    auto* inj = app.add_subcommand("inject", "Apply degradation magnitudes and simulate the aged cell");
    inj->add_option("--config", o.config, "Cell parameter JSON")->required()->check(CLI::ExistingFile);
    inj->add_option("--out", o.out, "Aged cell parameter JSON")->required();
    inj->add_option("--trace-out", o.trace_out, "Aged trace CSV (default: <out>_trace.csv)");
    inj->add_option("--x-lli", o.x_lli, "Stoichiometry lost from the negative window")->capture_default_str();
    inj->add_option("--lam-ne", o.lam_ne, "Fractional loss of eps_n")->capture_default_str();
    inj->add_option("--lam-pe", o.lam_pe, "Fractional loss of eps_p")->capture_default_str();
    add_model_options(inj, o);

    auto* dca = app.add_subcommand("dca", "Differential capacity curve and features of a trace");
    add_trace_input(dca, o);
    dca->add_option("--out", o.out, "DCA CSV")->required();
    dca->add_option("--features", o.features_out, "Feature JSON (default: <out>_features.json)");
    dca->add_option("--svg", o.svg, "Optional SVG plot");
    add_dca_options(dca, o);

    auto* dia = app.add_subcommand("diagnose", "Classify degradation mechanisms");
    dia->add_option("--config", o.config, "BOL cell parameter JSON")->required()->check(CLI::ExistingFile);
    add_trace_input(dia, o);
    dia->add_option("--out", o.out, "Flags JSON")->required();
    add_model_options(dia, o);
    add_dca_options(dia, o);
    add_threshold_options(dia, o);

    auto* cal = app.add_subcommand("calibrate", "Diagnose and estimate c_n0, eps_n, eps_p");
    cal->add_option("--config", o.config, "BOL cell parameter JSON")->required()->check(CLI::ExistingFile);
    add_trace_input(cal, o);
    cal->add_option("--out", o.out, "Report JSON")->required();
    cal->add_option("--svg", o.svg, "Optional measured-vs-simulated DCA overlay");
    cal->add_option("--jobs", o.jobs, "Concurrent candidate simulations (0 = all cores)")->capture_default_str();
    cal->add_flag("--no-trace", o.no_trace, "Omit the per-candidate search trace");
    cal->add_option("--refine", o.refine, "Refinement passes after the first sweep")->capture_default_str();
    cal->add_option("--grid-lower", o.grid_lower, "Lowest candidate as a fraction of BOL")->capture_default_str();
    cal->add_option("--grid-points", o.grid_points, "Candidates per parameter")->capture_default_str();
    add_model_options(cal, o);
    add_dca_options(cal, o);
    add_threshold_options(cal, o);

    auto* rep = app.add_subcommand("report", "Print a report JSON as text");
    rep->add_option("--in", o.in, "Report JSON")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", o.out, "Write the text here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    SidecarLog log;
    log.open(o.out);
    CLI::App* cmd = app.get_subcommands().front();
    try {
        const std::string name = cmd->get_name();
        if (name == "simulate")
            return run_simulate(o, log);
        if (name == "inject")
            return run_inject(o, log);
        if (name == "dca")
            return run_dca(o, log);
        if (name == "diagnose")
            return run_diagnose(o, log);
        if (name == "calibrate")
            return run_calibrate(o, log);
        return run_report(o, log);
    } catch (const dd::Error& e) {
        std::cerr << "error [" << e.module() << ", " << dd::to_string(e.kind()) << "]: " << e.what() << '\n';
        log.write(std::string("failed: ") + e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        log.write(std::string("failed: ") + e.what());
        return kExitInvalid;
    }
}
