#include "degradiag/dataio.hpp"
#include "degradiag/error.hpp"
#include "io_common.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>

namespace degradiag {

using detail::kIoModule;
using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& msg)
{
    throw Error(ErrorKind::Schema, kIoModule, path + ": " + msg);
}

json num(double v)
{
    if (!std::isfinite(v))
        return nullptr;
    return round_export(v);
}

const json& field(const json& j, const std::string& path, const char* key)
{
    if (!j.is_object())
        schema_error(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end())
        schema_error(path.empty() ? key : path + "." + key, "missing field");
    return *it;
}

std::string join(const std::string& path, const char* key)
{
    return path.empty() ? key : path + "." + key;
}

double get_number(const json& j, const std::string& path, const char* key, bool nullable = false)
{
    const json& v = field(j, path, key);
    if (nullable && v.is_null())
        return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number())
        schema_error(join(path, key), "expected a number");
    return v.get<double>();
}

bool get_bool(const json& j, const std::string& path, const char* key)
{
    const json& v = field(j, path, key);
    if (!v.is_boolean())
        schema_error(join(path, key), "expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json& j, const std::string& path, const char* key)
{
    const json& v = field(j, path, key);
    if (!v.is_string())
        schema_error(join(path, key), "expected a string");
    return v.get<std::string>();
}

std::size_t get_count(const json& j, const std::string& path, const char* key)
{
    const json& v = field(j, path, key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        schema_error(join(path, key), "expected a non-negative integer");
    return v.get<std::size_t>();
}

json parse(const std::string& text, const std::string& source)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Schema, kIoModule, source + ": malformed JSON: " + e.what());
    }
}

const char* kElectrodeFields[] = {"epsilon", "thickness", "area", "particle_radius", "c_s_max",
                                  "c_0",     "d_s",       "k_rxn", "theta_0",        "theta_f"};

double* electrode_field(ElectrodeParameters& e, std::size_t i)
{
    double* f[] = {&e.epsilon, &e.thickness, &e.area, &e.particle_radius, &e.c_s_max,
                   &e.c_0,     &e.d_s,       &e.k_rxn, &e.theta_0,        &e.theta_f};
    return f[i];
}

json electrode_to_json(const ElectrodeParameters& e)
{
    json j = json::object();
    ElectrodeParameters copy = e;
    for (std::size_t i = 0; i < std::size(kElectrodeFields); ++i)
        j[kElectrodeFields[i]] = num(*electrode_field(copy, i));
    return j;
}

ElectrodeParameters electrode_from_json(const json& j, const std::string& path)
{
    ElectrodeParameters e;
    if (!j.is_object())
        schema_error(path, "expected an object");
    for (std::size_t i = 0; i < std::size(kElectrodeFields); ++i)
        *electrode_field(e, i) = get_number(j, path, kElectrodeFields[i]);
    return e;
}

json stage_to_json(const std::optional<StageTrace>& st)
{
    if (!st)
        return nullptr;
    json j;
    j["evaluated"] = json::array();
    for (const auto& c : st->evaluated)
        j["evaluated"].push_back({{"candidate", num(c.candidate)}, {"loss", num(c.loss)}});
    j["skipped"] = json::array();
    for (const auto& s : st->skipped)
        j["skipped"].push_back({{"candidate", num(s.candidate)}, {"reason", s.reason}});
    return j;
}

std::optional<StageTrace> stage_from_json(const json& j, const std::string& path)
{
    if (j.is_null())
        return std::nullopt;
    StageTrace st;
    const json& ev = field(j, path, "evaluated");
    const json& sk = field(j, path, "skipped");
    if (!ev.is_array() || !sk.is_array())
        schema_error(path, "evaluated and skipped must be arrays");
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const std::string p = path + ".evaluated[" + std::to_string(i) + "]";
        st.evaluated.push_back({get_number(ev[i], p, "candidate"), get_number(ev[i], p, "loss")});
    }
    for (std::size_t i = 0; i < sk.size(); ++i) {
        const std::string p = path + ".skipped[" + std::to_string(i) + "]";
        st.skipped.push_back({get_number(sk[i], p, "candidate"), get_string(sk[i], p, "reason")});
    }
    return st;
}

json flags_to_json(const MechanismFlags& f)
{
    json j;
    j["lli"] = f.lli;
    j["lam_ne"] = f.lam_ne;
    j["lam_pe"] = f.lam_pe;
    j["evidence"] = json::object();
    for (const auto& [k, v] : f.evidence)
        j["evidence"][k] = v;
    return j;
}

MechanismFlags flags_from_json(const json& j, const std::string& path)
{
    MechanismFlags f;
    f.lli = get_bool(j, path, "lli");
    f.lam_ne = get_bool(j, path, "lam_ne");
    f.lam_pe = get_bool(j, path, "lam_pe");
    const json& ev = field(j, path, "evidence");
    if (!ev.is_object())
        schema_error(path + ".evidence", "expected an object");
    for (const auto& [k, v] : ev.items()) {
        if (!v.is_string())
            schema_error(path + ".evidence." + k, "expected a string");
        f.evidence[k] = v.get<std::string>();
    }
    return f;
}

json feature_to_json(const std::optional<DcaFeature>& f)
{
    if (!f)
        return nullptr;
    return {{"position_v", num(f->position_v)}, {"magnitude_ah_per_v", num(f->magnitude)}};
}

std::optional<DcaFeature> feature_from_json(const json& j, const std::string& path)
{
    if (j.is_null())
        return std::nullopt;
    return DcaFeature{get_number(j, path, "position_v"), get_number(j, path, "magnitude_ah_per_v")};
}

json window_to_json(const VoltageWindow& w) { return json::array({num(w.lo), num(w.hi)}); }

VoltageWindow window_from_json(const json& j, const std::string& path)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        schema_error(path, "expected [low, high]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json features_json(const DcaFeatureSet& f)
{
    json j;
    j["low_voltage_peak"] = feature_to_json(f.low_voltage_peak);
    j["high_voltage_valley"] = feature_to_json(f.high_voltage_valley);
    j["search_windows"] = {{"peak", window_to_json(f.search_windows.peak)},
                           {"valley", window_to_json(f.search_windows.valley)}};
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string relative_reference(const fs::path& target, const fs::path& base_dir)
{
    std::error_code ec;
    const fs::path abs_target = fs::absolute(target, ec);
    const fs::path abs_base = fs::absolute(base_dir.empty() ? fs::path(".") : base_dir, ec);
    const fs::path rel = fs::relative(abs_target, abs_base, ec);
    if (ec || rel.empty())
        return abs_target.generic_string();
    return rel.generic_string();
}

} // namespace

CellParameters load_cell_config(const fs::path& path)
{
    const json j = parse(read_file(path), path.string());
    if (!j.is_object())
        schema_error(path.string(), "top level must be an object");
    CellParameters cell;
    cell.negative = electrode_from_json(field(j, "", "negative"), "negative");
    cell.positive = electrode_from_json(field(j, "", "positive"), "positive");
    cell.r_ohmic = get_number(j, "", "r_ohmic");
    cell.c_electrolyte = get_number(j, "", "c_electrolyte");
    cell.temperature = get_number(j, "", "temperature");
    cell.v_min = get_number(j, "", "v_min");
    cell.v_max = get_number(j, "", "v_max");
    cell.nominal_capacity = get_number(j, "", "nominal_capacity");
    const fs::path dir = path.parent_path();
    cell.ocp_negative = load_ocp_csv(dir / get_string(j, "", "ocp_negative_path"), ElectrodeTag::negative);
    cell.ocp_positive = load_ocp_csv(dir / get_string(j, "", "ocp_positive_path"), ElectrodeTag::positive);
    validate(cell);
    return cell;
}

void save_cell_config(const CellParameters& cell, const fs::path& path)
{
    const fs::path dir = path.parent_path();
    auto reference = [&](const OcpTable& t, const char* fallback) {
        if (!t.source.empty())
            return relative_reference(t.source, dir);
        fs::path stem = path.stem();
        const fs::path file = dir / (stem.string() + "_" + fallback + ".csv");
        save_ocp_csv(t, file);
        return file.filename().generic_string();
    };
    json j;
    j["negative"] = electrode_to_json(cell.negative);
    j["positive"] = electrode_to_json(cell.positive);
    j["ocp_negative_path"] = reference(cell.ocp_negative, "ocp_negative");
    j["ocp_positive_path"] = reference(cell.ocp_positive, "ocp_positive");
    j["r_ohmic"] = num(cell.r_ohmic);
    j["c_electrolyte"] = num(cell.c_electrolyte);
    j["temperature"] = num(cell.temperature);
    j["v_min"] = num(cell.v_min);
    j["v_max"] = num(cell.v_max);
    j["nominal_capacity"] = num(cell.nominal_capacity);
    write_file_atomic(path, dump(j));
}

std::string report_to_json(const DegradationReport& r, bool include_search_trace)
{
    json j;
    j["schema_version"] = r.schema_version;
    j["complete"] = r.complete;
    j["failure"] = r.failure;
    j["flags"] = flags_to_json(r.flags);
    j["estimated"] = {{"c_n0", num(r.estimated.c_n0)},
                      {"eps_n", num(r.estimated.eps_n)},
                      {"eps_p", num(r.estimated.eps_p)}};
    j["deltas"] = json::array();
    for (const auto& d : r.deltas)
        j["deltas"].push_back({{"parameter_name", std::string(to_string(d.parameter_name))},
                               {"bol_value", num(d.bol_value)},
                               {"aged_value", num(d.aged_value)},
                               {"relative_change", num(d.relative_change)}});
    j["fit_rms"] = num(r.fit_rms);
    j["valley_residual"] = num(r.valley_residual);
    j["capacity_measured"] = num(r.capacity_measured);
    j["capacity_simulated"] = num(r.capacity_simulated);
    j["capacity_fallback"] = r.capacity_fallback;
    j["refinement_passes"] = r.refinement_passes;
    if (include_search_trace)
        j["search_trace"] = {{"c_n0", stage_to_json(r.search_trace.c_n0)},
                             {"eps_n", stage_to_json(r.search_trace.eps_n)},
                             {"eps_p", stage_to_json(r.search_trace.eps_p)}};
    return dump(j);
}

DegradationReport report_from_json(const std::string& text)
{
    const json j = parse(text, "report");
    DegradationReport r;
    const auto version = get_count(j, "", "schema_version");
    if (version != static_cast<std::size_t>(kReportSchemaVersion))
        schema_error("schema_version", "unsupported version " + std::to_string(version));
    r.schema_version = static_cast<int>(version);
    r.complete = get_bool(j, "", "complete");
    r.failure = get_string(j, "", "failure");
    r.flags = flags_from_json(field(j, "", "flags"), "flags");
    const json& est = field(j, "", "estimated");
    r.estimated = {get_number(est, "estimated", "c_n0"), get_number(est, "estimated", "eps_n"),
                   get_number(est, "estimated", "eps_p")};
    const json& deltas = field(j, "", "deltas");
    if (!deltas.is_array())
        schema_error("deltas", "expected an array");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const std::string p = "deltas[" + std::to_string(i) + "]";
        ParameterDelta d;
        try {
            d.parameter_name = aging_parameter_from_string(get_string(deltas[i], p, "parameter_name"));
        } catch (const Error& e) {
            schema_error(p + ".parameter_name", e.what());
        }
        d.bol_value = get_number(deltas[i], p, "bol_value");
        d.aged_value = get_number(deltas[i], p, "aged_value");
        d.relative_change = get_number(deltas[i], p, "relative_change");
        r.deltas.push_back(d);
    }
    r.fit_rms = get_number(j, "", "fit_rms", true);
    r.valley_residual = get_number(j, "", "valley_residual", true);
    r.capacity_measured = get_number(j, "", "capacity_measured");
    r.capacity_simulated = get_number(j, "", "capacity_simulated", true);
    r.capacity_fallback = get_bool(j, "", "capacity_fallback");
    r.refinement_passes = get_count(j, "", "refinement_passes");
    if (j.contains("search_trace")) {
        const json& st = j["search_trace"];
        r.search_trace.c_n0 = stage_from_json(field(st, "search_trace", "c_n0"), "search_trace.c_n0");
        r.search_trace.eps_n = stage_from_json(field(st, "search_trace", "eps_n"), "search_trace.eps_n");
        r.search_trace.eps_p = stage_from_json(field(st, "search_trace", "eps_p"), "search_trace.eps_p");
    }
    return r;
}

void save_report(const DegradationReport& report, const fs::path& path, bool include_search_trace)
{
    write_file_atomic(path, report_to_json(report, include_search_trace));
}

DegradationReport load_report(const fs::path& path)
{
    try {
        return report_from_json(read_file(path));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Schema)
            throw;
        throw Error(ErrorKind::Schema, kIoModule, path.string() + ": " + e.what());
    }
}

std::string features_to_json(const DcaFeatureSet& f) { return dump(features_json(f)); }

DcaFeatureSet features_from_json(const std::string& text)
{
    const json j = parse(text, "features");
    DcaFeatureSet f;
    f.low_voltage_peak = feature_from_json(field(j, "", "low_voltage_peak"), "low_voltage_peak");
    f.high_voltage_valley = feature_from_json(field(j, "", "high_voltage_valley"), "high_voltage_valley");
    const json& w = field(j, "", "search_windows");
    f.search_windows.peak = window_from_json(field(w, "search_windows", "peak"), "search_windows.peak");
    f.search_windows.valley =
        window_from_json(field(w, "search_windows", "valley"), "search_windows.valley");
    return f;
}

void save_features(const DcaFeatureSet& features, const fs::path& path)
{
    write_file_atomic(path, features_to_json(features));
}

void save_diagnosis(const Diagnosis& d, const fs::path& path)
{
    json j;
    j["flags"] = flags_to_json(d.flags);
    j["feature_delta"] = {{"peak_shift_v", num(d.delta.peak_shift)},
                          {"peak_ratio", num(d.delta.peak_ratio)},
                          {"valley_shift_v", num(d.delta.valley_shift)},
                          {"valley_ratio", num(d.delta.valley_ratio)}};
    j["reference_features"] = features_json(d.fresh.features);
    j["measured_features"] = features_json(d.measured.features);
    write_file_atomic(path, dump(j));
}

std::string format_report_text(const DegradationReport& r)
{
    char buf[512];
    std::string out;
    auto line = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        out += buf;
        out += '\n';
    };
    line("Degradation report (schema %d)%s", r.schema_version, r.complete ? "" : " [INCOMPLETE]");
    if (!r.complete)
        line("  failure: %s", r.failure.c_str());
    out += "Mechanisms\n";
    auto flag = [&](const char* name, bool on) {
        const auto it = r.flags.evidence.find(name);
        line("  %-7s %-3s %s", name, on ? "yes" : "no",
             it == r.flags.evidence.end() ? "" : it->second.c_str());
    };
    flag("lli", r.flags.lli);
    flag("lam_ne", r.flags.lam_ne);
    flag("lam_pe", r.flags.lam_pe);
    out += "Parameters            BOL          aged     change\n";
    for (const auto& d : r.deltas)
        line("  %-8s %12.6g  %12.6g  %+8.3f %%", std::string(to_string(d.parameter_name)).c_str(),
             d.bol_value, d.aged_value, d.relative_change * 100.0);
    out += "Fit\n";
    line("  RMS voltage error     %.3f mV", r.fit_rms * 1e3);
    line("  valley residual       %+.3f mV", r.valley_residual * 1e3);
    line("  capacity measured     %.4f Ah", r.capacity_measured);
    line("  capacity simulated    %.4f Ah", r.capacity_simulated);
    if (r.capacity_fallback)
        out += "  note: no eps_n candidate met the capacity tolerance; weighted fallback used\n";
    if (r.refinement_passes > 0)
        line("  refinement passes     %zu", r.refinement_passes);
    return out;
}

} // namespace degradiag
