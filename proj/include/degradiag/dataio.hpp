#pragma once

#include "degradiag/diagnose.hpp"
#include "degradiag/ica.hpp"
#include "degradiag/ocp.hpp"
#include "degradiag/parameters.hpp"
#include "degradiag/trace.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace degradiag {

namespace fs = std::filesystem;

enum class MeasurementFormat { time_current_voltage, capacity_voltage };

/// Describes a measured discharge log. Units are restricted to s, A, V and Ah.
/// Discharge current may be logged with either sign; its magnitude is integrated.
struct MeasurementFileSpec {
    MeasurementFormat format = MeasurementFormat::time_current_voltage;
    std::string time_column = "time_s";
    std::string current_column = "current_a";
    std::string voltage_column = "voltage_v";
    std::string charge_column = "charge_ah";
    std::string time_unit = "s";
    std::string current_unit = "A";
    std::string voltage_unit = "V";
    std::string charge_unit = "Ah";
    Direction direction = Direction::discharge;
    std::size_t min_rows = 10;
};

/// All numbers are written with 9 significant digits.
std::string format_number(double v);
/// Value as it reads back after export.
double round_export(double v);

VoltageTrace load_voltage_csv(const fs::path& path, const MeasurementFileSpec& spec = {});
void save_trace_csv(const VoltageTrace& trace, const fs::path& path);

OcpTable load_ocp_csv(const fs::path& path, ElectrodeTag tag);
void save_ocp_csv(const OcpTable& table, const fs::path& path);

/// OCP paths in the file are resolved relative to the config's directory.
CellParameters load_cell_config(const fs::path& path);
/// OCP tables are referenced by their source path (relative to the new config when
/// possible); tables without a source are written next to the config.
void save_cell_config(const CellParameters& cell, const fs::path& path);

std::string report_to_json(const DegradationReport& report, bool include_search_trace = true);
DegradationReport report_from_json(const std::string& text);
void save_report(const DegradationReport& report, const fs::path& path,
                 bool include_search_trace = true);
DegradationReport load_report(const fs::path& path);
/// Plain-text summary for terminals.
std::string format_report_text(const DegradationReport& report);

void export_dca(const DcaCurve& curve, const fs::path& path);
DcaCurve load_dca_csv(const fs::path& path);

std::string features_to_json(const DcaFeatureSet& features);
DcaFeatureSet features_from_json(const std::string& text);
void save_features(const DcaFeatureSet& features, const fs::path& path);

/// Mechanism flags with the feature comparison that produced them.
void save_diagnosis(const Diagnosis& diagnosis, const fs::path& path);

struct PlotSeries {
    std::string name;
    DcaCurve curve;
};

struct PlotMarker {
    std::string label;
    double voltage_v = 0.0;
    double dq_dv = 0.0;
};

/// Markers for whichever features are present.
std::vector<PlotMarker> feature_markers(const DcaFeatureSet& features, const std::string& prefix);

/// Static SVG of dQ/dV against voltage: one polyline per series, labelled markers.
void export_plot_svg(const std::vector<PlotSeries>& curves, const std::vector<PlotMarker>& markers,
                     const fs::path& path, const std::string& title = "Differential capacity");

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const fs::path& path, const std::string& contents);
std::string read_file(const fs::path& path);

} // namespace degradiag
