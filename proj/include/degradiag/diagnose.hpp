#pragma once

#include "degradiag/degradation.hpp"
#include "degradiag/error.hpp"
#include "degradiag/ica.hpp"
#include "degradiag/parameters.hpp"
#include "degradiag/trace.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace degradiag {

struct DiagnosisThresholds {
    double valley_shift_significant = 0.005; // V
    double peak_ratio_significant = 0.02;
    double valley_ratio_significant = 0.02;
    double residual_valley_shift = 0.005;    // V
    double capacity_tolerance = 0.005;       // relative

    friend bool operator==(const DiagnosisThresholds&, const DiagnosisThresholds&) = default;
};

void validate(const DiagnosisThresholds& t);

struct MechanismFlags {
    bool lli = false;
    bool lam_ne = false;
    bool lam_pe = false;
    /// Keyed by "lli", "lam_ne", "lam_pe"; present for every true flag.
    std::map<std::string, std::string> evidence;

    friend bool operator==(const MechanismFlags&, const MechanismFlags&) = default;
};

MechanismFlags classify_mechanisms(const FeatureDelta& delta, const DiagnosisThresholds& thresholds);

/// Shared settings for every candidate simulation and feature extraction.
struct EvaluationSettings {
    double c_rate = 0.05;
    double dt = 10.0;      // s
    std::size_t shells = 20;
    SmoothingConfig smoothing;
    SearchWindows windows;
    std::size_t rms_points = 1000; // normalized-capacity grid for RMS
    /// Stage 2 compares on the measured capacity axis so that the capacity
    /// information survives into the RMS; stage 3 and the reported fit RMS compare
    /// shapes on each trace's own normalized axis.
    RmsAxis eps_n_axis = RmsAxis::reference_capacity;
    RmsAxis eps_p_axis = RmsAxis::own_capacity;
    std::size_t jobs = 1;          // concurrent candidate simulations

    friend bool operator==(const EvaluationSettings&, const EvaluationSettings&) = default;
};

struct CandidateLoss {
    double candidate = 0.0;
    double loss = 0.0;

    friend bool operator==(const CandidateLoss&, const CandidateLoss&) = default;
};

struct SkippedCandidate {
    double candidate = 0.0;
    std::string reason;

    friend bool operator==(const SkippedCandidate&, const SkippedCandidate&) = default;
};

struct StageTrace {
    std::vector<CandidateLoss> evaluated;
    std::vector<SkippedCandidate> skipped;

    friend bool operator==(const StageTrace&, const StageTrace&) = default;
};

struct StageResult {
    double value = 0.0;
    double loss = 0.0;
    StageTrace trace;
    /// Stage 2 only: no candidate met the capacity tolerance, weighted fallback used.
    bool capacity_fallback = false;
};

/// Index of the smallest loss; equal losses go to the candidate nearest `reference`,
/// then to the earlier index.
std::size_t select_index(const std::vector<CandidateLoss>& losses, double reference);

/// Ordered candidate list from lo to hi inclusive.
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

struct EstimationGrids {
    std::vector<double> c_n0;
    std::vector<double> eps_n;
    std::vector<double> eps_p;

    /// 0.85 to 1.0 times the BOL value, 61 candidates each.
    static EstimationGrids defaults_for(const CellParameters& bol, double lower_fraction = 0.85,
                                        std::size_t points = 61);
};

/// Stage 1: valley-position match over c_n0, all other parameters taken from `base`.
/// Ties go to the candidate nearest base's c_n0.
StageResult estimate_cn0(const CellParameters& base, const VoltageTrace& measured,
                         const std::vector<double>& grid, const EvaluationSettings& settings = {});

/// Stage 2: capacity match within tolerance, then RMS voltage error among feasible
/// candidates; weighted fallback when nothing is feasible.
StageResult estimate_eps_n(const CellParameters& bol_with_cn0, const VoltageTrace& measured,
                           const std::vector<double>& grid, const EvaluationSettings& settings = {},
                           double capacity_tolerance = 0.005);

/// Stage 3: RMS voltage error over epsilon_p.
StageResult estimate_eps_p(const CellParameters& cell_after_stage2, const VoltageTrace& measured,
                           const std::vector<double>& grid, const EvaluationSettings& settings = {});

struct EstimatedParameters {
    double c_n0 = 0.0;
    double eps_n = 0.0;
    double eps_p = 0.0;

    friend bool operator==(const EstimatedParameters&, const EstimatedParameters&) = default;
};

struct SearchTrace {
    std::optional<StageTrace> c_n0;
    std::optional<StageTrace> eps_n;
    std::optional<StageTrace> eps_p;

    friend bool operator==(const SearchTrace&, const SearchTrace&) = default;
};

inline constexpr int kReportSchemaVersion = 1;

struct DegradationReport {
    int schema_version = kReportSchemaVersion;
    bool complete = true;
    std::string failure; // set when complete is false
    MechanismFlags flags;
    EstimatedParameters estimated;
    std::vector<ParameterDelta> deltas;
    double fit_rms = 0.0;         // V
    double valley_residual = 0.0; // simulated minus measured valley position, V
    double capacity_measured = 0.0;
    double capacity_simulated = 0.0;
    bool capacity_fallback = false;
    std::size_t refinement_passes = 0;
    SearchTrace search_trace;

    friend bool operator==(const DegradationReport&, const DegradationReport&) = default;
};

struct CalibrationOptions {
    DiagnosisThresholds thresholds;
    EvaluationSettings settings;
    /// Extra sweeps after the first one. Each re-runs stage 1 (if LLI was flagged)
    /// with the current epsilon estimates, then whichever of stages 2 and 3 ran.
    std::size_t refinement_passes = 0;
};

/// Thrown when a stage fails; carries the report assembled so far.
class CalibrationError : public Error {
public:
    CalibrationError(const Error& cause, DegradationReport partial);
    const DegradationReport& partial_report() const noexcept { return _partial; }

private:
    DegradationReport _partial;
};

/// Feature comparison of the fresh simulation against the measured trace.
struct Diagnosis {
    FeatureExtraction fresh;
    FeatureExtraction measured;
    FeatureDelta delta;
    MechanismFlags flags;
};

Diagnosis diagnose(const CellParameters& bol, const VoltageTrace& measured,
                   const DiagnosisThresholds& thresholds = {}, const EvaluationSettings& settings = {});

/// BOL cell with the report's estimated c_n0, eps_n and eps_p applied.
CellParameters calibrated_cell(const CellParameters& bol, const DegradationReport& report);

DegradationReport calibrate(const CellParameters& bol, const VoltageTrace& measured,
                            const EstimationGrids& grids, const CalibrationOptions& options = {});

} // namespace degradiag
