#pragma once

#include "degradiag/trace.hpp"

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace degradiag {

enum class SmoothingMethod { none, moving_average, savitzky_golay };

std::string_view to_string(SmoothingMethod m) noexcept;
SmoothingMethod smoothing_method_from_string(std::string_view name);

struct SmoothingConfig {
    SmoothingMethod method = SmoothingMethod::savitzky_golay;
    std::size_t window_points = 25;
    std::size_t polynomial_order = 3;
    /// Points of the uniform-charge grid the trace is resampled to first; 0 keeps
    /// the raw samples.
    std::size_t resample_points = 1000;
    /// Apply the same filter to V(Q) before differentiating. Has no effect when
    /// method is none.
    bool presmooth_voltage = true;

    friend bool operator==(const SmoothingConfig&, const SmoothingConfig&) = default;
};

/// Throws Error{Validation} for an even window, window < 3 or order >= window.
void validate(const SmoothingConfig& cfg);

struct DcaSample {
    double voltage_v = 0.0;
    double dq_dv = 0.0; // Ah/V, magnitude

    friend bool operator==(const DcaSample&, const DcaSample&) = default;
};

struct DcaCurve {
    std::vector<DcaSample> samples; // in trace order
    Provenance source = Provenance::simulated;
    SmoothingConfig smoothing;

    friend bool operator==(const DcaCurve&, const DcaCurve&) = default;
};

struct VoltageWindow {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const noexcept { return v >= lo && v <= hi; }
    friend bool operator==(const VoltageWindow&, const VoltageWindow&) = default;
};

struct SearchWindows {
    VoltageWindow peak{3.35, 3.55};
    VoltageWindow valley{3.70, 3.95};

    friend bool operator==(const SearchWindows&, const SearchWindows&) = default;
};

struct DcaFeature {
    double position_v = 0.0;
    double magnitude = 0.0;

    friend bool operator==(const DcaFeature&, const DcaFeature&) = default;
};

struct DcaFeatureSet {
    std::optional<DcaFeature> low_voltage_peak;
    std::optional<DcaFeature> high_voltage_valley;
    SearchWindows search_windows;

    friend bool operator==(const DcaFeatureSet&, const DcaFeatureSet&) = default;
};

struct FeatureDelta {
    double peak_shift = 0.0;   // V
    double peak_ratio = 1.0;
    double valley_shift = 0.0; // V
    double valley_ratio = 1.0;
};

/// Savitzky-Golay filter; edges use the polynomial fitted to the first/last window.
std::vector<double> savitzky_golay(const std::vector<double>& y, std::size_t window,
                                   std::size_t order);

/// Centered moving average; the window shrinks symmetrically near the edges.
std::vector<double> moving_average(const std::vector<double>& y, std::size_t window);

std::vector<double> smooth(const std::vector<double>& y, const SmoothingConfig& cfg);

/// Differential capacity of a trace: centered differences of charge with respect to
/// voltage on the deduplicated samples, then smoothing.
DcaCurve compute_dca(const VoltageTrace& trace, const SmoothingConfig& cfg = {});

DcaFeatureSet find_features(const DcaCurve& dca, const SearchWindows& windows = {});

/// Throws Error{MissingFeature} when either set lacks a feature.
FeatureDelta feature_shift(const DcaFeatureSet& reference, const DcaFeatureSet& degraded);

struct FeatureExtraction {
    DcaCurve curve;
    DcaFeatureSet features;
};

FeatureExtraction extract_features(const VoltageTrace& trace, const SmoothingConfig& cfg = {},
                                   const SearchWindows& windows = {});

} // namespace degradiag
