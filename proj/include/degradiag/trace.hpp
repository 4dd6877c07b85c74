#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace degradiag {

enum class Direction { charge, discharge };
enum class Provenance { simulated, measured };

std::string_view to_string(Direction d) noexcept;
std::string_view to_string(Provenance p) noexcept;

struct TraceSample {
    double time_s = 0.0;
    double current_a = 0.0;
    double charge_ah = 0.0; // throughput since the start of the trace
    double voltage_v = 0.0;

    friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

struct VoltageTrace {
    std::vector<TraceSample> samples;
    Direction direction = Direction::discharge;
    Provenance provenance = Provenance::simulated;

    /// Final charge throughput, Ah. Zero for an empty trace.
    double capacity() const noexcept { return samples.empty() ? 0.0 : samples.back().charge_ah; }

    friend bool operator==(const VoltageTrace&, const VoltageTrace&) = default;
};

/// Re-grids a trace uniformly in normalized charge throughput. The first and last
/// samples are kept verbatim; everything else is linearly interpolated.
VoltageTrace resample_trace(const VoltageTrace& trace, std::size_t n_points);

/// Voltage of a trace at an absolute charge throughput (linear interpolation, clamped).
double voltage_at_charge(const VoltageTrace& trace, double charge_ah);

/// Capacity axis on which two traces are compared point by point.
///   own_capacity: each trace is resampled on its own normalized charge [0,1].
///   reference_capacity: both are sampled at x * reference capacity, x in [0,1]; a
///   trace shorter than the reference holds its final voltage past its end, so a
///   capacity mismatch shows up as voltage error.
enum class RmsAxis { own_capacity, reference_capacity };

std::string_view to_string(RmsAxis a) noexcept;

double rms_voltage_difference(const VoltageTrace& trace, const VoltageTrace& reference,
                              std::size_t n_points, RmsAxis axis = RmsAxis::own_capacity);

} // namespace degradiag
