#include "degradiag/trace.hpp"
#include "degradiag/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace degradiag {

std::string_view to_string(Direction d) noexcept
{
    return d == Direction::charge ? "charge" : "discharge";
}

std::string_view to_string(Provenance p) noexcept
{
    return p == Provenance::measured ? "measured" : "simulated";
}

namespace {

void require_monotone_charge(const VoltageTrace& trace)
{
    if (trace.samples.empty())
        throw Error(ErrorKind::Data, "model-core", "trace is empty");
    for (std::size_t i = 1; i < trace.samples.size(); ++i)
        if (!(trace.samples[i].charge_ah >= trace.samples[i - 1].charge_ah))
            throw Error(ErrorKind::Data, "model-core",
                        "charge throughput decreases at sample " + std::to_string(i));
}

// Index of the last sample with charge <= q, restricted to [0, n-2].
std::size_t segment_for(const std::vector<TraceSample>& s, double q)
{
    auto it = std::upper_bound(s.begin(), s.end(), q,
                               [](double v, const TraceSample& x) { return v < x.charge_ah; });
    auto idx = static_cast<std::size_t>(it - s.begin());
    idx = idx == 0 ? 0 : idx - 1;
    return std::min(idx, s.size() - 2);
}

TraceSample interpolate(const std::vector<TraceSample>& s, double q)
{
    const std::size_t i = segment_for(s, q);
    const TraceSample& a = s[i];
    const TraceSample& b = s[i + 1];
    const double span = b.charge_ah - a.charge_ah;
    const double w = span > 0.0 ? (q - a.charge_ah) / span : 0.0;
    TraceSample out;
    out.charge_ah = q;
    out.time_s = a.time_s + w * (b.time_s - a.time_s);
    out.current_a = a.current_a + w * (b.current_a - a.current_a);
    out.voltage_v = a.voltage_v + w * (b.voltage_v - a.voltage_v);
    return out;
}

} // namespace

VoltageTrace resample_trace(const VoltageTrace& trace, std::size_t n_points)
{
    if (n_points < 2)
        throw Error(ErrorKind::Domain, "model-core", "resample_trace needs n_points >= 2");
    require_monotone_charge(trace);

    VoltageTrace out;
    out.direction = trace.direction;
    out.provenance = trace.provenance;
    const auto& s = trace.samples;
    if (s.size() == 1) {
        out.samples.assign(n_points, s.front());
        return out;
    }
    const double q0 = s.front().charge_ah;
    const double q1 = s.back().charge_ah;
    out.samples.reserve(n_points);
    out.samples.push_back(s.front());
    const double last = static_cast<double>(n_points - 1);
    for (std::size_t k = 1; k + 1 < n_points; ++k) {
        const double frac = static_cast<double>(k) / last;
        out.samples.push_back(interpolate(s, q0 + frac * (q1 - q0)));
    }
    out.samples.push_back(s.back());
    return out;
}

double voltage_at_charge(const VoltageTrace& trace, double charge_ah)
{
    require_monotone_charge(trace);
    const auto& s = trace.samples;
    if (s.size() == 1 || charge_ah <= s.front().charge_ah)
        return s.front().voltage_v;
    if (charge_ah >= s.back().charge_ah)
        return s.back().voltage_v;
    return interpolate(s, charge_ah).voltage_v;
}

std::string_view to_string(RmsAxis a) noexcept
{
    return a == RmsAxis::own_capacity ? "own_capacity" : "reference_capacity";
}

double rms_voltage_difference(const VoltageTrace& trace, const VoltageTrace& reference,
                              std::size_t n_points, RmsAxis axis)
{
    if (n_points < 2)
        throw Error(ErrorKind::Domain, "model-core", "RMS grid needs n_points >= 2");
    require_monotone_charge(trace);
    require_monotone_charge(reference);
    double acc = 0.0;
    if (axis == RmsAxis::own_capacity) {
        const VoltageTrace a = resample_trace(trace, n_points);
        const VoltageTrace b = resample_trace(reference, n_points);
        for (std::size_t i = 0; i < n_points; ++i) {
            const double d = a.samples[i].voltage_v - b.samples[i].voltage_v;
            acc += d * d;
        }
    } else {
        const double q0 = reference.samples.front().charge_ah;
        const double q1 = reference.samples.back().charge_ah;
        const double last = static_cast<double>(n_points - 1);
        for (std::size_t k = 0; k < n_points; ++k) {
            const double q = q0 + static_cast<double>(k) / last * (q1 - q0);
            const double d = voltage_at_charge(trace, q) - voltage_at_charge(reference, q);
            acc += d * d;
        }
    }
    return std::sqrt(acc / static_cast<double>(n_points));
}

} // namespace degradiag
