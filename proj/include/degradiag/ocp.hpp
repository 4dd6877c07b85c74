#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

namespace degradiag {

enum class ElectrodeTag { negative, positive };

std::string_view to_string(ElectrodeTag tag) noexcept;

/// Open-circuit potential of one electrode vs Li/Li+, tabulated on stoichiometry.
struct OcpTable {
    std::vector<double> stoichiometry;
    std::vector<double> potential;
    ElectrodeTag tag = ElectrodeTag::negative;
    /// File the table was read from, if any. Not part of equality.
    std::filesystem::path source;

    friend bool operator==(const OcpTable& a, const OcpTable& b)
    {
        return a.tag == b.tag && a.stoichiometry == b.stoichiometry && a.potential == b.potential;
    }
};

/// Throws Error{InvalidTable} unless the grid is strictly increasing inside [0,1],
/// has at least two nodes, and the potential is finite and non-increasing.
void validate(const OcpTable& table);

struct OcpLookup {
    double volts;
    bool extrapolated; // theta fell outside the tabulated span; endpoint value returned
};

/// Piecewise-linear lookup, exact at nodes, clamped outside the grid span.
/// theta must lie in [0,1].
OcpLookup ocp_lookup(const OcpTable& table, double theta);

inline double ocp_eval(const OcpTable& table, double theta) { return ocp_lookup(table, theta).volts; }

} // namespace degradiag
