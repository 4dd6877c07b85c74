#include "degradiag/ocp.hpp"
#include "degradiag/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace degradiag {

namespace {
[[noreturn]] void table_error(const std::string& msg)
{
    throw Error(ErrorKind::InvalidTable, "model-core", "OCP table: " + msg);
}
} // namespace

std::string_view to_string(ElectrodeTag tag) noexcept
{
    return tag == ElectrodeTag::negative ? "negative" : "positive";
}

void validate(const OcpTable& table)
{
    const auto& x = table.stoichiometry;
    const auto& u = table.potential;
    if (x.size() < 2)
        table_error("needs at least 2 points, got " + std::to_string(x.size()));
    if (x.size() != u.size())
        table_error("stoichiometry and potential lengths differ");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || x[i] < 0.0 || x[i] > 1.0)
            table_error("theta[" + std::to_string(i) + "] outside [0,1]");
        if (!std::isfinite(u[i]))
            table_error("potential[" + std::to_string(i) + "] is not finite");
        if (i > 0 && !(x[i] > x[i - 1]))
            table_error("theta not strictly increasing at index " + std::to_string(i));
        if (i > 0 && u[i] > u[i - 1])
            table_error("potential increases with theta at index " + std::to_string(i));
    }
}

OcpLookup ocp_lookup(const OcpTable& table, double theta)
{
    const auto& x = table.stoichiometry;
    const auto& u = table.potential;
    if (x.size() < 2 || u.size() != x.size())
        table_error("needs at least 2 points");
    if (!(theta >= 0.0 && theta <= 1.0))
        throw Error(ErrorKind::Domain, "model-core",
                    "stoichiometry " + std::to_string(theta) + " outside [0,1] for " +
                        std::string(to_string(table.tag)) + " OCP");
    if (theta <= x.front())
        return {u.front(), theta < x.front()};
    if (theta >= x.back())
        return {u.back(), theta > x.back()};

    const auto it = std::upper_bound(x.begin(), x.end(), theta);
    const auto hi = static_cast<std::size_t>(it - x.begin());
    const auto lo = hi - 1;
    if (theta == x[lo])
        return {u[lo], false};
    const double w = (theta - x[lo]) / (x[hi] - x[lo]);
    return {u[lo] + w * (u[hi] - u[lo]), false};
}

} // namespace degradiag
