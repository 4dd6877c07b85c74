#include "degradiag/degradation.hpp"
#include "degradiag/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace degradiag {

namespace {
constexpr const char* kModule = "degradation-map";

std::string num(double v) { return std::to_string(v); }
} // namespace

std::string_view to_string(AgingParameter p) noexcept
{
    switch (p) {
    case AgingParameter::c_n0: return "c_n0";
    case AgingParameter::eps_n: return "eps_n";
    case AgingParameter::eps_p: return "eps_p";
    }
    return "unknown";
}

AgingParameter aging_parameter_from_string(std::string_view name)
{
    if (name == "c_n0")
        return AgingParameter::c_n0;
    if (name == "eps_n")
        return AgingParameter::eps_n;
    if (name == "eps_p")
        return AgingParameter::eps_p;
    throw Error(ErrorKind::Schema, kModule, "unknown parameter name '" + std::string(name) + "'");
}

double electrode_capacity(const ElectrodeParameters& e)
{
    return (e.theta_0 - e.theta_f) * e.charge_per_stoichiometry();
}

double aged_capacity(const ElectrodeParameters& e, ElectrodeTag tag, const MechanismMagnitudes& m)
{
    const double window = e.theta_0 - e.theta_f;
    if (m.x_lli < 0.0 || m.x_lli >= window)
        throw Error(ErrorKind::DegenerateWindow, kModule,
                    "x_lli = " + num(m.x_lli) + " must lie in [0, " + num(window) + ")");
    const double lam = tag == ElectrodeTag::negative ? m.lam_ne : m.lam_pe;
    if (lam < 0.0 || lam >= 1.0)
        throw Error(ErrorKind::Domain, kModule, "loss fraction must lie in [0,1)");
    ElectrodeParameters aged = e;
    aged.epsilon = e.epsilon * (1.0 - lam);
    return (window - m.x_lli) * aged.charge_per_stoichiometry();
}

double cell_capacity(const CellParameters& cell)
{
    return std::min(electrode_capacity(cell.negative), electrode_capacity(cell.positive));
}

double cn0_from_theta0(double theta_0_n, double c_s_max_n)
{
    if (!(theta_0_n >= 0.0 && theta_0_n <= 1.0))
        throw Error(ErrorKind::Domain, kModule, "theta_0 must lie in [0,1]");
    if (!(c_s_max_n > 0.0))
        throw Error(ErrorKind::Domain, kModule, "c_s_max must be positive");
    return c_s_max_n * theta_0_n;
}

double theta0_from_cn0(double c_n0, double c_s_max_n)
{
    if (!(c_s_max_n > 0.0))
        throw Error(ErrorKind::Domain, kModule, "c_s_max must be positive");
    if (!(c_n0 >= 0.0) || c_n0 > c_s_max_n)
        throw Error(ErrorKind::Domain, kModule,
                    "c_n0 = " + num(c_n0) + " exceeds c_s_max = " + num(c_s_max_n));
    return c_n0 / c_s_max_n;
}

CellParameters with_cn0(const CellParameters& cell, double c_n0)
{
    CellParameters out = cell;
    out.negative.theta_0 = theta0_from_cn0(c_n0, cell.negative.c_s_max);
    out.negative.c_0 = c_n0;
    if (!(out.negative.theta_0 > out.negative.theta_f))
        throw Error(ErrorKind::DegenerateWindow, kModule,
                    "c_n0 = " + num(c_n0) + " leaves no negative lithiation window");
    return out;
}

CellParameters with_epsilon(const CellParameters& cell, ElectrodeTag electrode, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw Error(ErrorKind::Domain, kModule, "epsilon must lie in (0,1), got " + num(epsilon));
    CellParameters out = cell;
    out.electrode(electrode).epsilon = epsilon;
    return out;
}

CellParameters apply_lli(const CellParameters& cell, double x_lli)
{
    const auto& n = cell.negative;
    const double window = n.theta_0 - n.theta_f;
    if (!(x_lli >= 0.0) || x_lli >= window)
        throw Error(ErrorKind::DegenerateWindow, kModule,
                    "x_lli = " + num(x_lli) + " must lie in [0, " + num(window) + ")");
    if (x_lli == 0.0)
        return cell;
    CellParameters out = cell;
    out.negative.theta_0 = n.theta_0 - x_lli;
    out.negative.c_0 = cn0_from_theta0(out.negative.theta_0, n.c_s_max);
    return out;
}

CellParameters apply_lam(const CellParameters& cell, ElectrodeTag electrode, double loss_fraction)
{
    if (!(loss_fraction >= 0.0 && loss_fraction < 1.0))
        throw Error(ErrorKind::Domain, kModule,
                    "loss fraction must lie in [0,1), got " + num(loss_fraction));
    if (loss_fraction == 0.0)
        return cell;
    CellParameters out = cell;
    out.electrode(electrode).epsilon *= 1.0 - loss_fraction;
    return out;
}

CellParameters apply_mechanisms(const CellParameters& cell, const MechanismMagnitudes& m)
{
    CellParameters out = apply_lli(cell, m.x_lli);
    out = apply_lam(out, ElectrodeTag::negative, m.lam_ne);
    return apply_lam(out, ElectrodeTag::positive, m.lam_pe);
}

double aging_value(const CellParameters& cell, AgingParameter p)
{
    switch (p) {
    case AgingParameter::c_n0: return cell.negative.c_0;
    case AgingParameter::eps_n: return cell.negative.epsilon;
    case AgingParameter::eps_p: return cell.positive.epsilon;
    }
    return 0.0;
}

std::vector<ParameterDelta> degradation_deltas(const CellParameters& bol, const CellParameters& aged)
{
    std::vector<ParameterDelta> out;
    for (auto p : {AgingParameter::c_n0, AgingParameter::eps_n, AgingParameter::eps_p}) {
        ParameterDelta d;
        d.parameter_name = p;
        d.bol_value = aging_value(bol, p);
        d.aged_value = aging_value(aged, p);
        d.relative_change = (d.aged_value - d.bol_value) / d.bol_value;
        out.push_back(d);
    }
    return out;
}

} // namespace degradiag
