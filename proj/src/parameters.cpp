#include "degradiag/parameters.hpp"
#include "degradiag/constants.hpp"
#include "degradiag/error.hpp"

#include <cmath>
#include <string>

namespace degradiag {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& msg)
{
    throw Error(ErrorKind::Validation, "model-core", field + ": " + msg);
}

void require_positive(double v, const std::string& field)
{
    if (!std::isfinite(v) || v <= 0.0)
        invalid(field, "must be a positive finite number, got " + std::to_string(v));
}

} // namespace

double ElectrodeParameters::charge_per_stoichiometry() const noexcept
{
    return epsilon * volume() * c_s_max * constants::faraday / constants::seconds_per_hour;
}

void validate(const ElectrodeParameters& e, ElectrodeTag tag)
{
    const std::string p(to_string(tag));
    if (!(e.epsilon > 0.0 && e.epsilon < 1.0))
        invalid(p + ".epsilon", "must lie in (0,1), got " + std::to_string(e.epsilon));
    require_positive(e.thickness, p + ".thickness");
    require_positive(e.area, p + ".area");
    require_positive(e.particle_radius, p + ".particle_radius");
    require_positive(e.c_s_max, p + ".c_s_max");
    require_positive(e.d_s, p + ".d_s");
    require_positive(e.k_rxn, p + ".k_rxn");
    if (!(e.c_0 > 0.0 && e.c_0 <= e.c_s_max))
        invalid(p + ".c_0", "must lie in (0, c_s_max], got " + std::to_string(e.c_0));
    if (!(e.theta_f >= 0.0 && e.theta_f < e.theta_0 && e.theta_0 <= 1.0))
        invalid(p + ".theta_0", "requires 0 <= theta_f < theta_0 <= 1");
    if (tag == ElectrodeTag::negative) {
        const double expect = e.c_s_max * e.theta_0;
        if (std::abs(e.c_0 - expect) > 5e-8 * expect)
            invalid(p + ".c_0", "must equal c_s_max * theta_0 for the negative electrode");
    }
}

void validate(const CellParameters& cell)
{
    validate(cell.negative, ElectrodeTag::negative);
    validate(cell.positive, ElectrodeTag::positive);
    try {
        validate(cell.ocp_negative);
        validate(cell.ocp_positive);
    } catch (const Error& e) {
        throw Error(ErrorKind::Validation, "model-core", std::string("ocp: ") + e.what());
    }
    if (cell.ocp_negative.tag != ElectrodeTag::negative)
        invalid("ocp_negative", "table is tagged positive");
    if (cell.ocp_positive.tag != ElectrodeTag::positive)
        invalid("ocp_positive", "table is tagged negative");
    if (!std::isfinite(cell.r_ohmic) || cell.r_ohmic < 0.0)
        invalid("r_ohmic", "must be >= 0");
    require_positive(cell.c_electrolyte, "c_electrolyte");
    require_positive(cell.temperature, "temperature");
    require_positive(cell.nominal_capacity, "nominal_capacity");
    if (!(std::isfinite(cell.v_min) && std::isfinite(cell.v_max) && cell.v_min < cell.v_max))
        invalid("v_min", "must be below v_max");
}

} // namespace degradiag
