#pragma once

#include "degradiag/parameters.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace degradiag {

struct MechanismMagnitudes {
    double x_lli = 0.0;  // stoichiometry removed from the negative window
    double lam_ne = 0.0; // fractional loss of epsilon_n
    double lam_pe = 0.0; // fractional loss of epsilon_p
};

enum class AgingParameter { c_n0, eps_n, eps_p };

std::string_view to_string(AgingParameter p) noexcept;
AgingParameter aging_parameter_from_string(std::string_view name);

struct ParameterDelta {
    AgingParameter parameter_name = AgingParameter::c_n0;
    double bol_value = 0.0;
    double aged_value = 0.0;
    double relative_change = 0.0;

    friend bool operator==(const ParameterDelta&, const ParameterDelta&) = default;
};

/// Theoretical capacity of the electrode's lithiation window, Ah.
double electrode_capacity(const ElectrodeParameters& electrode);

/// Capacity after removing x_lli from the window and scaling epsilon by (1 - lam),
/// where lam is lam_ne or lam_pe depending on the electrode.
double aged_capacity(const ElectrodeParameters& electrode, ElectrodeTag tag,
                     const MechanismMagnitudes& mags);

/// Smaller of the two electrode capacities.
double cell_capacity(const CellParameters& cell);

double cn0_from_theta0(double theta_0_n, double c_s_max_n);
double theta0_from_cn0(double c_n0, double c_s_max_n);

/// Negative electrode with initial concentration replaced; theta_0 follows.
CellParameters with_cn0(const CellParameters& cell, double c_n0);

CellParameters with_epsilon(const CellParameters& cell, ElectrodeTag electrode, double epsilon);

CellParameters apply_lli(const CellParameters& cell, double x_lli);
CellParameters apply_lam(const CellParameters& cell, ElectrodeTag electrode, double loss_fraction);
CellParameters apply_mechanisms(const CellParameters& cell, const MechanismMagnitudes& mags);

/// Value of an aging parameter in a cell.
double aging_value(const CellParameters& cell, AgingParameter p);

std::vector<ParameterDelta> degradation_deltas(const CellParameters& bol, const CellParameters& aged);

} // namespace degradiag
