#pragma once

#include "degradiag/ocp.hpp"

namespace degradiag {

/// One porous electrode, represented by a single spherical particle.
///
/// The lithiation window is [theta_f, theta_0] for both electrodes: theta_0 is
/// the lithiated end and theta_f the delithiated end. A fully charged cell
/// therefore starts with the negative particle at theta_0 and the positive
/// particle at theta_f, and c_0 is the corresponding initial concentration.
struct ElectrodeParameters {
    double epsilon = 0.0;         // active-material volume fraction
    double thickness = 0.0;       // m
    double area = 0.0;            // m^2
    double particle_radius = 0.0; // m
    double c_s_max = 0.0;         // mol/m^3
    double c_0 = 0.0;             // mol/m^3
    double d_s = 0.0;             // m^2/s
    double k_rxn = 0.0;           // m^2.5 mol^-0.5 s^-1
    double theta_0 = 0.0;
    double theta_f = 0.0;

    double volume() const noexcept { return area * thickness; }
    /// Interfacial area per unit electrode volume, 1/m.
    double specific_area() const noexcept { return 3.0 * epsilon / particle_radius; }
    /// Total particle surface area in the electrode, m^2.
    double surface_area() const noexcept { return specific_area() * volume(); }
    /// Charge stored per unit change of stoichiometry, Ah.
    double charge_per_stoichiometry() const noexcept;

    friend bool operator==(const ElectrodeParameters&, const ElectrodeParameters&) = default;
};

/// Full cell. Discharge current is positive throughout the library.
struct CellParameters {
    ElectrodeParameters negative;
    ElectrodeParameters positive;
    OcpTable ocp_negative;
    OcpTable ocp_positive;
    double r_ohmic = 0.0;          // Ohm
    double c_electrolyte = 1000.0; // mol/m^3
    double temperature = 298.15;   // K
    double v_min = 3.0;            // V
    double v_max = 4.2;            // V
    double nominal_capacity = 1.0; // Ah

    const ElectrodeParameters& electrode(ElectrodeTag tag) const noexcept
    {
        return tag == ElectrodeTag::negative ? negative : positive;
    }
    ElectrodeParameters& electrode(ElectrodeTag tag) noexcept
    {
        return tag == ElectrodeTag::negative ? negative : positive;
    }

    friend bool operator==(const CellParameters&, const CellParameters&) = default;
};

/// Throws Error{Validation} with a field path ("negative.epsilon") on the first violation.
void validate(const ElectrodeParameters& electrode, ElectrodeTag tag);
void validate(const CellParameters& cell);

} // namespace degradiag
