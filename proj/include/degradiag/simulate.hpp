#pragma once

#include "degradiag/parameters.hpp"
#include "degradiag/trace.hpp"

#include <cstddef>

namespace degradiag {

struct SimulationOptions {
    std::size_t shells = 20;
    Direction direction = Direction::discharge;
    /// Split dt into stable explicit sub-steps when it exceeds the diffusion bound.
    bool allow_substepping = true;
    std::size_t max_substeps = 100000;
    /// Abort if the voltage limit has not been reached after this multiple of the
    /// nominal duration 1/c_rate hours.
    double max_duration_factor = 3.0;
};

/// Simulation output plus the lithium bookkeeping used by the conservation checks.
struct SimulationResult {
    VoltageTrace trace;
    double charge_passed_ah = 0.0;   // integral of I dt
    double moles_out_negative = 0.0; // lithium that left the negative particles
    double moles_in_positive = 0.0;  // lithium that entered the positive particles
    std::size_t substeps = 1;        // explicit sub-steps per output step
};

/// Constant-current single-particle simulation between the cell voltage limits.
/// Applied current is c_rate * nominal_capacity; discharge is positive. Discharge
/// starts from the charged state (c_0 in both electrodes). Charge starts from the
/// state reached after removing the negative electrode's full window.
SimulationResult simulate_detailed(const CellParameters& cell, double c_rate, double dt,
                                   const SimulationOptions& options = {});

VoltageTrace simulate_constant_current(const CellParameters& cell, double c_rate, double dt,
                                       const SimulationOptions& options = {});

/// Open-circuit voltage after removing charge_ah from the charged state, using bulk
/// stoichiometries (no diffusion, no kinetics).
double equilibrium_voltage(const CellParameters& cell, double charge_ah);

/// Largest explicit step the radial discretisation tolerates, s.
double diffusion_stability_limit(const ElectrodeParameters& electrode, std::size_t shells);

struct HalfCellResult {
    double capacity_ah = 0.0;
    VoltageTrace trace; // electrode potential vs Li/Li+
};

/// Sweeps one electrode against a lithium reference from its charged-state end of
/// the window (theta_0 for the negative, theta_f for the positive) toward the other
/// end, at constant current, until the electrode potential reaches the OCP of the
/// far end of the window. Capacity is coulomb counted.
HalfCellResult half_cell_sweep(const ElectrodeParameters& electrode, const OcpTable& ocp,
                               double current_a, double dt, double temperature,
                               double c_electrolyte, std::size_t shells = 20);

} // namespace degradiag
