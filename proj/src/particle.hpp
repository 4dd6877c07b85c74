#pragma once

#include "degradiag/parameters.hpp"

#include <cstddef>
#include <vector>

namespace degradiag::detail {

/// Finite-volume spherical particle with uniform radial shells.
class Particle {
public:
    Particle(const ElectrodeParameters& e, std::size_t shells, double c_init);

    /// Explicit Euler step. flux is the molar flux leaving the particle surface,
    /// mol/(m^2 s).
    void step(double flux, double dt);

    /// Surface concentration extrapolated from the outer shell using the imposed flux.
    double surface(double flux) const;

    /// Volume-averaged concentration.
    double mean() const;

    double stability_limit() const { return _dr * _dr / (3.0 * _d); }

    const std::vector<double>& state() const { return _c; }
    void set_state(const std::vector<double>& c) { _c = c; }

private:
    double _d;
    double _dr;
    std::vector<double> _c;
    std::vector<double> _volume;   // shell volume / particle volume
    std::vector<double> _face;     // outer face area of each shell / particle volume
    std::vector<double> _scratch;
};

/// Butler-Volmer overpotential for a signed current density j (A/m^2, positive anodic).
double overpotential(double j, double c_surf, double c_max, double c_e, double k_rxn,
                     double temperature);

} // namespace degradiag::detail
