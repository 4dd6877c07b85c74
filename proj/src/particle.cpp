#include "particle.hpp"
#include "degradiag/constants.hpp"

#include <cmath>

namespace degradiag::detail {

Particle::Particle(const ElectrodeParameters& e, std::size_t shells, double c_init)
    : _d(e.d_s), _dr(e.particle_radius / static_cast<double>(shells)), _c(shells, c_init),
      _volume(shells), _face(shells), _scratch(shells)
{
    const double r3 = std::pow(e.particle_radius, 3);
    for (std::size_t i = 0; i < shells; ++i) {
        const double ri = _dr * static_cast<double>(i);
        const double ro = _dr * static_cast<double>(i + 1);
        _volume[i] = (ro * ro * ro - ri * ri * ri) / r3;
        _face[i] = 3.0 * ro * ro / r3;
    }
}

void Particle::step(double flux, double dt)
{
    const std::size_t n = _c.size();
    for (std::size_t i = 0; i < n; ++i)
        _scratch[i] = 0.0;
    // diffusive transfer across interior faces, positive outward
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double q = -_d * (_c[i + 1] - _c[i]) / _dr * _face[i];
        _scratch[i] -= q;
        _scratch[i + 1] += q;
    }
    _scratch[n - 1] -= flux * _face[n - 1];
    for (std::size_t i = 0; i < n; ++i)
        _c[i] += dt * _scratch[i] / _volume[i];
}

double Particle::surface(double flux) const
{
    return _c.back() - flux * 0.5 * _dr / _d;
}

double Particle::mean() const
{
    double acc = 0.0;
    for (std::size_t i = 0; i < _c.size(); ++i)
        acc += _c[i] * _volume[i];
    return acc;
}

double overpotential(double j, double c_surf, double c_max, double c_e, double k_rxn,
                     double temperature)
{
    const double i0 = k_rxn * constants::faraday * std::sqrt(c_e) *
                      std::sqrt(c_surf * (c_max - c_surf));
    const double thermal = 2.0 * constants::gas_constant * temperature / constants::faraday;
    return thermal * std::asinh(j / (2.0 * i0));
}

} // namespace degradiag::detail
