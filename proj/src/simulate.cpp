#include "degradiag/simulate.hpp"
#include "degradiag/constants.hpp"
#include "degradiag/error.hpp"
#include "particle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace degradiag {

using detail::Particle;

namespace {

constexpr const char* kModule = "model-core";

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::size_t substeps_for(double dt, double limit, const SimulationOptions& opt)
{
    if (dt <= limit)
        return 1;
    if (!opt.allow_substepping)
        throw Error(ErrorKind::Numerical, kModule,
                    "dt = " + fmt(dt) + " s violates the explicit diffusion stability bound of " +
                        fmt(limit) + " s and sub-stepping is disabled");
    const double n = std::ceil(dt / limit);
    if (n > static_cast<double>(opt.max_substeps))
        throw Error(ErrorKind::Numerical, kModule,
                    "dt = " + fmt(dt) + " s needs " + fmt(n) + " sub-steps (limit " +
                        std::to_string(opt.max_substeps) + ")");
    return static_cast<std::size_t>(n);
}

double checked_surface(const Particle& p, double flux, double c_max, ElectrodeTag tag, double t)
{
    const double cs = p.surface(flux);
    if (!(cs > 0.0 && cs < c_max))
        throw Error(ErrorKind::Saturation, kModule,
                    std::string(to_string(tag)) + " electrode surface concentration " + fmt(cs) +
                        " mol/m^3 left (0, " + fmt(c_max) + ") at t = " + fmt(t) + " s");
    return cs;
}

struct Cell {
    const CellParameters& p;
    Particle neg;
    Particle pos;
    double flux_n;  // mol/(m^2 s) leaving the negative particles
    double flux_p;  // leaving the positive particles
    double j_n;     // A/m^2, positive anodic
    double j_p;
    double current; // signed, discharge positive

    double voltage(double t) const
    {
        const auto& n = p.negative;
        const auto& q = p.positive;
        const double cs_n = checked_surface(neg, flux_n, n.c_s_max, ElectrodeTag::negative, t);
        const double cs_p = checked_surface(pos, flux_p, q.c_s_max, ElectrodeTag::positive, t);
        const double u_n = ocp_eval(p.ocp_negative, cs_n / n.c_s_max);
        const double u_p = ocp_eval(p.ocp_positive, cs_p / q.c_s_max);
        const double eta_n = detail::overpotential(j_n, cs_n, n.c_s_max, p.c_electrolyte, n.k_rxn,
                                                   p.temperature);
        const double eta_p = detail::overpotential(j_p, cs_p, q.c_s_max, p.c_electrolyte, q.k_rxn,
                                                   p.temperature);
        return u_p - u_n + eta_p - eta_n - current * p.r_ohmic;
    }

    void advance(double dt, std::size_t substeps)
    {
        const double h = dt / static_cast<double>(substeps);
        for (std::size_t k = 0; k < substeps; ++k) {
            neg.step(flux_n, h);
            pos.step(flux_p, h);
        }
    }
};

double lithium_window_moles(const ElectrodeParameters& n)
{
    return (n.theta_0 - n.theta_f) * n.c_s_max * n.epsilon * n.volume();
}

} // namespace

double diffusion_stability_limit(const ElectrodeParameters& electrode, std::size_t shells)
{
    const double dr = electrode.particle_radius / static_cast<double>(shells);
    return dr * dr / (3.0 * electrode.d_s);
}

SimulationResult simulate_detailed(const CellParameters& cell, double c_rate, double dt,
                                   const SimulationOptions& opt)
{
    if (!(c_rate > 0.0) || !std::isfinite(c_rate))
        throw Error(ErrorKind::Domain, kModule, "c_rate must be positive, got " + fmt(c_rate));
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw Error(ErrorKind::Domain, kModule, "dt must be positive, got " + fmt(dt));
    if (opt.shells < 2)
        throw Error(ErrorKind::Domain, kModule, "at least 2 radial shells are required");
    validate(cell);

    const auto& n = cell.negative;
    const auto& p = cell.positive;
    const bool discharge = opt.direction == Direction::discharge;
    const double sign = discharge ? 1.0 : -1.0;
    const double current = c_rate * cell.nominal_capacity;

    double c_init_n = n.c_0;
    double c_init_p = p.c_0;
    if (!discharge) {
        const double moved = lithium_window_moles(n);
        c_init_n = n.c_s_max * n.theta_f;
        c_init_p = p.c_0 + moved / (p.epsilon * p.volume());
    }

    const double limit = std::min(diffusion_stability_limit(n, opt.shells),
                                  diffusion_stability_limit(p, opt.shells));
    const std::size_t substeps = substeps_for(dt, limit, opt);

    const double s_n = n.surface_area();
    const double s_p = p.surface_area();
    Cell c{cell,
           Particle(n, opt.shells, c_init_n),
           Particle(p, opt.shells, c_init_p),
           sign * current / (constants::faraday * s_n),
           -sign * current / (constants::faraday * s_p),
           sign * current / s_n,
           -sign * current / s_p,
           sign * current};

    SimulationResult out;
    out.substeps = substeps;
    out.trace.direction = opt.direction;
    out.trace.provenance = Provenance::simulated;

    const double v_limit = discharge ? cell.v_min : cell.v_max;
    auto beyond = [&](double v) { return discharge ? v <= v_limit : v >= v_limit; };

    double v = c.voltage(0.0);
    if (beyond(v))
        throw Error(ErrorKind::Domain, kModule,
                    "initial voltage " + fmt(v) + " V is already beyond the " +
                        (discharge ? "lower" : "upper") + " limit");
    out.trace.samples.push_back({0.0, current, 0.0, v});

    const double t_max = opt.max_duration_factor * constants::seconds_per_hour / c_rate;
    const double amp_hours_per_s = current / constants::seconds_per_hour;
    std::vector<double> save_n, save_p;
    // Voltage after advancing a fraction of the current step from the saved state,
    // or NaN when a surface concentration saturates.
    auto probe = [&](double frac, double t0) {
        c.neg.set_state(save_n);
        c.pos.set_state(save_p);
        c.advance(frac * dt, substeps);
        try {
            return c.voltage(t0 + frac * dt);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Saturation)
                throw;
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    for (std::size_t k = 1;; ++k) {
        const double t_prev = static_cast<double>(k - 1) * dt;
        const double t = static_cast<double>(k) * dt;
        if (t_prev > t_max)
            throw Error(ErrorKind::Numerical, kModule,
                        "voltage limit not reached within " + fmt(t_max) + " s");
        save_n = c.neg.state();
        save_p = c.pos.state();
        const double v_new = probe(1.0, t_prev);

        if (std::isfinite(v_new) && !beyond(v_new)) {
            out.trace.samples.push_back({t, current, amp_hours_per_s * t, v_new});
            v = v_new;
            continue;
        }

        double alpha;
        if (std::isfinite(v_new)) {
            alpha = std::clamp((v - v_limit) / (v - v_new), 0.0, 1.0);
        } else {
            // Saturation inside the step: the crossing must be bracketed before it,
            // otherwise this is a genuine saturation failure.
            double lo = 0.0, hi = 1.0;
            bool crossed = false;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double vm = probe(mid, t_prev);
                if (std::isfinite(vm) && !beyond(vm)) {
                    lo = mid;
                } else {
                    crossed = crossed || std::isfinite(vm);
                    hi = mid;
                }
            }
            if (!crossed) {
                probe(1.0, t_prev);
                c.voltage(t); // rethrows the saturation error with context
            }
            alpha = lo;
        }
        const double v_end = probe(alpha, t_prev);
        const double t_end = t_prev + alpha * dt;
        if (t_end > t_prev)
            out.trace.samples.push_back(
                {t_end, current, amp_hours_per_s * t_end, std::isfinite(v_end) ? v_end : v_limit});
        break;
    }

    const double t_final = out.trace.samples.back().time_s;
    out.charge_passed_ah = amp_hours_per_s * t_final;
    out.moles_out_negative = (c_init_n - c.neg.mean()) * n.epsilon * n.volume();
    out.moles_in_positive = (c.pos.mean() - c_init_p) * p.epsilon * p.volume();
    if (!discharge) {
        out.moles_out_negative = -out.moles_out_negative;
        out.moles_in_positive = -out.moles_in_positive;
    }
    return out;
}

VoltageTrace simulate_constant_current(const CellParameters& cell, double c_rate, double dt,
                                       const SimulationOptions& options)
{
    return simulate_detailed(cell, c_rate, dt, options).trace;
}

double equilibrium_voltage(const CellParameters& cell, double charge_ah)
{
    const auto& n = cell.negative;
    const auto& p = cell.positive;
    const double moles = charge_ah * constants::seconds_per_hour / constants::faraday;
    const double theta_n = (n.c_0 - moles / (n.epsilon * n.volume())) / n.c_s_max;
    const double theta_p = (p.c_0 + moles / (p.epsilon * p.volume())) / p.c_s_max;
    return ocp_eval(cell.ocp_positive, theta_p) - ocp_eval(cell.ocp_negative, theta_n);
}

HalfCellResult half_cell_sweep(const ElectrodeParameters& e, const OcpTable& ocp,
                               double current_a, double dt, double temperature,
                               double c_electrolyte, std::size_t shells)
{
    if (!(current_a > 0.0) || !(dt > 0.0))
        throw Error(ErrorKind::Domain, kModule, "half-cell sweep needs positive current and dt");
    validate(e, ocp.tag);
    const bool negative = ocp.tag == ElectrodeTag::negative;
    // negative: delithiate from theta_0 (anodic); positive: lithiate from theta_f (cathodic)
    const double c_start = e.c_s_max * (negative ? e.theta_0 : e.theta_f);
    const double cutoff = ocp_eval(ocp, negative ? e.theta_f : e.theta_0);
    const double s = e.surface_area();
    const double flux = (negative ? 1.0 : -1.0) * current_a / (constants::faraday * s);
    const double j = (negative ? 1.0 : -1.0) * current_a / s;
    auto past = [&](double u) { return negative ? u >= cutoff : u <= cutoff; };

    Particle particle(e, shells, c_start);
    SimulationOptions opt;
    const std::size_t substeps = substeps_for(dt, particle.stability_limit(), opt);
    auto potential = [&](double t) {
        const double cs = checked_surface(particle, flux, e.c_s_max, ocp.tag, t);
        return ocp_eval(ocp, cs / e.c_s_max) +
               detail::overpotential(j, cs, e.c_s_max, c_electrolyte, e.k_rxn, temperature);
    };
    auto advance = [&](double h) {
        for (std::size_t k = 0; k < substeps; ++k)
            particle.step(flux, h / static_cast<double>(substeps));
    };

    HalfCellResult out;
    out.trace.provenance = Provenance::simulated;
    out.trace.direction = Direction::discharge;
    double u = potential(0.0);
    out.trace.samples.push_back({0.0, current_a, 0.0, u});
    const double ah_per_s = current_a / constants::seconds_per_hour;
    const double t_max = 3.0 * (e.theta_0 - e.theta_f) * e.charge_per_stoichiometry() / ah_per_s;
    for (std::size_t k = 1;; ++k) {
        const double t_prev = static_cast<double>(k - 1) * dt;
        if (t_prev > t_max)
            throw Error(ErrorKind::Numerical, kModule, "half-cell cutoff not reached");
        const auto saved = particle.state();
        advance(dt);
        double u_new;
        bool saturated = false;
        try {
            u_new = potential(t_prev + dt);
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::Saturation)
                throw;
            saturated = true;
            u_new = negative ? 1e9 : -1e9;
        }
        if (!past(u_new)) {
            out.trace.samples.push_back({t_prev + dt, current_a, ah_per_s * (t_prev + dt), u_new});
            u = u_new;
            continue;
        }
        double alpha = saturated ? 0.5 : (cutoff - u) / (u_new - u);
        if (saturated) {
            // bisect the crossing when the step overshot into saturation
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                particle.set_state(saved);
                advance(mid * dt);
                bool ok = true;
                double um = 0.0;
                try {
                    um = potential(t_prev + mid * dt);
                } catch (const Error&) {
                    ok = false;
                }
                if (ok && !past(um))
                    lo = mid;
                else
                    hi = mid;
            }
            alpha = lo;
        }
        alpha = std::clamp(alpha, 0.0, 1.0);
        const double t_end = t_prev + alpha * dt;
        out.trace.samples.push_back({t_end, current_a, ah_per_s * t_end, cutoff});
        out.capacity_ah = ah_per_s * t_end;
        break;
    }
    return out;
}

} // namespace degradiag
