#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace degradiag;

TEST_SUITE("model-core")
{
    TEST_CASE("very slow discharge tracks the open-circuit voltage")
    {
        const auto& cell = support::reference_cell();
        const auto t = simulate_constant_current(cell, 0.001, 360.0);
        REQUIRE(t.samples.size() > 100);
        double worst = 0.0;
        for (std::size_t i = 0; i < t.samples.size(); i += 10) {
            const auto& s = t.samples[i];
            // skip the last percent, where the OCV slope makes 1 mV meaningless
            if (s.charge_ah > 0.99 * t.capacity())
                break;
            worst = std::max(worst, std::abs(s.voltage_v - equilibrium_voltage(cell, s.charge_ah)));
        }
        CHECK(worst < 1e-3);
    }

    TEST_CASE("C/20 capacity agrees with the window capacity")
    {
        const auto& cell = support::reference_cell();
        const double q = support::fresh_trace().capacity();
        CHECK(std::abs(q / cell_capacity(cell) - 1.0) < 0.01);
    }

    TEST_CASE("lithium leaving the negative equals lithium entering the positive")
    {
        const auto& cell = support::reference_cell();
        for (double rate : {0.05, 0.5}) {
            CAPTURE(rate);
            const auto r = simulate_detailed(cell, rate, 10.0);
            const double q_moles = r.charge_passed_ah * constants::seconds_per_hour / constants::faraday;
            CHECK(std::abs(r.moles_out_negative - r.moles_in_positive) <= 1e-3 * q_moles);
            CHECK(std::abs(r.moles_out_negative - q_moles) <= 1e-3 * q_moles);
            CHECK(std::abs(r.trace.capacity() - r.charge_passed_ah) <= 1e-3 * r.charge_passed_ah);
        }
    }

    TEST_CASE("discharge voltage decreases and sits below the OCV")
    {
        const auto& cell = support::reference_cell();
        const auto& t = support::fresh_trace();
        CHECK(t.direction == Direction::discharge);
        CHECK(t.samples.back().voltage_v == doctest::Approx(cell.v_min).epsilon(1e-6));
        for (std::size_t i = 1; i < t.samples.size(); ++i) {
            CHECK(t.samples[i].voltage_v <= t.samples[i - 1].voltage_v + 1e-12);
            CHECK(t.samples[i].charge_ah > t.samples[i - 1].charge_ah);
        }
        for (std::size_t i = 1; i + 1 < t.samples.size(); i += 25)
            CHECK(t.samples[i].voltage_v < equilibrium_voltage(cell, t.samples[i].charge_ah));
    }

    TEST_CASE("charge voltage increases and sits above the OCV")
    {
        const auto& cell = support::reference_cell();
        SimulationOptions opt;
        opt.direction = Direction::charge;
        const auto t = simulate_constant_current(cell, 0.05, 10.0, opt);
        CHECK(t.direction == Direction::charge);
        REQUIRE(t.samples.size() > 10);
        CHECK(t.samples.back().voltage_v == doctest::Approx(cell.v_max).epsilon(1e-6));
        for (std::size_t i = 1; i < t.samples.size(); ++i)
            CHECK(t.samples[i].voltage_v >= t.samples[i - 1].voltage_v - 1e-12);
        // Charge starts from the discharged end: charge throughput q corresponds to
        // (Q_window - q) removed from the charged state.
        const double q_window = electrode_capacity(cell.negative);
        for (std::size_t i = 1; i + 1 < t.samples.size(); i += 25) {
            const auto& s = t.samples[i];
            CHECK(s.voltage_v > equilibrium_voltage(cell, q_window - s.charge_ah));
        }
    }

    TEST_CASE("capacity converges with radial resolution")
    {
        const auto& cell = support::reference_cell();
        SimulationOptions fine;
        fine.shells = 40;
        const double q20 = support::fresh_trace().capacity();
        const double q40 = simulate_constant_current(cell, 0.05, 10.0, fine).capacity();
        CHECK(std::abs(q40 / q20 - 1.0) < 0.002);
        SimulationOptions half_dt;
        const double qdt = simulate_constant_current(cell, 0.05, 5.0, half_dt).capacity();
        CHECK(std::abs(qdt / q20 - 1.0) < 0.002);
    }

    TEST_CASE("unstable step without sub-stepping is a numerical error")
    {
        const auto& cell = support::reference_cell();
        const double limit = std::min(diffusion_stability_limit(cell.negative, 20),
                                      diffusion_stability_limit(cell.positive, 20));
        // Explicit scheme bound for uniform shells: dr^2 / (3 D)
        const double dr = cell.positive.particle_radius / 20.0;
        CHECK(diffusion_stability_limit(cell.positive, 20) ==
              doctest::Approx(dr * dr / (3.0 * cell.positive.d_s)));
        SimulationOptions opt;
        opt.allow_substepping = false;
        try {
            simulate_constant_current(cell, 0.05, 10.0 * limit, opt);
            FAIL("expected numerical error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Numerical);
            CHECK(e.is_numerical());
        }
        const auto r = simulate_detailed(cell, 0.05, 10.0);
        CHECK(r.substeps >= static_cast<std::size_t>(std::ceil(10.0 / limit)));
    }

    TEST_CASE("invalid inputs are rejected")
    {
        const auto& cell = support::reference_cell();
        CHECK_THROWS_AS(simulate_constant_current(cell, 0.0, 10.0), Error);
        CHECK_THROWS_AS(simulate_constant_current(cell, 0.05, -1.0), Error);
        SimulationOptions opt;
        opt.shells = 1;
        CHECK_THROWS_AS(simulate_constant_current(cell, 0.05, 10.0, opt), Error);
    }

    TEST_CASE("half-cell sweeps recover the electrode window capacity")
    {
        const auto& cell = support::reference_cell();
        for (auto tag : {ElectrodeTag::negative, ElectrodeTag::positive}) {
            CAPTURE(to_string(tag));
            const auto& e = cell.electrode(tag);
            const auto& ocp = tag == ElectrodeTag::negative ? cell.ocp_negative : cell.ocp_positive;
            const double q_ref = electrode_capacity(e);
            const auto r = half_cell_sweep(e, ocp, q_ref / 50.0, 10.0, cell.temperature, cell.c_electrolyte);
            CHECK(std::abs(r.capacity_ah / q_ref - 1.0) < 0.01);
        }
    }
}
