#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace degradiag;

namespace {

const VoltageTrace& trace_of(double c_n0, double eps_n, double eps_p)
{
    static std::map<std::tuple<double, double, double>, VoltageTrace> cache;
    const auto key = std::make_tuple(c_n0, eps_n, eps_p);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, simulate_constant_current(support::aged_cell(c_n0, eps_n, eps_p), 0.05, 10.0)).first;
    return it->second;
}

const VoltageTrace& trace_100k() { return trace_of(2.65e4, 0.561, 0.520); }

double step(const std::vector<double>& grid) { return grid[1] - grid[0]; }

// Independent argmin: smallest loss, ties to the candidate nearest the reference, then lowest index.
std::size_t oracle_argmin(const std::vector<double>& cand, const std::vector<double>& loss, double reference)
{
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (std::isnan(loss[i]))
            continue;
        if (best == std::numeric_limits<std::size_t>::max() || loss[i] < loss[best] ||
            (loss[i] == loss[best] && std::abs(cand[i] - reference) < std::abs(cand[best] - reference)))
            best = i;
    }
    return best;
}

double valley_of(const VoltageTrace& t)
{
    const auto f = extract_features(t).features;
    return f.high_voltage_valley ? f.high_voltage_valley->position_v : std::nan("");
}

} // namespace

TEST_SUITE("diagnose")
{
    TEST_CASE("classification rules")
    {
        const DiagnosisThresholds t;
        SUBCASE("no change")
        {
            const auto f = classify_mechanisms(FeatureDelta{}, t);
            CHECK_FALSE(f.lli);
            CHECK_FALSE(f.lam_ne);
            CHECK_FALSE(f.lam_pe);
            CHECK(f.evidence.empty());
        }
        SUBCASE("lli needs both the valley shift and the peak growth")
        {
            CHECK(classify_mechanisms({0.0, 1.05, 0.006, 1.0}, t).lli);
            CHECK_FALSE(classify_mechanisms({0.0, 1.01, 0.006, 1.0}, t).lli);
            CHECK_FALSE(classify_mechanisms({0.0, 1.05, 0.004, 1.0}, t).lli);
        }
        SUBCASE("valley shrinkage means negative active-material loss")
        {
            const auto f = classify_mechanisms({0.0, 1.0, 0.0, 0.95}, t);
            CHECK(f.lam_ne);
            CHECK(f.evidence.count("lam_ne") == 1);
            CHECK_FALSE(classify_mechanisms({0.0, 1.0, 0.0, 0.99}, t).lam_ne);
        }
        SUBCASE("thresholds must be positive")
        {
            DiagnosisThresholds bad;
            bad.valley_shift_significant = 0.0;
            CHECK_THROWS_AS(classify_mechanisms(FeatureDelta{}, bad), Error);
        }
    }

    TEST_CASE("classification of simulated cells")
    {
        const auto& bol = support::reference_cell();
        SUBCASE("lithium loss only")
        {
            const auto d = diagnose(bol, trace_of(2.71e4, 0.582, 0.540));
            CHECK(d.flags.lli);
            CHECK_FALSE(d.flags.lam_ne);
            CHECK(d.flags.evidence.count("lli") == 1);
        }
        SUBCASE("joint 100k cell")
        {
            const auto d = diagnose(bol, trace_100k());
            CHECK(d.flags.lli);
            CHECK(d.flags.lam_ne);
        }
        SUBCASE("fresh cell")
        {
            const auto d = diagnose(bol, support::fresh_trace());
            CHECK_FALSE(d.flags.lli);
            CHECK_FALSE(d.flags.lam_ne);
            CHECK(d.delta.valley_shift == 0.0);
        }
    }

    TEST_CASE("select_index tie rule and argmin invariance under scaling")
    {
        std::vector<CandidateLoss> l{{1.0, 0.3}, {2.0, 0.1}, {3.0, 0.1}, {4.0, 0.5}};
        CHECK(select_index(l, 3.2) == 2);
        CHECK(select_index(l, 1.0) == 1);
        CHECK(select_index(l, 2.5) == 1); // equidistant: earlier index
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<CandidateLoss> losses;
            for (int i = 0; i < 15; ++i)
                losses.push_back({static_cast<double>(i), std::round(u(rng) * 20.0) / 20.0});
            const auto k = select_index(losses, 7.0);
            for (double scale : {0.5, 3.0, 1e3}) {
                auto scaled = losses;
                for (auto& c : scaled)
                    c.loss *= scale;
                CHECK(select_index(scaled, 7.0) == k);
            }
        }
        CHECK_THROWS_AS(select_index({}, 0.0), Error);
    }

    TEST_CASE("default grids")
    {
        const auto g = EstimationGrids::defaults_for(support::reference_cell());
        REQUIRE(g.c_n0.size() == 61);
        CHECK(g.c_n0.back() == 2.75e4);
        CHECK(g.c_n0.front() == doctest::Approx(0.85 * 2.75e4));
        CHECK(g.eps_n.back() == 0.582);
        CHECK(g.eps_p.back() == 0.540);
        CHECK(step(g.eps_n) == doctest::Approx(0.15 * 0.582 / 60));
    }

    TEST_CASE("each stage matches itself on the fresh trace")
    {
        const auto& bol = support::reference_cell();
        const auto g = EstimationGrids::defaults_for(bol);
        const auto& fresh = support::fresh_trace();
        CHECK(estimate_cn0(bol, fresh, g.c_n0).value == 2.75e4);
        CHECK(estimate_eps_n(bol, fresh, g.eps_n).value == 0.582);
        CHECK(estimate_eps_p(bol, fresh, g.eps_p).value == 0.540);
    }

    TEST_CASE("each stage recovers its 100k target")
    {
        const auto& bol = support::reference_cell();
        SUBCASE("c_n0 from a lithium-loss trace")
        {
            const auto grid = linear_grid(2.5e4, 2.75e4, 11); // 250 mol/m^3 step
            const auto r = estimate_cn0(bol, trace_of(2.65e4, 0.582, 0.540), grid);
            CHECK(std::abs(r.value - 2.65e4) <= step(grid) + 1e-9);
        }
        SUBCASE("eps_n with c_n0 already fixed")
        {
            const auto g = EstimationGrids::defaults_for(bol);
            const auto r = estimate_eps_n(with_cn0(bol, 2.65e4), trace_of(2.65e4, 0.561, 0.540), g.eps_n);
            CHECK(std::abs(r.value - 0.561) <= step(g.eps_n) + 1e-12);
            CHECK_FALSE(r.capacity_fallback);
        }
        SUBCASE("eps_p with c_n0 and eps_n fixed")
        {
            const auto g = EstimationGrids::defaults_for(bol);
            const auto r = estimate_eps_p(support::aged_cell(2.65e4, 0.561, 0.540), trace_100k(), g.eps_p);
            CHECK(std::abs(r.value - 0.520) <= step(g.eps_p) + 1e-12);
        }
    }

    TEST_CASE("stage searches equal a brute-force evaluation of every candidate")
    {
        const auto& bol = support::reference_cell();
        const auto& measured = trace_100k();
        const double q_meas = measured.capacity();

        SUBCASE("c_n0")
        {
            const auto grid = linear_grid(2.55e4, 2.75e4, 9);
            const double target = valley_of(measured);
            std::vector<double> loss;
            for (double c : grid)
                loss.push_back(std::abs(valley_of(simulate_constant_current(with_cn0(bol, c), 0.05, 10.0)) - target));
            const auto r = estimate_cn0(bol, measured, grid);
            CHECK(r.value == grid[oracle_argmin(grid, loss, bol.negative.c_0)]);
            REQUIRE(r.trace.evaluated.size() == grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i)
                CHECK(r.trace.evaluated[i].loss == loss[i]);
        }
        SUBCASE("eps_n")
        {
            const auto base = with_cn0(bol, 2.65e4);
            const auto grid = linear_grid(0.54, 0.582, 9);
            std::vector<double> rms, mismatch;
            for (double e : grid) {
                const auto t = simulate_constant_current(with_epsilon(base, ElectrodeTag::negative, e), 0.05, 10.0);
                rms.push_back(rms_voltage_difference(t, measured, 1000, RmsAxis::reference_capacity));
                mismatch.push_back(std::abs(t.capacity() - q_meas) / q_meas);
            }
            std::vector<double> feasible_loss(grid.size(), std::nan(""));
            for (std::size_t i = 0; i < grid.size(); ++i)
                if (mismatch[i] <= 0.005)
                    feasible_loss[i] = rms[i];
            const auto r = estimate_eps_n(base, measured, grid);
            REQUIRE(oracle_argmin(grid, feasible_loss, 0.582) < grid.size());
            CHECK(r.value == grid[oracle_argmin(grid, feasible_loss, 0.582)]);
        }
        SUBCASE("eps_p")
        {
            const auto base = support::aged_cell(2.65e4, 0.561, 0.540);
            const auto grid = linear_grid(0.50, 0.54, 9);
            std::vector<double> loss;
            for (double e : grid)
                loss.push_back(rms_voltage_difference(
                    simulate_constant_current(with_epsilon(base, ElectrodeTag::positive, e), 0.05, 10.0), measured,
                    1000, RmsAxis::own_capacity));
            const auto r = estimate_eps_p(base, measured, grid);
            CHECK(r.value == grid[oracle_argmin(grid, loss, 0.540)]);
        }
    }

    TEST_CASE("stage-1 loss has no competing local minimum")
    {
        const auto& bol = support::reference_cell();
        const auto g = EstimationGrids::defaults_for(bol);
        for (const auto* measured : {&trace_of(2.65e4, 0.582, 0.540), &trace_of(2.515e4, 0.582, 0.540)}) {
            const auto r = estimate_cn0(bol, *measured, g.c_n0);
            const auto& e = r.trace.evaluated;
            REQUIRE(e.size() == g.c_n0.size());
            const std::size_t k = select_index(e, bol.negative.c_0);
            for (std::size_t i = 1; i + 1 < e.size(); ++i) {
                if (i == k)
                    continue;
                if (e[i].loss < e[i - 1].loss && e[i].loss < e[i + 1].loss) {
                    CAPTURE(e[i].candidate);
                    CHECK(e[i].loss >= 1.5 * e[k].loss);
                }
            }
        }
    }

    TEST_CASE("shrinking eps_p moves the simulated valley down")
    {
        const auto& bol = support::reference_cell();
        double previous = std::numeric_limits<double>::infinity();
        for (double e : linear_grid(0.54, 0.46, 5)) {
            CAPTURE(e);
            const double v = valley_of(simulate_constant_current(with_epsilon(bol, ElectrodeTag::positive, e), 0.05, 10.0));
            CHECK(v < previous);
            previous = v;
        }
    }

    TEST_CASE("null diagnosis of the fresh cell")
    {
        const auto& bol = support::reference_cell();
        const auto rep = calibrate(bol, support::fresh_trace(), EstimationGrids::defaults_for(bol));
        CHECK(rep.complete);
        CHECK_FALSE(rep.flags.lli);
        CHECK_FALSE(rep.flags.lam_ne);
        CHECK_FALSE(rep.flags.lam_pe);
        CHECK(rep.estimated == EstimatedParameters{2.75e4, 0.582, 0.540});
        CHECK(rep.fit_rms < 5e-4);
        CHECK_FALSE(rep.search_trace.c_n0);
    }

    TEST_CASE("report completeness on the 100k cell")
    {
        const auto& bol = support::reference_cell();
        const auto g = EstimationGrids::defaults_for(bol);
        const auto rep = calibrate(bol, trace_100k(), g);
        CHECK(rep.complete);
        for (auto [flag, name] : {std::pair{rep.flags.lli, "lli"}, {rep.flags.lam_ne, "lam_ne"}, {rep.flags.lam_pe, "lam_pe"}})
            if (flag)
                CHECK(rep.flags.evidence.count(name) == 1);
        const std::pair<const std::optional<StageTrace>*, std::size_t> stages[] = {
            {&rep.search_trace.c_n0, g.c_n0.size()},
            {&rep.search_trace.eps_n, g.eps_n.size()},
            {&rep.search_trace.eps_p, g.eps_p.size()}};
        for (const auto& [st, n] : stages) {
            REQUIRE(st->has_value());
            CHECK((*st)->evaluated.size() == n - (*st)->skipped.size());
        }
        CHECK(rep.deltas.size() == 3);
        CHECK(rep.estimated.eps_n > 0.0);
        CHECK(rep.estimated.eps_n < 1.0);
        CHECK(rep.estimated.c_n0 <= bol.negative.c_s_max);
        CHECK(std::abs(rep.capacity_simulated - rep.capacity_measured) <= 0.005 * rep.capacity_measured);
        CHECK(calibrated_cell(bol, rep).negative.c_0 == rep.estimated.c_n0);
    }

    TEST_CASE("round trip on sampled triples with refinement")
    {
        // Triples where every mechanism is large enough to be classified.
        const auto& bol = support::reference_cell();
        const auto g = EstimationGrids::defaults_for(bol);
        CalibrationOptions opt;
        opt.refinement_passes = 3;
        const double triples[][3] = {{0.03, 0.04, 0.03}, {0.05, 0.06, 0.05}, {0.02, 0.08, 0.06}};
        for (const auto& m : triples) {
            const auto aged = apply_mechanisms(bol, {m[0], m[1], m[2]});
            CAPTURE(m[0]);
            CAPTURE(m[1]);
            CAPTURE(m[2]);
            const auto rep = calibrate(bol, simulate_constant_current(aged, 0.05, 10.0), g, opt);
            CHECK(rep.flags.lli);
            CHECK(rep.flags.lam_ne);
            CHECK(rep.flags.lam_pe);
            CHECK(std::abs(rep.estimated.c_n0 - aged.negative.c_0) <= step(g.c_n0) * 1.0001);
            CHECK(std::abs(rep.estimated.eps_n - aged.negative.epsilon) <= step(g.eps_n) * 1.0001);
            CHECK(std::abs(rep.estimated.eps_p - aged.positive.epsilon) <= step(g.eps_p) * 1.0001);
        }
    }

    TEST_CASE("parallel candidate evaluation is deterministic")
    {
        const auto& bol = support::reference_cell();
        const auto grid = linear_grid(0.50, 0.54, 7);
        EvaluationSettings one, many;
        many.jobs = 3;
        const auto base = support::aged_cell(2.65e4, 0.561, 0.540);
        const auto a = estimate_eps_p(base, trace_100k(), grid, one);
        const auto b = estimate_eps_p(base, trace_100k(), grid, many);
        CHECK(a.value == b.value);
        CHECK(a.trace == b.trace);
        (void)bol;
    }

    TEST_CASE("failed stage carries a partial report")
    {
        const auto& bol = support::reference_cell();
        auto g = EstimationGrids::defaults_for(bol);
        g.c_n0 = {100.0, 150.0}; // below theta_f: no lithiation window at all
        try {
            calibrate(bol, trace_100k(), g);
            FAIL("expected calibration to fail");
        } catch (const CalibrationError& e) {
            CHECK(e.kind() == ErrorKind::EstimationFailed);
            CHECK(e.is_numerical());
            const auto& p = e.partial_report();
            CHECK_FALSE(p.complete);
            CHECK_FALSE(p.failure.empty());
            CHECK(p.flags.lli);
            CHECK(p.estimated.c_n0 == bol.negative.c_0);
        }
    }
}
