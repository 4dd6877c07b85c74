#include "degradiag/diagnose.hpp"
#include "degradiag/error.hpp"
#include "degradiag/simulate.hpp"
#include "parallel.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace degradiag {

namespace {

constexpr const char* kModule = "diagnose";
// Stage-2 fallback weight: volts of penalty per unit relative capacity mismatch.
constexpr double kCapacityWeight = 100.0;

std::string format(const char* fmt, double a, double b, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
    return buf;
}

struct Outcome {
    bool ok = false;
    std::string reason;
    VoltageTrace trace;
    std::optional<DcaFeature> valley;
};

Outcome run_candidate(const CellParameters& cell, const EvaluationSettings& s, bool features)
{
    Outcome o;
    try {
        SimulationOptions opt;
        opt.shells = s.shells;
        o.trace = simulate_constant_current(cell, s.c_rate, s.dt, opt);
        if (features)
            o.valley = extract_features(o.trace, s.smoothing, s.windows).features.high_voltage_valley;
        o.ok = true;
    } catch (const Error& e) {
        o.reason = e.what();
    }
    return o;
}

template <class Make>
std::vector<Outcome> run_grid(const std::vector<double>& grid, const EvaluationSettings& s,
                              bool features, Make make_cell)
{
    std::vector<Outcome> out(grid.size());
    detail::parallel_for(grid.size(), s.jobs, [&](std::size_t i) {
        try {
            out[i] = run_candidate(make_cell(grid[i]), s, features);
        } catch (const Error& e) {
            out[i].reason = e.what();
        }
    });
    return out;
}

void require_grid(const std::vector<double>& grid, const char* name)
{
    if (grid.empty())
        throw Error(ErrorKind::Validation, kModule, std::string(name) + " grid is empty");
}

double measured_valley(const VoltageTrace& measured, const EvaluationSettings& s)
{
    const auto f = extract_features(measured, s.smoothing, s.windows).features;
    if (!f.high_voltage_valley)
        throw Error(ErrorKind::MissingFeature, kModule,
                    "measured trace has no high-voltage valley inside the search window");
    return f.high_voltage_valley->position_v;
}

StageResult finish(StageTrace trace, double reference, const char* name)
{
    if (trace.evaluated.empty()) {
        std::string msg = std::string("every ") + name + " candidate was skipped";
        if (!trace.skipped.empty())
            msg += "; first reason: " + trace.skipped.front().reason;
        throw Error(ErrorKind::EstimationFailed, kModule, msg);
    }
    const std::size_t k = select_index(trace.evaluated, reference);
    StageResult r;
    r.value = trace.evaluated[k].candidate;
    r.loss = trace.evaluated[k].loss;
    r.trace = std::move(trace);
    return r;
}

} // namespace

std::size_t select_index(const std::vector<CandidateLoss>& losses, double reference)
{
    if (losses.empty())
        throw Error(ErrorKind::EstimationFailed, kModule, "no candidates to select from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < losses.size(); ++i) {
        const auto& a = losses[i];
        const auto& b = losses[best];
        if (a.loss < b.loss ||
            (a.loss == b.loss && std::abs(a.candidate - reference) < std::abs(b.candidate - reference)))
            best = i;
    }
    return best;
}

void validate(const DiagnosisThresholds& t)
{
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw Error(ErrorKind::Validation, kModule,
                        std::string("thresholds.") + name + " must be positive");
    };
    pos(t.valley_shift_significant, "valley_shift_significant");
    pos(t.peak_ratio_significant, "peak_ratio_significant");
    pos(t.valley_ratio_significant, "valley_ratio_significant");
    pos(t.residual_valley_shift, "residual_valley_shift");
    pos(t.capacity_tolerance, "capacity_tolerance");
}

MechanismFlags classify_mechanisms(const FeatureDelta& d, const DiagnosisThresholds& t)
{
    validate(t);
    MechanismFlags f;
    const bool shifted = d.valley_shift > t.valley_shift_significant;
    const bool peak_up = d.peak_ratio > 1.0 + t.peak_ratio_significant;
    f.lli = shifted && peak_up;
    f.lam_ne = d.valley_ratio < 1.0 - t.valley_ratio_significant;
    if (f.lli)
        f.evidence["lli"] = format("valley shift %+.2f mV > %.2f mV and peak ratio %.4f > %.4f",
                                   d.valley_shift * 1e3, t.valley_shift_significant * 1e3,
                                   d.peak_ratio, 1.0 + t.peak_ratio_significant);
    if (f.lam_ne)
        f.evidence["lam_ne"] = format("valley magnitude ratio %.4f < %.4f", d.valley_ratio,
                                      1.0 - t.valley_ratio_significant);
    return f;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n)
{
    if (n == 0)
        return {};
    if (n == 1)
        return {hi};
    std::vector<double> g(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + step * static_cast<double>(i);
    g.back() = hi;
    return g;
}

EstimationGrids EstimationGrids::defaults_for(const CellParameters& bol, double lower_fraction,
                                              std::size_t points)
{
    EstimationGrids g;
    g.c_n0 = linear_grid(lower_fraction * bol.negative.c_0, bol.negative.c_0, points);
    g.eps_n = linear_grid(lower_fraction * bol.negative.epsilon, bol.negative.epsilon, points);
    g.eps_p = linear_grid(lower_fraction * bol.positive.epsilon, bol.positive.epsilon, points);
    return g;
}

StageResult estimate_cn0(const CellParameters& bol, const VoltageTrace& measured,
                         const std::vector<double>& grid, const EvaluationSettings& s)
{
    require_grid(grid, "c_n0");
    const double target = measured_valley(measured, s);
    const auto outcomes = run_grid(grid, s, true, [&](double c) { return with_cn0(bol, c); });
    StageTrace trace;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& o = outcomes[i];
        if (!o.ok)
            trace.skipped.push_back({grid[i], o.reason});
        else if (!o.valley)
            trace.skipped.push_back({grid[i], "no high-voltage valley inside the search window"});
        else
            trace.evaluated.push_back({grid[i], std::abs(o.valley->position_v - target)});
    }
    return finish(std::move(trace), bol.negative.c_0, "c_n0");
}

StageResult estimate_eps_n(const CellParameters& cell, const VoltageTrace& measured,
                           const std::vector<double>& grid, const EvaluationSettings& s,
                           double capacity_tolerance)
{
    require_grid(grid, "eps_n");
    const double q_meas = measured.capacity();
    if (!(q_meas > 0.0))
        throw Error(ErrorKind::Data, kModule, "measured trace has zero capacity");
    const auto outcomes =
        run_grid(grid, s, false, [&](double v) { return with_epsilon(cell, ElectrodeTag::negative, v); });

    StageTrace trace;
    std::vector<CandidateLoss> feasible;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& o = outcomes[i];
        if (!o.ok) {
            trace.skipped.push_back({grid[i], o.reason});
            continue;
        }
        const double rms = rms_voltage_difference(o.trace, measured, s.rms_points, s.eps_n_axis);
        const double mismatch = std::abs(o.trace.capacity() - q_meas) / q_meas;
        if (mismatch <= capacity_tolerance) {
            trace.evaluated.push_back({grid[i], rms});
            feasible.push_back({grid[i], rms});
        } else {
            trace.evaluated.push_back({grid[i], rms + kCapacityWeight * mismatch});
        }
    }
    const double reference = cell.negative.epsilon;
    if (feasible.empty()) {
        StageResult r = finish(std::move(trace), reference, "eps_n");
        r.capacity_fallback = true;
        return r;
    }
    const std::size_t k = select_index(feasible, reference);
    StageResult r;
    r.value = feasible[k].candidate;
    r.loss = feasible[k].loss;
    r.trace = std::move(trace);
    return r;
}

StageResult estimate_eps_p(const CellParameters& cell, const VoltageTrace& measured,
                           const std::vector<double>& grid, const EvaluationSettings& s)
{
    require_grid(grid, "eps_p");
    const auto outcomes = run_grid(grid, s, false, [&](double v) {
        return with_epsilon(cell, ElectrodeTag::positive, v);
    });
    StageTrace trace;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!outcomes[i].ok) {
            trace.skipped.push_back({grid[i], outcomes[i].reason});
            continue;
        }
        trace.evaluated.push_back(
            {grid[i], rms_voltage_difference(outcomes[i].trace, measured, s.rms_points, s.eps_p_axis)});
    }
    return finish(std::move(trace), cell.positive.epsilon, "eps_p");
}

CalibrationError::CalibrationError(const Error& cause, DegradationReport partial)
    : Error(cause.kind(), cause.module(), cause.what()), _partial(std::move(partial))
{
}

Diagnosis diagnose(const CellParameters& bol, const VoltageTrace& measured,
                   const DiagnosisThresholds& thresholds, const EvaluationSettings& s)
{
    Diagnosis d;
    SimulationOptions opt;
    opt.shells = s.shells;
    const VoltageTrace fresh = simulate_constant_current(bol, s.c_rate, s.dt, opt);
    d.fresh = extract_features(fresh, s.smoothing, s.windows);
    d.measured = extract_features(measured, s.smoothing, s.windows);
    d.delta = feature_shift(d.fresh.features, d.measured.features);
    d.flags = classify_mechanisms(d.delta, thresholds);
    return d;
}

CellParameters calibrated_cell(const CellParameters& bol, const DegradationReport& report)
{
    CellParameters cell = with_cn0(bol, report.estimated.c_n0);
    cell = with_epsilon(cell, ElectrodeTag::negative, report.estimated.eps_n);
    return with_epsilon(cell, ElectrodeTag::positive, report.estimated.eps_p);
}

DegradationReport calibrate(const CellParameters& bol, const VoltageTrace& measured,
                            const EstimationGrids& grids, const CalibrationOptions& options)
{
    const auto& t = options.thresholds;
    const auto& s = options.settings;
    validate(t);
    validate(bol);

    DegradationReport report;
    report.capacity_measured = measured.capacity();
    CellParameters cell = bol;
    auto snapshot = [&] {
        report.estimated = {cell.negative.c_0, cell.negative.epsilon, cell.positive.epsilon};
        report.deltas = degradation_deltas(bol, cell);
    };

    try {
        const Diagnosis dx = diagnose(bol, measured, t, s);
        report.flags = dx.flags;
        const double valley_meas = dx.measured.features.high_voltage_valley->position_v;
        snapshot();

        if (report.flags.lli) {
            auto r = estimate_cn0(bol, measured, grids.c_n0, s);
            cell = with_cn0(bol, r.value);
            report.search_trace.c_n0 = std::move(r.trace);
            snapshot();
        }

        auto simulate_cell = [&](const CellParameters& c) {
            const Outcome o = run_candidate(c, s, true);
            if (!o.ok)
                throw Error(ErrorKind::Numerical, kModule, o.reason);
            return o;
        };

        const double q_meas = report.capacity_measured;
        Outcome current = simulate_cell(cell);
        const double mismatch = std::abs(current.trace.capacity() - q_meas) / q_meas;
        const bool run_stage2 = report.flags.lam_ne || mismatch > t.capacity_tolerance;
        bool run_stage3 = false;

        for (std::size_t pass = 0; pass <= options.refinement_passes; ++pass) {
            if (pass > 0 && !run_stage2 && !run_stage3)
                break;
            if (pass > 0) {
                // Refinement: revisit c_n0 with the current epsilon estimates.
                report.refinement_passes = pass;
                if (report.flags.lli) {
                    auto r = estimate_cn0(cell, measured, grids.c_n0, s);
                    cell = with_cn0(cell, r.value);
                    report.search_trace.c_n0 = std::move(r.trace);
                    snapshot();
                }
            }
            if (run_stage2) {
                auto r = estimate_eps_n(cell, measured, grids.eps_n, s, t.capacity_tolerance);
                cell = with_epsilon(cell, ElectrodeTag::negative, r.value);
                report.capacity_fallback = r.capacity_fallback;
                report.search_trace.eps_n = std::move(r.trace);
                snapshot();
                current = simulate_cell(cell);
            }
            if (pass == 0) {
                const double residual =
                    current.valley ? current.valley->position_v - valley_meas : 0.0;
                if (residual > t.residual_valley_shift) {
                    run_stage3 = true;
                    report.flags.lam_pe = true;
                    report.flags.evidence["lam_pe"] =
                        format("valley residual after negative-electrode fit %+.2f mV > %.2f mV",
                               residual * 1e3, t.residual_valley_shift * 1e3);
                }
            }
            if (run_stage3) {
                auto r = estimate_eps_p(cell, measured, grids.eps_p, s);
                cell = with_epsilon(cell, ElectrodeTag::positive, r.value);
                report.search_trace.eps_p = std::move(r.trace);
                snapshot();
                current = simulate_cell(cell);
            }
        }

        report.capacity_simulated = current.trace.capacity();
        report.fit_rms = rms_voltage_difference(current.trace, measured, s.rms_points, s.eps_p_axis);
        report.valley_residual = current.valley ? current.valley->position_v - valley_meas
                                                : std::numeric_limits<double>::quiet_NaN();
    } catch (const Error& e) {
        report.complete = false;
        report.failure = std::string(e.module()) + ": " + e.what();
        snapshot();
        throw CalibrationError(e, std::move(report));
    }
    return report;
}

} // namespace degradiag
