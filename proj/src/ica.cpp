#include "degradiag/ica.hpp"
#include "degradiag/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace degradiag {

namespace {

constexpr const char* kModule = "ica";
constexpr double kMinVoltageStep = 1e-6;

// Rows: evaluation offsets 0..w-1 within the window; columns: weights on the window.
Eigen::MatrixXd sg_projection(std::size_t window, std::size_t order)
{
    const auto w = static_cast<Eigen::Index>(window);
    const auto m = static_cast<Eigen::Index>(order + 1);
    const double half = static_cast<double>(window / 2);
    Eigen::MatrixXd a(w, m);
    for (Eigen::Index i = 0; i < w; ++i) {
        const double x = static_cast<double>(i) - half;
        double p = 1.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            a(i, j) = p;
            p *= x;
        }
    }
    // hat matrix A (A^T A)^-1 A^T: row i smooths the window onto point i
    const Eigen::MatrixXd pinv = a.completeOrthogonalDecomposition().pseudoInverse();
    return a * pinv;
}

} // namespace

std::string_view to_string(SmoothingMethod m) noexcept
{
    switch (m) {
    case SmoothingMethod::none: return "none";
    case SmoothingMethod::moving_average: return "moving_average";
    case SmoothingMethod::savitzky_golay: return "savitzky_golay";
    }
    return "none";
}

SmoothingMethod smoothing_method_from_string(std::string_view name)
{
    if (name == "none")
        return SmoothingMethod::none;
    if (name == "moving_average")
        return SmoothingMethod::moving_average;
    if (name == "savitzky_golay")
        return SmoothingMethod::savitzky_golay;
    throw Error(ErrorKind::Validation, kModule, "unknown smoothing method '" + std::string(name) + "'");
}

void validate(const SmoothingConfig& cfg)
{
    if (cfg.method == SmoothingMethod::none)
        return;
    if (cfg.window_points < 3 || cfg.window_points % 2 == 0)
        throw Error(ErrorKind::Validation, kModule,
                    "smoothing.window_points must be odd and >= 3, got " +
                        std::to_string(cfg.window_points));
    if (cfg.method == SmoothingMethod::savitzky_golay && cfg.polynomial_order >= cfg.window_points)
        throw Error(ErrorKind::Validation, kModule,
                    "smoothing.polynomial_order must be below window_points");
    if (cfg.resample_points == 1)
        throw Error(ErrorKind::Validation, kModule, "smoothing.resample_points must be 0 or >= 2");
}

std::vector<double> savitzky_golay(const std::vector<double>& y, std::size_t window,
                                   std::size_t order)
{
    SmoothingConfig cfg;
    cfg.window_points = window;
    cfg.polynomial_order = order;
    validate(cfg);
    const std::size_t n = y.size();
    if (n < window)
        return y;
    const Eigen::MatrixXd h = sg_projection(window, order);
    const std::size_t half = window / 2;
    std::vector<double> out(n);
    auto apply = [&](std::size_t row, std::size_t start) {
        double acc = 0.0;
        for (std::size_t j = 0; j < window; ++j)
            acc += h(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) * y[start + j];
        return acc;
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (i < half)
            out[i] = apply(i, 0);
        else if (i + half >= n)
            out[i] = apply(i - (n - window), n - window);
        else
            out[i] = apply(half, i - half);
    }
    return out;
}

std::vector<double> moving_average(const std::vector<double>& y, std::size_t window)
{
    const std::size_t n = y.size();
    const std::size_t half = window / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t h = std::min({half, i, n - 1 - i});
        double acc = 0.0;
        for (std::size_t j = i - h; j <= i + h; ++j)
            acc += y[j];
        out[i] = acc / static_cast<double>(2 * h + 1);
    }
    return out;
}

std::vector<double> smooth(const std::vector<double>& y, const SmoothingConfig& cfg)
{
    switch (cfg.method) {
    case SmoothingMethod::none: return y;
    case SmoothingMethod::moving_average: return moving_average(y, cfg.window_points);
    case SmoothingMethod::savitzky_golay:
        return savitzky_golay(y, cfg.window_points, cfg.polynomial_order);
    }
    return y;
}

DcaCurve compute_dca(const VoltageTrace& trace, const SmoothingConfig& cfg)
{
    validate(cfg);
    if (trace.samples.size() < 3)
        throw Error(ErrorKind::Data, kModule,
                    "DCA needs at least 3 samples, got " + std::to_string(trace.samples.size()));
    const VoltageTrace grid =
        cfg.resample_points >= 2 ? resample_trace(trace, cfg.resample_points) : trace;

    std::vector<double> q, v;
    q.reserve(grid.samples.size());
    v.reserve(grid.samples.size());
    for (const auto& s : grid.samples) {
        q.push_back(s.charge_ah);
        v.push_back(s.voltage_v);
    }
    if (cfg.presmooth_voltage && cfg.method != SmoothingMethod::none)
        v = smooth(v, cfg);

    // Keep only samples that advance the voltage by at least 1 uV in the trace
    // direction; plateaus and reversals are merged into the previous interval.
    const double dir = trace.direction == Direction::discharge ? -1.0 : 1.0;
    std::vector<double> qk{q.front()}, vk{v.front()};
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (dir * (v[i] - vk.back()) >= kMinVoltageStep) {
            qk.push_back(q[i]);
            vk.push_back(v[i]);
        }
    }
    if (vk.size() < 3)
        throw Error(ErrorKind::Data, kModule,
                    "fewer than 3 usable points after merging flat voltage intervals");

    DcaCurve out;
    out.source = trace.provenance;
    out.smoothing = cfg;
    std::vector<double> d(vk.size() - 2);
    for (std::size_t i = 1; i + 1 < vk.size(); ++i)
        d[i - 1] = std::abs((qk[i + 1] - qk[i - 1]) / (vk[i + 1] - vk[i - 1]));
    d = smooth(d, cfg);
    out.samples.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        out.samples.push_back({vk[i + 1], d[i]});
    return out;
}

namespace {

std::optional<DcaFeature> extremum(const DcaCurve& dca, const VoltageWindow& w, bool maximum,
                                   const char* name)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < dca.samples.size(); ++i)
        if (w.contains(dca.samples[i].voltage_v))
            idx.push_back(i);
    if (idx.empty())
        throw Error(ErrorKind::Window, kModule,
                    std::string(name) + " window [" + std::to_string(w.lo) + ", " +
                        std::to_string(w.hi) + "] V contains no DCA samples");
    std::size_t best = 0;
    for (std::size_t k = 1; k < idx.size(); ++k) {
        const double a = dca.samples[idx[k]].dq_dv;
        const double b = dca.samples[idx[best]].dq_dv;
        if (maximum ? a > b : a < b)
            best = k;
    }
    if (best == 0 || best + 1 == idx.size())
        return std::nullopt;

    const auto& s0 = dca.samples[idx[best] - 1];
    const auto& s1 = dca.samples[idx[best]];
    const auto& s2 = dca.samples[idx[best] + 1];
    const double x0 = s0.voltage_v - s1.voltage_v;
    const double x2 = s2.voltage_v - s1.voltage_v;
    const double y0 = s0.dq_dv - s1.dq_dv;
    const double y2 = s2.dq_dv - s1.dq_dv;
    const double det = x0 * x2 * (x0 - x2);
    DcaFeature f{s1.voltage_v, s1.dq_dv};
    if (det != 0.0) {
        const double a = (y0 * x2 - y2 * x0) / det;
        const double b = (y2 * x0 * x0 - y0 * x2 * x2) / det;
        if (maximum ? a < 0.0 : a > 0.0) {
            const double xv = std::clamp(-b / (2.0 * a), std::min(x0, x2), std::max(x0, x2));
            f.position_v = s1.voltage_v + xv;
            f.magnitude = s1.dq_dv + a * xv * xv + b * xv;
        }
    }
    return f;
}

} // namespace

DcaFeatureSet find_features(const DcaCurve& dca, const SearchWindows& windows)
{
    if (!(windows.peak.lo < windows.peak.hi) || !(windows.valley.lo < windows.valley.hi))
        throw Error(ErrorKind::Window, kModule, "search window bounds must be increasing");
    DcaFeatureSet out;
    out.search_windows = windows;
    out.low_voltage_peak = extremum(dca, windows.peak, true, "peak");
    out.high_voltage_valley = extremum(dca, windows.valley, false, "valley");
    return out;
}

FeatureDelta feature_shift(const DcaFeatureSet& reference, const DcaFeatureSet& degraded)
{
    auto need = [](const std::optional<DcaFeature>& f, const char* what) -> const DcaFeature& {
        if (!f)
            throw Error(ErrorKind::MissingFeature, kModule, std::string(what) + " is absent");
        return *f;
    };
    const auto& rp = need(reference.low_voltage_peak, "reference low-voltage peak");
    const auto& dp = need(degraded.low_voltage_peak, "degraded low-voltage peak");
    const auto& rv = need(reference.high_voltage_valley, "reference high-voltage valley");
    const auto& dv = need(degraded.high_voltage_valley, "degraded high-voltage valley");
    FeatureDelta d;
    d.peak_shift = dp.position_v - rp.position_v;
    d.peak_ratio = dp.magnitude / rp.magnitude;
    d.valley_shift = dv.position_v - rv.position_v;
    d.valley_ratio = dv.magnitude / rv.magnitude;
    return d;
}

FeatureExtraction extract_features(const VoltageTrace& trace, const SmoothingConfig& cfg,
                                   const SearchWindows& windows)
{
    FeatureExtraction out;
    out.curve = compute_dca(trace, cfg);
    out.features = find_features(out.curve, windows);
    return out;
}

} // namespace degradiag
