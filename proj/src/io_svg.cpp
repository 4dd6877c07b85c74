#include "degradiag/dataio.hpp"
#include "degradiag/error.hpp"
#include "io_common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace degradiag {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string f2(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

double nice_step(double span)
{
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw)
            return m * mag;
    return 10.0 * mag;
}

} // namespace

std::vector<PlotMarker> feature_markers(const DcaFeatureSet& f, const std::string& prefix)
{
    std::vector<PlotMarker> out;
    if (f.low_voltage_peak)
        out.push_back({prefix + " peak " + format_number(f.low_voltage_peak->position_v) + " V",
                       f.low_voltage_peak->position_v, f.low_voltage_peak->magnitude});
    if (f.high_voltage_valley)
        out.push_back({prefix + " valley " + format_number(f.high_voltage_valley->position_v) + " V",
                       f.high_voltage_valley->position_v, f.high_voltage_valley->magnitude});
    return out;
}

void export_plot_svg(const std::vector<PlotSeries>& curves, const std::vector<PlotMarker>& markers,
                     const fs::path& path, const std::string& title)
{
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = 0.0, y1 = -std::numeric_limits<double>::infinity();
    for (const auto& c : curves)
        for (const auto& s : c.curve.samples) {
            x0 = std::min(x0, s.voltage_v);
            x1 = std::max(x1, s.voltage_v);
            y1 = std::max(y1, s.dq_dv);
        }
    if (!std::isfinite(x0) || !(x1 > x0) || !(y1 > y0))
        throw Error(ErrorKind::Data, detail::kIoModule, "nothing to plot");
    y1 *= 1.05;

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * pw; };
    auto py = [&](double d) { return kTop + ph - (d - y0) / (y1 - y0) * ph; };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f2(kWidth) + "\" height=\"" +
           f2(kHeight) + "\" viewBox=\"0 0 " + f2(kWidth) + " " + f2(kHeight) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + f2(kWidth) + "\" height=\"" + f2(kHeight) +
           "\" fill=\"white\"/>\n";
    out += "<text x=\"" + f2(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
           escape(title) + "</text>\n";

    out += "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
    out += "<line x1=\"" + f2(kLeft) + "\" y1=\"" + f2(kTop + ph) + "\" x2=\"" + f2(kLeft + pw) +
           "\" y2=\"" + f2(kTop + ph) + "\"/>\n";
    out += "<line x1=\"" + f2(kLeft) + "\" y1=\"" + f2(kTop) + "\" x2=\"" + f2(kLeft) + "\" y2=\"" +
           f2(kTop + ph) + "\"/>\n";
    out += "</g>\n<g class=\"ticks\" font-size=\"11\">\n";
    const double xs = nice_step(x1 - x0);
    for (double v = std::ceil(x0 / xs) * xs; v <= x1 + 1e-12; v += xs)
        out += "<text x=\"" + f2(px(v)) + "\" y=\"" + f2(kTop + ph + 16) +
               "\" text-anchor=\"middle\">" + format_number(std::round(v / xs) * xs) + "</text>\n";
    const double ys = nice_step(y1 - y0);
    for (double d = 0.0; d <= y1 + 1e-12; d += ys)
        out += "<text x=\"" + f2(kLeft - 6) + "\" y=\"" + f2(py(d) + 4) +
               "\" text-anchor=\"end\">" + format_number(std::round(d / ys) * ys) + "</text>\n";
    out += "</g>\n";
    out += "<text x=\"" + f2(kLeft + pw / 2) + "\" y=\"" + f2(kHeight - 10) +
           "\" text-anchor=\"middle\" font-size=\"13\">Voltage (V)</text>\n";
    out += "<text x=\"16\" y=\"" + f2(kTop + ph / 2) + "\" text-anchor=\"middle\" font-size=\"13\" "
           "transform=\"rotate(-90 16 " + f2(kTop + ph / 2) + ")\">dQ/dV (Ah/V)</text>\n";

    for (std::size_t i = 0; i < curves.size(); ++i) {
        const char* color = kColors[i % std::size(kColors)];
        out += "<polyline class=\"series\" data-name=\"" + escape(curves[i].name) +
               "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& s : curves[i].curve.samples) {
            if (!first)
                out += ' ';
            first = false;
            out += f2(px(s.voltage_v)) + "," + f2(py(s.dq_dv));
        }
        out += "\"/>\n";
        out += "<text x=\"" + f2(kLeft + pw - 150) + "\" y=\"" + f2(kTop + 16 + 16 * static_cast<double>(i)) +
               "\" font-size=\"12\" fill=\"" + color + "\">" + escape(curves[i].name) + "</text>\n";
    }
    for (const auto& m : markers) {
        out += "<g class=\"marker\">\n<circle cx=\"" + f2(px(m.voltage_v)) + "\" cy=\"" +
               f2(py(m.dq_dv)) + "\" r=\"4\" fill=\"none\" stroke=\"black\"/>\n";
        out += "<text x=\"" + f2(px(m.voltage_v) + 6) + "\" y=\"" + f2(py(m.dq_dv) - 6) +
               "\" font-size=\"11\">" + escape(m.label) + "</text>\n</g>\n";
    }
    out += "</svg>\n";
    write_file_atomic(path, out);
}

} // namespace degradiag
