#include "degradiag/dataio.hpp"
#include "degradiag/error.hpp"
#include "io_common.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace degradiag {

using detail::kIoModule;

namespace detail {

namespace {
std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ','))
        out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}
} // namespace

CsvTable parse_csv(const std::string& text, const std::string& source)
{
    CsvTable t;
    std::istringstream is(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (trim(line).empty())
            continue;
        auto cells = split(trim(line));
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw Error(ErrorKind::Data, kIoModule,
                        source + ":" + std::to_string(n) + ": expected " +
                            std::to_string(t.header.size()) + " columns, found " +
                            std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
        t.lines.push_back(n);
    }
    if (t.header.empty())
        throw Error(ErrorKind::Data, kIoModule, source + ": file is empty");
    return t;
}

std::size_t column(const CsvTable& t, const std::string& name, const std::string& source)
{
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == name)
            return i;
    throw Error(ErrorKind::Data, kIoModule, source + ": missing column '" + name + "'");
}

double parse_number(const std::string& cell, const std::string& source, std::size_t line,
                    const std::string& column_name)
{
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (cell.empty() || end != begin + cell.size() || errno == ERANGE || !std::isfinite(v))
        throw Error(ErrorKind::Data, kIoModule,
                    source + ":" + std::to_string(line) + ": column '" + column_name +
                        "' holds non-finite or malformed value '" + cell + "'");
    return v;
}

} // namespace detail

std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

double round_export(double v)
{
    if (!std::isfinite(v))
        return v;
    return std::strtod(format_number(v).c_str(), nullptr);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::Io, kIoModule, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents)
{
    std::error_code ec;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path(), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorKind::Io, kIoModule, "cannot write '" + tmp.string() + "'");
        out << contents;
        if (!out.flush())
            throw Error(ErrorKind::Io, kIoModule, "write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path, ec);
    if (ec)
        throw Error(ErrorKind::Io, kIoModule,
                    "cannot move '" + tmp.string() + "' into place: " + ec.message());
}

VoltageTrace load_voltage_csv(const fs::path& path, const MeasurementFileSpec& spec)
{
    const std::string src = path.string();
    auto unit = [&](const std::string& got, const char* want, const char* what) {
        if (got != want)
            throw Error(ErrorKind::Validation, kIoModule,
                        std::string(what) + " unit must be " + want + ", got '" + got + "'");
    };
    unit(spec.time_unit, "s", "time");
    unit(spec.current_unit, "A", "current");
    unit(spec.voltage_unit, "V", "voltage");
    unit(spec.charge_unit, "Ah", "charge");

    const auto t = detail::parse_csv(read_file(path), src);
    if (t.rows.size() < spec.min_rows)
        throw Error(ErrorKind::Data, kIoModule,
                    src + ": " + std::to_string(t.rows.size()) + " data rows; at least " +
                        std::to_string(spec.min_rows) + " rows are required");

    const bool tcv = spec.format == MeasurementFormat::time_current_voltage;
    const std::size_t cv = detail::column(t, spec.voltage_column, src);
    std::size_t ct = 0, ci = 0, cq = 0;
    bool has_time = true, has_current = true;
    if (tcv) {
        ct = detail::column(t, spec.time_column, src);
        ci = detail::column(t, spec.current_column, src);
    } else {
        cq = detail::column(t, spec.charge_column, src);
        try {
            ct = detail::column(t, spec.time_column, src);
        } catch (const Error&) {
            has_time = false;
        }
        try {
            ci = detail::column(t, spec.current_column, src);
        } catch (const Error&) {
            has_current = false;
        }
    }

    VoltageTrace trace;
    trace.direction = spec.direction;
    trace.provenance = Provenance::measured;
    trace.samples.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::size_t line = t.lines[r];
        TraceSample s;
        s.voltage_v = detail::parse_number(row[cv], src, line, spec.voltage_column);
        s.time_s = has_time ? detail::parse_number(row[ct], src, line, spec.time_column)
                            : static_cast<double>(r);
        if (has_current)
            s.current_a = std::abs(detail::parse_number(row[ci], src, line, spec.current_column));
        if (!tcv)
            s.charge_ah = detail::parse_number(row[cq], src, line, spec.charge_column);

        if (!trace.samples.empty()) {
            const auto& prev = trace.samples.back();
            if (s.time_s == prev.time_s)
                throw Error(ErrorKind::Data, kIoModule,
                            src + ":" + std::to_string(line) + ": duplicated timestamp " +
                                row[has_time ? ct : cv]);
            if (s.time_s < prev.time_s)
                throw Error(ErrorKind::Data, kIoModule,
                            src + ":" + std::to_string(line) + ": time decreases");
            if (tcv) {
                s.charge_ah = prev.charge_ah + 0.5 * (prev.current_a + s.current_a) *
                                                   (s.time_s - prev.time_s) / 3600.0;
            } else if (s.charge_ah < prev.charge_ah) {
                throw Error(ErrorKind::Data, kIoModule,
                            src + ":" + std::to_string(line) + ": charge throughput decreases");
            }
        } else if (!tcv && s.charge_ah < 0.0) {
            throw Error(ErrorKind::Data, kIoModule,
                        src + ":" + std::to_string(line) + ": negative charge throughput");
        }
        trace.samples.push_back(s);
    }
    return trace;
}

void save_trace_csv(const VoltageTrace& trace, const fs::path& path)
{
    std::string out = "time_s,current_a,charge_ah,voltage_v\n";
    for (const auto& s : trace.samples) {
        out += format_number(s.time_s) + ',' + format_number(s.current_a) + ',' +
               format_number(s.charge_ah) + ',' + format_number(s.voltage_v) + '\n';
    }
    write_file_atomic(path, out);
}

OcpTable load_ocp_csv(const fs::path& path, ElectrodeTag tag)
{
    const std::string src = path.string();
    const auto t = detail::parse_csv(read_file(path), src);
    const auto cx = detail::column(t, "theta", src);
    const auto cu = detail::column(t, "potential_v", src);
    OcpTable table;
    table.tag = tag;
    table.source = path;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        table.stoichiometry.push_back(detail::parse_number(t.rows[r][cx], src, t.lines[r], "theta"));
        table.potential.push_back(detail::parse_number(t.rows[r][cu], src, t.lines[r], "potential_v"));
    }
    try {
        validate(table);
    } catch (const Error& e) {
        throw Error(e.kind(), kIoModule, src + ": " + e.what());
    }
    return table;
}

void save_ocp_csv(const OcpTable& table, const fs::path& path)
{
    std::string out = "theta,potential_v\n";
    for (std::size_t i = 0; i < table.stoichiometry.size(); ++i)
        out += format_number(table.stoichiometry[i]) + ',' + format_number(table.potential[i]) + '\n';
    write_file_atomic(path, out);
}

void export_dca(const DcaCurve& curve, const fs::path& path)
{
    std::string out = "voltage_v,dq_dv_ah_per_v\n";
    for (const auto& s : curve.samples)
        out += format_number(s.voltage_v) + ',' + format_number(s.dq_dv) + '\n';
    write_file_atomic(path, out);
}

DcaCurve load_dca_csv(const fs::path& path)
{
    const std::string src = path.string();
    const auto t = detail::parse_csv(read_file(path), src);
    const auto cv = detail::column(t, "voltage_v", src);
    const auto cd = detail::column(t, "dq_dv_ah_per_v", src);
    DcaCurve c;
    c.source = Provenance::measured;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        c.samples.push_back({detail::parse_number(t.rows[r][cv], src, t.lines[r], "voltage_v"),
                             detail::parse_number(t.rows[r][cd], src, t.lines[r], "dq_dv_ah_per_v")});
    return c;
}

} // namespace degradiag
