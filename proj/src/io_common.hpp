#pragma once

#include <string>
#include <vector>

namespace degradiag::detail {

inline constexpr const char* kIoModule = "dataio";

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines; // 1-based source line of each row
};

/// Minimal CSV reader: comma separated, no quoting, blank lines skipped.
CsvTable parse_csv(const std::string& text, const std::string& source);

/// Column index by name; throws Error{Data} naming the file if missing.
std::size_t column(const CsvTable& t, const std::string& name, const std::string& source);

/// Parses a finite number; throws Error{Data} with file, line and column otherwise.
double parse_number(const std::string& cell, const std::string& source, std::size_t line,
                    const std::string& column_name);

} // namespace degradiag::detail
