#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace firlab::csv {

/// Shortest form that round-trips: 17 significant digits ("%.17g").
std::string format(double value);
std::string format(long long value);
inline std::string format(int value) { return format(static_cast<long long>(value)); }
inline std::string format(bool value) { return value ? "1" : "0"; }

void write_row(std::ostream& out, const std::vector<std::string>& fields);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index of `name`; throws std::out_of_range when absent.
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

/// Plain comma-separated reader (no quoting), as emitted by write_row.
Table read(std::istream& in);
Table read_file(const std::string& path);

}  // namespace firlab::csv
