#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace pathreg {

/// Shortest decimal form that round-trips to the same double.
std::string format_number(double value);

/// Writes `a,b,c\n` with format_number for each value.
void write_csv_row(std::ostream& out, std::span<const double> values);

/// Writes a `# key: value` manifest line.
void write_csv_comment(std::ostream& out, std::string_view key, std::string_view value);

}  // namespace pathreg
