#include "pathreg/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>

namespace pathreg {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buffer{};
  const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), result.ptr);
}

void write_csv_row(std::ostream& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << ',';
    out << format_number(values[i]);
  }
  out << '\n';
}

void write_csv_comment(std::ostream& out, std::string_view key, std::string_view value) {
  out << "# " << key << ": " << value << '\n';
}

}  // namespace pathreg
