#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace alternator::csv {

// Shortest round-trip decimal ("nan" for NaN).
std::string format_double(double v);
double parse_double(std::string_view token);

std::vector<std::string> split(std::string_view line, char sep = ',');

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name, or npos.
  std::size_t column(std::string_view name) const;
};

Table parse(std::string_view text);
std::string join(const std::vector<std::string>& cells);

}  // namespace alternator::csv
