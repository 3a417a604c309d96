#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "tabsynth/tabular.hpp"

namespace tabsynth::csv {

// Comma separated, optional double-quoted fields ("" escapes a quote), first line is the header.
RawTable read(std::istream& in);
std::vector<std::string> split_line(const std::string& line);

void write_row(std::ostream& out, const std::vector<std::string>& fields);
// Shortest representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace tabsynth::csv
