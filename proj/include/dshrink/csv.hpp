#pragma once

#include "dshrink/types.hpp"

#include <string>
#include <vector>

namespace dshrink {

// Loads a numeric CSV with a header row into a Dataset, pulling out the named
// response column. Quoted fields and CRLF line ends are accepted. Malformed
// numbers, ragged rows, duplicate headers, or a missing response column raise
// ConfigError naming the offending row and column.
Dataset load_csv(const std::string& path, const std::string& response_column);

// Shortest round-trip decimal form of a double (no locale surprises).
std::string format_double(double value);

// One CSV row; cells are written verbatim, so callers quote if needed.
std::string csv_row(const std::vector<std::string>& cells);

}  // namespace dshrink
