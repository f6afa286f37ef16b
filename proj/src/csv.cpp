#include "dshrink/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dshrink {

void Dataset::validate() const {
  if (X.rows() < 2) throw ConfigError("dataset needs at least two rows");
  if (X.cols() < 1) throw ConfigError("dataset needs at least one predictor");
  if (y.size() != X.rows())
    throw ConfigError("response length does not match the row count");
  if (!X.allFinite() || !y.allFinite())
    throw ConfigError("dataset contains non-finite values");
  if (!names.empty()) {
    if (Eigen::Index(names.size()) != X.cols())
      throw ConfigError("column name count does not match the predictor count");
    std::set<std::string> seen(names.begin(), names.end());
    if (Eigen::Index(seen.size()) != X.cols())
      throw ConfigError("duplicate predictor names");
  }
}

Dataset subset_rows(const Dataset& data, const std::vector<int>& rows) {
  Dataset out;
  out.X.resize(Eigen::Index(rows.size()), data.p());
  out.y.resize(Eigen::Index(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || Eigen::Index(rows[i]) >= data.n())
      throw std::invalid_argument("row index out of range");
    out.X.row(Eigen::Index(i)) = data.X.row(rows[i]);
    out.y[Eigen::Index(i)] = data.y[rows[i]];
  }
  out.names = data.names;
  return out;
}

namespace {

// Splits one CSV record; handles quoted fields with embedded commas/quotes.
std::vector<std::string> split_record(const std::string& line, int line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted) {
    throw ConfigError("line " + std::to_string(line_no) +
                      ": unterminated quoted field");
  }
  cells.push_back(cell);
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, int line_no, const std::string& col) {
  const std::string text = trim(raw);
  if (text.empty()) {
    throw ConfigError("line " + std::to_string(line_no) + ", column " + col +
                      ": missing value");
  }
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("line " + std::to_string(line_no) + ", column " + col +
                      ": not a number: '" + text + "'");
  }
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& response_column) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    line.erase(0, 3);

  std::vector<std::string> header = split_record(line, 1);
  for (auto& h : header) h = trim(h);
  {
    std::set<std::string> seen(header.begin(), header.end());
    if (seen.size() != header.size())
      throw ConfigError(path + ": duplicate column names in header");
  }
  const auto it = std::find(header.begin(), header.end(), response_column);
  if (it == header.end())
    throw ConfigError(path + ": response column '" + response_column +
                      "' not found");
  const size_t y_col = size_t(it - header.begin());
  if (header.size() < 2)
    throw ConfigError(path + ": need at least one predictor column");

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_record(line, line_no);
    if (cells.size() != header.size()) {
      throw ConfigError(path + ": line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " fields, expected " +
                        std::to_string(header.size()));
    }
    std::vector<double> row(cells.size());
    for (size_t j = 0; j < cells.size(); ++j)
      row[j] = parse_cell(cells[j], line_no, header[j]);
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw ConfigError(path + ": need at least two data rows");

  Dataset data;
  const Eigen::Index n = Eigen::Index(rows.size());
  const Eigen::Index p = Eigen::Index(header.size()) - 1;
  data.X.resize(n, p);
  data.y.resize(n);
  for (size_t j = 0; j < header.size(); ++j)
    if (j != y_col) data.names.push_back(header[j]);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index k = 0;
    for (size_t j = 0; j < header.size(); ++j) {
      if (j == y_col) {
        data.y[i] = rows[size_t(i)][j];
      } else {
        data.X(i, k++) = rows[size_t(i)][j];
      }
    }
  }
  data.validate();
  return data;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

}  // namespace dshrink
