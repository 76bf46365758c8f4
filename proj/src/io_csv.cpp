#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "permtest/io.hpp"

namespace permtest::io {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line, std::size_t line_number) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw Error(ErrorKind::ParseError, "line " + std::to_string(line_number) + ": unterminated quote");
  fields.push_back(trim(field));
  return fields;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorKind::MissingColumn, "column '" + name + "' not found");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CsvTable table;
  std::size_t line_number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line_number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);  // BOM
    if (trim(line).empty()) {
      if (!have_header) throw Error(ErrorKind::ParseError, "missing header row");
      continue;
    }
    auto fields = split_line(line, line_number);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_number) + ": expected " +
                                             std::to_string(table.header.size()) + " fields, found " +
                                             std::to_string(fields.size()));
    }
    // Rows are stored densely; skipped blank lines would shift the reported
    // line numbers, so blank lines are only tolerated at the end.
    if (table.rows.size() + 2 != line_number) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_number) + ": blank line inside data");
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw Error(ErrorKind::ParseError, "empty file: header row required");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

double parse_number(const std::string& cell, std::size_t line, const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::ParseError,
                "row " + std::to_string(line) + ", column " + column + ": '" + cell + "' is not a number");
  }
  return value;
}

Dataset ingest_table(const CsvTable& table, const std::string& response_column) {
  const std::size_t response = table.column(response_column);
  if (table.header.size() < 2) throw Error(ErrorKind::MissingColumn, "no predictor columns");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Matrix x(n, static_cast<Eigen::Index>(table.header.size() - 1));
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const auto line = static_cast<std::size_t>(i) + 2;
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double v = parse_number(row[j], line, table.header[j]);
      if (j == response) {
        y(i) = v;
      } else {
        x(i, col++) = v;
      }
    }
  }
  return validate_dataset(std::move(x), std::move(y));
}

Dataset ingest_csv(const std::filesystem::path& path, const std::string& response_column) {
  return ingest_table(read_csv(path), response_column);
}

std::vector<SeriesRecord> parse_series_table(const CsvTable& table) {
  const std::size_t id_col = table.column("obs_id");
  const std::size_t ch_col = table.column("channel");
  const std::size_t t_col = table.column("t_index");
  const std::size_t v_col = table.column("value");

  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> groups;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::size_t line = i + 2;
    auto key = std::make_pair(row[id_col], row[ch_col]);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.emplace_back(parse_number(row[t_col], line, "t_index"), parse_number(row[v_col], line, "value"));
  }

  std::vector<SeriesRecord> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    auto& points = groups[key];
    std::sort(points.begin(), points.end());
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (points[i].first == points[i - 1].first) {
        throw Error(ErrorKind::ParseError, "duplicate t_index in series " + key.first + "/" + key.second);
      }
    }
    if (points.size() < 2) {
      throw Error(ErrorKind::TooFewSamples, "series " + key.first + "/" + key.second + " has fewer than 2 samples");
    }
    SeriesRecord rec{key.first, key.second, Vector(static_cast<Eigen::Index>(points.size()))};
    for (std::size_t i = 0; i < points.size(); ++i) rec.samples(static_cast<Eigen::Index>(i)) = points[i].second;
    if (!rec.samples.allFinite()) throw Error(ErrorKind::NonFinite, "series contains NaN or infinity");
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<SeriesRecord> read_series_csv(const std::filesystem::path& path) {
  return parse_series_table(read_csv(path));
}

Vector responses_by_id(const CsvTable& table, const std::string& id_column, const std::string& response_column,
                       const std::vector<std::string>& ids) {
  const std::size_t id_col = table.column(id_column);
  const std::size_t y_col = table.column(response_column);
  std::map<std::string, double> lookup;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    lookup[table.rows[i][id_col]] = parse_number(table.rows[i][y_col], i + 2, response_column);
  }
  Vector y(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = lookup.find(ids[i]);
    if (it == lookup.end()) throw Error(ErrorKind::MissingColumn, "no response for observation '" + ids[i] + "'");
    y(static_cast<Eigen::Index>(i)) = it->second;
  }
  return y;
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t j = 0; j < data.d(); ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "y\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < data.d(); ++j) {
      out += format_double(data.predictors()(row, static_cast<Eigen::Index>(j))) + ",";
    }
    out += format_double(data.responses()(row)) + "\n";
  }
  write_text(path, out);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace permtest::io
