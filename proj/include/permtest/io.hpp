#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "permtest/core.hpp"
#include "permtest/features.hpp"
#include "permtest/simstudy.hpp"

namespace permtest::io {

using Json = nlohmann::ordered_json;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // rows[i] is file line i + 2

  /// Throws MissingColumn.
  std::size_t column(const std::string& name) const;
};

/// Comma-separated, header required, double quotes for fields containing
/// commas. Throws IoError or ParseError (ragged rows).
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

/// '.' decimal separator; throws ParseError naming the line and column.
double parse_number(const std::string& cell, std::size_t line, const std::string& column);

/// Every column except `response_column` becomes a predictor, in file order.
Dataset ingest_csv(const std::filesystem::path& path, const std::string& response_column);
Dataset ingest_table(const CsvTable& table, const std::string& response_column);

/// Long format: obs_id, channel, t_index, value. Samples are ordered by
/// t_index within each (obs_id, channel).
std::vector<SeriesRecord> read_series_csv(const std::filesystem::path& path);
std::vector<SeriesRecord> parse_series_table(const CsvTable& table);

/// Looks up `response_column` for each id in `ids` via `id_column`.
Vector responses_by_id(const CsvTable& table, const std::string& id_column, const std::string& response_column,
                       const std::vector<std::string>& ids);

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

Json config_to_json(const TestConfig& config);
TestConfig config_from_json(const Json& j);

/// Schema: statistic, model, r0, q, p_value, reject, diverged, config,
/// reference[] (-inf written as null).
Json outcome_to_json(const TestOutcome& outcome);
TestOutcome outcome_from_json(const Json& j);

Json sweep_to_json(const SweepResult& result);
SweepResult sweep_from_json(const Json& j);

/// grid_value,rejection_rate,R rows, one per grid point; a `method` column
/// is prepended when more than one result is written.
void write_sweep_csv(const std::vector<SweepResult>& results, const std::filesystem::path& path);

/// 30-bin histogram of the finite reference values with one vertical
/// marker at r0 (red) and one at q (green).
std::string render_svg(const TestOutcome& outcome, std::size_t bins = 30);

enum class ReportFormat { Json, Csv, Svg };

ReportFormat report_format_from_string(const std::string& name);

/// json: outcome_to_json (plus `manifest` when given); csv: header
/// "reference" then one value per row; svg: render_svg. Throws IoError.
void emit_report(const TestOutcome& outcome, ReportFormat format, const std::filesystem::path& path,
                 const Json* manifest = nullptr);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

struct InputDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::vector<std::string> command;  // argv without the program name
  Json config;
  std::vector<InputDigest> inputs;
  std::uint64_t master_seed = 0;
  std::string tool_version;
  std::size_t threads = 1;
  double wall_seconds = 0.0;

  /// The scheduling-independent part (no threads, no timing, no --threads
  /// in the command) embedded in result files.
  Json reproducible_json() const;
  Json to_json() const;
  static RunManifest from_json(const Json& j);
};

/// argv with any --threads option and its value removed.
std::vector<std::string> strip_threads(const std::vector<std::string>& args);

}  // namespace permtest::io
