#pragma once

#include "hitrun/directions.hpp"
#include "hitrun/gaussian_model.hpp"
#include "hitrun/linalg.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hitrun {

using Cell = std::variant<double, std::int64_t, std::string>;

/// Rows of typed cells under a fixed column schema, plus a free-form summary
/// and the provenance needed to rerun.
struct ResultTable {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, std::string>> provenance;

  void add_row(std::vector<Cell> row);
};

/// Shortest text that reads back to the same double: up to 17 significant
/// digits, '.' decimal point, independent of the locale.
std::string format_double(double value);
std::string format_cell(const Cell &cell);

/// "# key = value" provenance and summary lines, then a header and rows.
void write_csv(const ResultTable &table, std::ostream &out);
/// One object: summary fields, then provenance, columns and rows.
void write_json(const ResultTable &table, std::ostream &out);

/// Writes to a temporary file next to `path`, then renames it into place.
void write_file_atomic(const std::string &path, const std::string &content);

// Parsers for configuration values. Malformed values fail with
// ConfigInvalid.

double parse_double(const std::string &text);
std::int64_t parse_int(const std::string &text);
std::vector<double> parse_double_list(const std::string &text);
Vector parse_vector(const std::string &text);

/// Numeric CSV: rows of comma-separated numbers; blank lines and lines
/// starting with '#' are skipped. All rows must have the same length.
Matrix read_csv_matrix(const std::string &path);

/// "diag:4,1" or "file:cov.csv".
CovarianceSpec parse_covariance(const std::string &spec);

/// "uniform", "axes", "axes:0.3,0.7", "rows:matrix.csv" or
/// "support:vectors.csv" (one vector per row, optional trailing weight
/// column when the file has dim + 1 columns). Support laws are declared
/// symmetric only when every vector's negation is also listed.
DirectionLaw parse_direction_law(const std::string &spec, int dim);

} // namespace hitrun
