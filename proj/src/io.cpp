#include "hitrun/io.hpp"

#include "hitrun/errors.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace hitrun {

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    fail(ErrorCode::NumericalFailure, "row width does not match the schema");
  rows.push_back(std::move(row));
}

std::string format_double(double value) {
  if (std::isnan(value))
    return "nan";
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string format_cell(const Cell &cell) {
  if (const auto *d = std::get_if<double>(&cell))
    return format_double(*d);
  if (const auto *i = std::get_if<std::int64_t>(&cell))
    return std::to_string(*i);
  return std::get<std::string>(cell);
}

namespace {

std::string summary_text(const nlohmann::ordered_json &v) {
  if (v.is_number_float())
    return format_double(v.get<double>());
  if (v.is_string())
    return v.get<std::string>();
  return v.dump();
}

} // namespace

void write_csv(const ResultTable &table, std::ostream &out) {
  for (const auto &[k, v] : table.provenance)
    out << "# " << k << " = " << v << '\n';
  for (const auto &[k, v] : table.summary.items())
    out << "# summary." << k << " = " << summary_text(v) << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto &row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
}

void write_json(const ResultTable &table, std::ostream &out) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  doc["kind"] = table.kind;
  for (const auto &[k, v] : table.summary.items())
    doc[k] = v;
  nlohmann::ordered_json prov = nlohmann::ordered_json::object();
  for (const auto &[k, v] : table.provenance)
    prov[k] = v;
  doc["provenance"] = prov;
  doc["columns"] = table.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto &row : table.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const Cell &c : row) {
      if (const auto *d = std::get_if<double>(&c)) {
        if (std::isfinite(*d))
          r.push_back(*d);
        else
          r.push_back(format_double(*d));
      } else if (const auto *i = std::get_if<std::int64_t>(&c)) {
        r.push_back(*i);
      } else {
        r.push_back(std::get<std::string>(c));
      }
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  out << doc.dump(2) << '\n';
}

void write_file_atomic(const std::string &path, const std::string &content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      fail(ErrorCode::ConfigInvalid, "cannot open '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      fail(ErrorCode::ConfigInvalid, "cannot write '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    fail(ErrorCode::ConfigInvalid,
         "cannot move output into '" + path + "': " + ec.message());
  }
}

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
    out.push_back(trim(item));
  if (!s.empty() && s.back() == sep)
    out.emplace_back();
  return out;
}

} // namespace

double parse_double(const std::string &text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    fail(ErrorCode::ConfigInvalid, "'" + text + "' is not a number");
  return value;
}

std::int64_t parse_int(const std::string &text) {
  const std::string t = trim(text);
  std::int64_t value = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    fail(ErrorCode::ConfigInvalid, "'" + text + "' is not an integer");
  return value;
}

std::vector<double> parse_double_list(const std::string &text) {
  std::vector<double> out;
  for (const std::string &item : split(text, ','))
    out.push_back(parse_double(item));
  if (out.empty())
    fail(ErrorCode::ConfigInvalid, "empty number list");
  return out;
}

Vector parse_vector(const std::string &text) {
  const std::vector<double> v = parse_double_list(text);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix read_csv_matrix(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::ConfigInvalid, "cannot read '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    rows.push_back(parse_double_list(t));
    if (rows.back().size() != rows.front().size())
      fail(ErrorCode::ConfigInvalid, "ragged rows in '" + path + "'");
  }
  if (rows.empty())
    fail(ErrorCode::ConfigInvalid, "'" + path + "' has no data");
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

CovarianceSpec parse_covariance(const std::string &spec) {
  const auto colon = spec.find(':');
  const std::string kind = trim(spec.substr(0, colon));
  const std::string arg =
      colon == std::string::npos ? "" : trim(spec.substr(colon + 1));
  if (kind == "diag" && !arg.empty())
    return build_diagonal_covariance(parse_double_list(arg));
  if (kind == "file" && !arg.empty())
    return build_covariance(read_csv_matrix(arg));
  fail(ErrorCode::ConfigInvalid,
       "covariance '" + spec + "' is not diag:<list> or file:<path>");
}

DirectionLaw parse_direction_law(const std::string &spec, int dim) {
  const auto colon = spec.find(':');
  const std::string kind = trim(spec.substr(0, colon));
  const std::string arg =
      colon == std::string::npos ? "" : trim(spec.substr(colon + 1));

  DirectionLaw law = DirectionLaw::uniform(std::max(dim, 1));
  if (kind == "uniform" && arg.empty()) {
    law = DirectionLaw::uniform(dim);
  } else if (kind == "axes") {
    law = arg.empty() ? DirectionLaw::axes(dim)
                      : DirectionLaw::axes(parse_double_list(arg));
  } else if (kind == "rows" && !arg.empty()) {
    law = DirectionLaw::rows(read_csv_matrix(arg));
  } else if (kind == "support" && !arg.empty()) {
    const Matrix m = read_csv_matrix(arg);
    const bool weighted = m.cols() == dim + 1;
    if (!weighted && m.cols() != dim)
      fail(ErrorCode::ConfigInvalid,
           "support file needs " + std::to_string(dim) + " or " +
               std::to_string(dim + 1) + " columns");
    std::vector<Vector> vectors;
    std::vector<double> weights;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      vectors.push_back(m.row(i).head(dim).transpose());
      if (weighted)
        weights.push_back(m(i, dim));
    }
    bool symmetric = true;
    for (std::size_t i = 0; i < vectors.size() && symmetric; ++i) {
      const Vector u = vectors[i].normalized();
      bool found = false;
      for (std::size_t j = 0; j < vectors.size() && !found; ++j)
        found = (vectors[j].normalized() + u).norm() <= 1e-12 &&
                (!weighted || weights[i] == weights[j]);
      symmetric = found;
    }
    law = DirectionLaw::support(std::move(vectors), std::move(weights),
                                symmetric);
  } else {
    fail(ErrorCode::ConfigInvalid, "direction law '" + spec + "' not recognised");
  }
  if (law.dim() != dim)
    fail(ErrorCode::DimensionMismatch,
         "direction law has dimension " + std::to_string(law.dim()) +
             ", expected " + std::to_string(dim));
  return law;
}

} // namespace hitrun
