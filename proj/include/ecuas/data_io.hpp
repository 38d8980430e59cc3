#pragma once

// CSV and JSON readers/writers for datasets, reports and result tables.
// Numbers are parsed and printed with std::from_chars / std::to_chars, so
// files are locale-independent and doubles round-trip bit-exactly.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecuas/costs.hpp"
#include "ecuas/diagnostics.hpp"
#include "ecuas/distribution.hpp"
#include "ecuas/error.hpp"
#include "ecuas/summation.hpp"

namespace ecuas {

enum class RecordKind { FullPosterior, ConfidenceOnly };

struct Dataset {
  RecordKind kind = RecordKind::FullPosterior;
  std::vector<UARecord> records;
  std::size_t classes = 0;       // 0 for confidence-only data
  std::vector<std::string> ids;  // confidence-only data only
  std::string source;

  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> out;
    for (const auto& r : records) out.push_back(std::get<FullPosteriorRecord>(r).label);
    return out;
  }

  std::vector<CategoricalDistribution> posteriors() const {
    std::vector<CategoricalDistribution> out;
    for (const auto& r : records) out.push_back(std::get<FullPosteriorRecord>(r).q);
    return out;
  }
};

enum class Format { Csv, Json };

inline Format parse_format(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw ValidationError("unknown format '" + std::string(name) + "' (expected csv or json)");
}

/// Named metrics plus the configuration and counters that produced them.
struct EvaluationReport {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, double>> metrics;
  DiagnosticCounts diagnostics;

  double metric(std::string_view name) const {
    for (const auto& [k, v] : metrics) {
      if (k == name) return v;
    }
    throw ValidationError("report has no metric '" + std::string(name) + "'");
  }

  bool has_metric(std::string_view name) const {
    for (const auto& [k, v] : metrics) {
      if (k == name) return true;
    }
    return false;
  }
};

/// Column-named numeric table (cost curves, sweeps, experiment grids).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> config;
};

// --- number formatting ------------------------------------------------------

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ValidationError(where + ": '" + std::string(s) + "' is not a number");
  }
  return v;
}

inline std::size_t parse_index(std::string_view s, const std::string& where) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ValidationError(where + ": '" + std::string(s) + "' is not a non-negative integer");
  }
  return v;
}

// --- CSV plumbing -------------------------------------------------------------

namespace detail {

// Splits one CSV line; fields may be double-quoted with "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string csv_field(std::string_view v) {
  if (v.find_first_of(",\"\n") == std::string_view::npos) return std::string(v);
  std::string out = "\"";
  for (char ch : v) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ValidationError("'" + path.string() + "' is empty (no header)");
  return lines;
}

inline std::string row_context(const std::filesystem::path& path, std::size_t line_no) {
  return path.filename().string() + " line " + std::to_string(line_no);
}

}  // namespace detail

/// Writes to `path` via a temporary file and a rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ValidationError("failed writing '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ValidationError("cannot move output into place at '" + path.string() + "'");
  }
}

// --- datasets -----------------------------------------------------------------

/// Largest |sum - 1| that a posterior row may have and still be renormalized.
inline constexpr double kRenormalizeTolerance = 1e-6;

/// Reads `label,q_0,...,q_{K-1}`, one sample per row.
inline Dataset read_posterior_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  const auto header = detail::split_csv_line(lines.front());
  if (header.size() < 3 || header.front() != "label") {
    throw ValidationError(path.string() + ": header must be label,q_0,...,q_{K-1} with K >= 2");
  }
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k] != "q_" + std::to_string(k - 1)) {
      throw ValidationError(path.string() + ": header column " + std::to_string(k) + " should be q_" +
                            std::to_string(k - 1) + ", found '" + header[k] + "'");
    }
  }
  const std::size_t k = header.size() - 1;

  Dataset ds;
  ds.kind = RecordKind::FullPosterior;
  ds.classes = k;
  ds.source = path.string();
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto where = detail::row_context(path, li + 1);
    const auto cells = detail::split_csv_line(lines[li]);
    if (cells.size() != k + 1) {
      throw ValidationError(where + ": expected " + std::to_string(k + 1) + " cells, found " +
                            std::to_string(cells.size()));
    }
    const std::size_t label = parse_index(cells[0], where);
    if (label >= k) throw ValidationError(where + ": label " + std::to_string(label) + " out of range");
    std::vector<double> q(k);
    for (std::size_t c = 0; c < k; ++c) {
      q[c] = parse_double(cells[c + 1], where);
      if (!std::isfinite(q[c]) || q[c] < 0.0) throw ValidationError(where + ": probabilities must be >= 0");
    }
    const double total = compensated_sum(q);
    // The slack keeps a written 0.999999 inside the tolerance despite rounding.
    if (std::fabs(total - 1.0) > kRenormalizeTolerance + 1e-12) {
      throw ValidationError(where + ": probabilities sum to " + format_double(total));
    }
    if (std::fabs(total - 1.0) > CategoricalDistribution::kSumTolerance) {
      for (double& x : q) x /= total;
    }
    ds.records.emplace_back(FullPosteriorRecord{label, CategoricalDistribution(std::move(q))});
  }
  return ds;
}

/// Reads `id,correct,confidence`, correct in {0, 1}, confidence in [0, 1].
inline Dataset read_generative_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  if (lines.front() != "id,correct,confidence") {
    throw ValidationError(path.string() + ": header must be id,correct,confidence");
  }
  Dataset ds;
  ds.kind = RecordKind::ConfidenceOnly;
  ds.source = path.string();
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto where = detail::row_context(path, li + 1);
    const auto cells = detail::split_csv_line(lines[li]);
    if (cells.size() != 3) throw ValidationError(where + ": expected 3 cells");
    if (cells[1] != "0" && cells[1] != "1") throw ValidationError(where + ": correct must be 0 or 1");
    const double conf = parse_double(cells[2], where);
    if (!(conf >= 0.0 && conf <= 1.0)) throw ValidationError(where + ": confidence outside [0, 1]");
    ds.ids.push_back(cells[0]);
    ds.records.emplace_back(ConfidenceRecord{cells[1] == "1", conf});
  }
  return ds;
}

inline std::string posterior_csv(const Dataset& ds) {
  std::string out = "label";
  for (std::size_t k = 0; k < ds.classes; ++k) out += ",q_" + std::to_string(k);
  out += '\n';
  for (const auto& r : ds.records) {
    const auto& full = std::get<FullPosteriorRecord>(r);
    out += std::to_string(full.label);
    for (double p : full.q.probs()) out += ',' + format_double(p);
    out += '\n';
  }
  return out;
}

inline std::string generative_csv(const Dataset& ds) {
  std::string out = "id,correct,confidence\n";
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& conf = std::get<ConfidenceRecord>(ds.records[i]);
    const std::string id = i < ds.ids.size() ? ds.ids[i] : std::to_string(i);
    out += detail::csv_field(id) + ',' + (conf.correct ? "1" : "0") + ',' + format_double(conf.confidence) + '\n';
  }
  return out;
}

inline void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, ds.kind == RecordKind::FullPosterior ? posterior_csv(ds) : generative_csv(ds));
}

// --- reports ------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json number_json(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline nlohmann::ordered_json report_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.config) j["config"][k] = v;
  j["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.metrics) j["metrics"][k] = number_json(v);
  j["diagnostics"] = {{"u_above_max", report.diagnostics.u_above_max},
                      {"confidence_upper_clamps", report.diagnostics.confidence_upper_clamps},
                      {"uncertainty_floor_clamps", report.diagnostics.uncertainty_floor_clamps}};
  return j;
}

}  // namespace detail

inline std::string render_report(const EvaluationReport& report, Format format) {
  if (format == Format::Json) return detail::report_json(report).dump(2) + '\n';
  std::string out = "section,key,value\n";
  for (const auto& [k, v] : report.config) {
    out += "config," + detail::csv_field(k) + ',' + detail::csv_field(v) + '\n';
  }
  for (const auto& [k, v] : report.metrics) {
    out += "metric," + detail::csv_field(k) + ',' + format_double(v) + '\n';
  }
  out += "diagnostic,u_above_max," + std::to_string(report.diagnostics.u_above_max) + '\n';
  out += "diagnostic,confidence_upper_clamps," + std::to_string(report.diagnostics.confidence_upper_clamps) + '\n';
  out += "diagnostic,uncertainty_floor_clamps," + std::to_string(report.diagnostics.uncertainty_floor_clamps) +
         '\n';
  return out;
}

inline void write_report(const EvaluationReport& report, const std::filesystem::path& path, Format format) {
  write_file_atomic(path, render_report(report, format));
}

inline EvaluationReport read_report(const std::filesystem::path& path, Format format) {
  EvaluationReport report;
  if (format == Format::Json) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    const auto j = nlohmann::ordered_json::parse(in);
    for (const auto& [k, v] : j.at("config").items()) report.config.emplace_back(k, v.get<std::string>());
    for (const auto& [k, v] : j.at("metrics").items()) {
      report.metrics.emplace_back(k, v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    }
    const auto& d = j.at("diagnostics");
    report.diagnostics.u_above_max = d.at("u_above_max").get<std::uint64_t>();
    report.diagnostics.confidence_upper_clamps = d.at("confidence_upper_clamps").get<std::uint64_t>();
    report.diagnostics.uncertainty_floor_clamps = d.at("uncertainty_floor_clamps").get<std::uint64_t>();
    return report;
  }
  const auto lines = detail::read_lines(path);
  if (lines.front() != "section,key,value") throw ValidationError(path.string() + ": not a report file");
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto where = detail::row_context(path, li + 1);
    const auto cells = detail::split_csv_line(lines[li]);
    if (cells.size() != 3) throw ValidationError(where + ": expected 3 cells");
    if (cells[0] == "config") {
      report.config.emplace_back(cells[1], cells[2]);
    } else if (cells[0] == "metric") {
      report.metrics.emplace_back(cells[1], parse_double(cells[2], where));
    } else if (cells[0] == "diagnostic") {
      const auto v = static_cast<std::uint64_t>(parse_index(cells[2], where));
      if (cells[1] == "u_above_max") report.diagnostics.u_above_max = v;
      if (cells[1] == "confidence_upper_clamps") report.diagnostics.confidence_upper_clamps = v;
      if (cells[1] == "uncertainty_floor_clamps") report.diagnostics.uncertainty_floor_clamps = v;
    } else {
      throw ValidationError(where + ": unknown section '" + cells[0] + "'");
    }
  }
  return report;
}

// --- tables -------------------------------------------------------------------

inline std::string render_table(const Table& table, Format format) {
  if (format == Format::Json) {
    nlohmann::ordered_json j;
    j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : table.config) j["config"][k] = v;
    j["columns"] = table.columns;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      auto r = nlohmann::ordered_json::array();
      for (double v : row) r.push_back(detail::number_json(v));
      j["rows"].push_back(std::move(r));
    }
    return j.dump(2) + '\n';
  }
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += detail::csv_field(table.columns[c]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

inline void write_table(const Table& table, const std::filesystem::path& path, Format format) {
  write_file_atomic(path, render_table(table, format));
}

/// Reads a CSV table written by write_table.
inline Table read_table_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  Table t;
  t.columns = detail::split_csv_line(lines.front());
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto where = detail::row_context(path, li + 1);
    const auto cells = detail::split_csv_line(lines[li]);
    if (cells.size() != t.columns.size()) throw ValidationError(where + ": wrong number of cells");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, where));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace ecuas
