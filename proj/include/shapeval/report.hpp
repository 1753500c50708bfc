#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "shapeval/error.hpp"
#include "shapeval/tensor_io.hpp"
#include "shapeval/text_parse.hpp"

namespace shapeval {

inline constexpr std::string_view kMeanScope = "Mean";
inline constexpr std::string_view kAllScope = "All";
inline constexpr std::string_view kToolVersion = "shapeval 1.0.0";

struct ReportRow {
  std::string scope;  // class label, "Mean" or "All"
  std::string metric;
  double value = 0;
  std::int64_t count = 0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct MetricReport {
  std::vector<ReportRow> rows;
  nlohmann::json metadata = nlohmann::json::object();

  /// Throws InvalidArgument unless every metric has exactly one Mean row,
  /// at most one All row, and only finite values.
  void validate() const {
    std::map<std::string, std::pair<int, int>> per_metric;
    for (const auto& r : rows) {
      if (!std::isfinite(r.value)) {
        fail(ErrorCode::NonFinite, "metric " + r.metric + " (" + r.scope + ") is not finite");
      }
      auto& [means, alls] = per_metric[r.metric];
      if (r.scope == kMeanScope) ++means;
      if (r.scope == kAllScope) ++alls;
    }
    for (const auto& [metric, c] : per_metric) {
      if (c.first != 1) fail(ErrorCode::InvalidArgument, "metric " + metric + " needs exactly one Mean row");
      if (c.second > 1) fail(ErrorCode::InvalidArgument, "metric " + metric + " has several All rows");
    }
  }
};

enum class ReportFormat { Json, Csv };

/// 17 significant digits: enough to round-trip any double.
inline std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Appends one "Mean" row per metric: the unweighted mean over class rows,
/// in first-appearance order. Existing All rows are kept after it.
inline std::vector<ReportRow> with_class_means(const std::vector<ReportRow>& rows) {
  std::vector<std::string> metrics;
  std::map<std::string, std::vector<ReportRow>> classes, alls;
  for (const auto& r : rows) {
    if (r.scope == kMeanScope) continue;
    if (!classes.contains(r.metric) && !alls.contains(r.metric)) metrics.push_back(r.metric);
    (r.scope == kAllScope ? alls : classes)[r.metric].push_back(r);
  }
  std::vector<ReportRow> out;
  for (const auto& m : metrics) {
    const auto& cls = classes[m];
    if (cls.empty()) fail(ErrorCode::InvalidArgument, "metric " + m + " has no class rows");
    double sum = 0;
    for (const auto& r : cls) {
      out.push_back(r);
      sum += r.value;
    }
    out.push_back({std::string(kMeanScope), m, sum / static_cast<double>(cls.size()),
                   static_cast<std::int64_t>(cls.size())});
    for (const auto& r : alls[m]) out.push_back(r);
  }
  return out;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_split(std::string_view line, std::size_t lineno) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": unterminated quote");
  return fields;
}

}  // namespace detail

inline std::string render_report(const MetricReport& r, ReportFormat format) {
  r.validate();
  std::string out;
  if (format == ReportFormat::Csv) {
    out = "scope,metric,value,count\n";
    for (const auto& row : r.rows) {
      out += detail::csv_field(row.scope) + "," + detail::csv_field(row.metric) + "," +
             format_value(row.value) + "," + std::to_string(row.count) + "\n";
    }
    return out;
  }
  // Rows are written by hand so values carry exactly 17 significant digits.
  out = "{\n  \"metadata\": " + r.metadata.dump() + ",\n  \"rows\": [";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    out += i ? ",\n    " : "\n    ";
    out += "{\"scope\": " + nlohmann::json(row.scope).dump() +
           ", \"metric\": " + nlohmann::json(row.metric).dump() +
           ", \"value\": " + format_value(row.value) + ", \"count\": " + std::to_string(row.count) + "}";
  }
  out += r.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

inline void write_report(const MetricReport& r, const std::filesystem::path& path, ReportFormat format) {
  write_file_bytes(path, render_report(r, format));
}

inline MetricReport parse_report(std::string_view text, ReportFormat format) {
  MetricReport r;
  if (format == ReportFormat::Csv) {
    const auto all = text::lines(text);
    if (all.empty() || detail::csv_split(all[0], 1) !=
                           std::vector<std::string>{"scope", "metric", "value", "count"}) {
      fail(ErrorCode::ParseError, "line 1: expected header scope,metric,value,count");
    }
    for (std::size_t li = 1; li < all.size(); ++li) {
      if (all[li].find_first_not_of(" \t\r") == std::string_view::npos) continue;
      const auto f = detail::csv_split(all[li], li + 1);
      const auto value = f.size() == 4 ? text::parse_double(f[2]) : std::nullopt;
      const auto count = f.size() == 4 ? text::parse_int<std::int64_t>(f[3]) : std::nullopt;
      if (!value || !count) fail(ErrorCode::ParseError, "line " + std::to_string(li + 1) + ": bad report row");
      r.rows.push_back({f[0], f[1], *value, *count});
    }
    return r;
  }
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.contains("metadata")) r.metadata = doc["metadata"];
    for (const auto& row : doc.at("rows")) {
      r.rows.push_back({row.at("scope").get<std::string>(), row.at("metric").get<std::string>(),
                        row.at("value").get<double>(), row.at("count").get<std::int64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("report JSON: ") + e.what());
  }
  return r;
}

inline MetricReport read_report(const std::filesystem::path& path, ReportFormat format) {
  return parse_report(read_file_bytes(path), format);
}

}  // namespace shapeval
