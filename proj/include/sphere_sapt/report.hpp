// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file report.hpp
 * @brief CSV tables and JSON run summaries.
 *
 * CSV output follows RFC 4180: one header row, CRLF line endings, and fields
 * quoted only when they contain a comma, a quote, CR or LF. Numbers are
 * written in shortest round-trip form, so equal results give equal bytes.
 */

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <system_error>
#include <type_traits>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sphere_sapt/slope_fit.hpp"

namespace sphere_sapt {

using Json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to v; "nan", "inf", "-inf" otherwise.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// One field quoted per RFC 4180 when needed.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// A CSV table with a fixed header.
class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw std::invalid_argument("CSV header must not be empty");
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  void add_row(std::vector<std::string> row) {
    if (row.size() != header_.size())
      throw std::invalid_argument("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                                  std::to_string(header_.size()));
    rows_.push_back(std::move(row));
  }

  /// Appends a row of strings and numbers.
  template <typename... Fields>
  void add(const Fields&... fields) {
    add_row({cell(fields)...});
  }

  std::string str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& fields) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
      }
      out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  template <typename T>
  static std::string cell(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      return v ? "true" : "false";
    } else if constexpr (std::is_integral_v<T>) {
      return std::to_string(v);
    } else if constexpr (std::is_floating_point_v<T>) {
      return format_number(static_cast<double>(v));
    } else {
      return std::string(v);
    }
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// {slope, intercept, ci95, residual, n_points}.
inline Json to_json(const SlopeFit& f) {
  Json j;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["ci95"] = std::isfinite(f.ci95) ? Json(f.ci95) : Json(nullptr);
  j["residual"] = f.residual;
  j["n_points"] = f.n_points;
  return j;
}

/// {dims, values, fit} with a null fit when no slope was fitted.
inline Json to_json(const SweepTable& t) {
  Json j;
  j["dims"] = t.dims;
  j["values"] = t.values;
  j["fit"] = t.fit ? to_json(*t.fit) : Json(nullptr);
  return j;
}

/// The outcome of one pass/fail check.
struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string target;  ///< human-readable acceptance band
};

/// A check that value lies in [target − tol, target + tol].
inline CheckResult check_near(std::string name, double value, double target, double tol) {
  return {std::move(name), std::abs(value - target) <= tol, value,
          format_number(target) + " +/- " + format_number(tol)};
}

/// A check that value lies strictly below bound.
inline CheckResult check_below(std::string name, double value, double bound) {
  return {std::move(name), value < bound, value, "< " + format_number(bound)};
}

/// A check that value equals an exact target.
inline CheckResult check_equal(std::string name, double value, double target) {
  return {std::move(name), value == target, value, "== " + format_number(target)};
}

/// Tables, results and checks produced by one subcommand run.
struct RunReport {
  std::string subcommand;
  Json config = Json::object();
  std::optional<std::uint64_t> seed;  ///< unset when the run draws no random numbers
  double wall_time_seconds = 0.0;
  std::vector<CheckResult> checks;
  Json results = Json::object();
  std::deque<std::pair<std::string, CsvTable>> tables;  ///< references stay valid on append

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  CsvTable& table(const std::string& name, std::vector<std::string> header) {
    for (auto& [n, t] : tables)
      if (n == name) return t;
    tables.emplace_back(name, CsvTable(std::move(header)));
    return tables.back().second;
  }

  Json summary() const {
    Json j;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["seed"] = seed ? Json(*seed) : Json(nullptr);
    j["wall_time_seconds"] = wall_time_seconds;
    j["passed"] = passed();
    Json checks_json = Json::array();
    for (const auto& c : checks) {
      Json cj;
      cj["name"] = c.name;
      cj["passed"] = c.passed;
      cj["value"] = std::isfinite(c.value) ? Json(c.value) : Json(nullptr);
      cj["target"] = c.target;
      checks_json.push_back(cj);
    }
    j["checks"] = checks_json;
    j["results"] = results;
    Json files = Json::array();
    for (const auto& [name, t] : tables) files.push_back(subcommand + "_" + name + ".csv");
    j["tables"] = files;
    return j;
  }
};

/// Writes content to path, creating parent directories. Throws std::runtime_error on I/O failure.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

/**
 * @brief Writes <subcommand>_<table>.csv for every table and <subcommand>.json.
 *
 * Returns the written paths in output order.
 */
inline std::vector<std::filesystem::path> emit(const RunReport& report,
                                               const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (const auto& [name, t] : report.tables) {
    written.push_back(dir / (report.subcommand + "_" + name + ".csv"));
    write_file(written.back(), t.str());
  }
  written.push_back(dir / (report.subcommand + ".json"));
  write_file(written.back(), report.summary().dump(2) + "\n");
  return written;
}

}  // namespace sphere_sapt
