#pragma once

// CSV and JSON emission of ensemble tables, and a CSV reader for the fit tools.

#include <algorithm>
#include <array>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "mipt/errors.hpp"
#include "mipt/harness.hpp"

namespace mipt {

inline constexpr std::array<const char*, 14> kCsvColumns = {"model", "L",   "p",           "beta",  "gamma",
                                                            "chi",   "seed_base", "n_traj", "t",     "observable",
                                                            "cut",   "value",     "stderr", "n_samples"};

// One flat row of the result schema.
struct ResultRow {
  std::string model;
  std::size_t L = 0;
  double p = 0.0;
  std::optional<double> beta;
  std::optional<double> gamma;
  std::optional<std::size_t> chi;
  std::uint64_t seed_base = 0;
  std::size_t n_traj = 0;
  std::size_t t = 0;
  std::string observable;
  std::size_t cut = 0;
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t n_samples = 0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline std::vector<ResultRow> flatten(const EnsembleTable& table) {
  std::vector<ResultRow> out;
  out.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    ResultRow row;
    row.model = model_name(table.spec.model);
    row.L = table.spec.L;
    row.p = table.spec.p;
    row.beta = table.spec.beta;
    row.gamma = table.spec.gamma;
    if (table.chi > 0) row.chi = table.chi;
    row.seed_base = table.seed_base;
    row.n_traj = table.n_traj;
    row.t = r.t;
    row.observable = observable_name(r.observable);
    row.cut = r.cut;
    row.value = r.value;
    row.stderr_ = r.stderr_;
    row.n_samples = r.n_samples;
    out.push_back(std::move(row));
  }
  return out;
}

namespace io {

inline std::string num(double v) { return fmt::format("{:.17g}", v); }

template <class T>
std::string opt(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return num(*v);
  } else {
    return fmt::format("{}", *v);
  }
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

template <class T>
T parse_number(const std::string& s, std::size_t line, const char* column) {
  try {
    std::size_t used = 0;
    T v{};
    if constexpr (std::is_floating_point_v<T>) {
      v = std::stod(s, &used);
    } else {
      if (!s.empty() && s.front() == '-') throw std::invalid_argument(s);
      v = static_cast<T>(std::stoull(s, &used));
    }
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(fmt::format("line {}: column {} has bad value '{}'", line, column, s));
  }
}

}  // namespace io

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out;
  for (std::size_t k = 0; k < kCsvColumns.size(); ++k) {
    if (k) out.push_back(',');
    out += kCsvColumns[k];
  }
  out.push_back('\n');
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.model, r.L, io::num(r.p), io::opt(r.beta),
                       io::opt(r.gamma), io::opt(r.chi), r.seed_base, r.n_traj, r.t, r.observable, r.cut,
                       io::num(r.value), io::num(r.stderr_), r.n_samples);
  }
  return out;
}

inline nlohmann::json to_json_rows(const std::vector<ResultRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  auto optional_json = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  for (const auto& r : rows) {
    arr.push_back(nlohmann::json{{"model", r.model},
                                 {"L", r.L},
                                 {"p", r.p},
                                 {"beta", optional_json(r.beta)},
                                 {"gamma", optional_json(r.gamma)},
                                 {"chi", optional_json(r.chi)},
                                 {"seed_base", r.seed_base},
                                 {"n_traj", r.n_traj},
                                 {"t", r.t},
                                 {"observable", r.observable},
                                 {"cut", r.cut},
                                 {"value", r.value},
                                 {"stderr", r.stderr_},
                                 {"n_samples", r.n_samples}});
  }
  return arr;
}

inline std::vector<ResultRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = io::split(line);
  std::vector<std::string> missing;
  for (const char* c : kCsvColumns) {
    if (std::find(header.begin(), header.end(), c) == header.end()) missing.emplace_back(c);
  }
  if (!missing.empty()) throw IoError(fmt::format("CSV header lacks columns: {}", fmt::join(missing, ", ")));
  if (header.size() != kCsvColumns.size()) throw IoError("CSV header has unexpected columns");
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] != kCsvColumns[k]) throw IoError(fmt::format("CSV column {} is '{}', expected '{}'", k, header[k], kCsvColumns[k]));
  }
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = io::split(line);
    if (f.size() != kCsvColumns.size()) {
      throw IoError(fmt::format("line {}: {} fields, expected {}", lineno, f.size(), kCsvColumns.size()));
    }
    ResultRow r;
    r.model = f[0];
    r.L = io::parse_number<std::size_t>(f[1], lineno, "L");
    r.p = io::parse_number<double>(f[2], lineno, "p");
    if (!f[3].empty()) r.beta = io::parse_number<double>(f[3], lineno, "beta");
    if (!f[4].empty()) r.gamma = io::parse_number<double>(f[4], lineno, "gamma");
    if (!f[5].empty()) r.chi = io::parse_number<std::size_t>(f[5], lineno, "chi");
    r.seed_base = io::parse_number<std::uint64_t>(f[6], lineno, "seed_base");
    r.n_traj = io::parse_number<std::size_t>(f[7], lineno, "n_traj");
    r.t = io::parse_number<std::size_t>(f[8], lineno, "t");
    r.observable = f[9];
    r.cut = io::parse_number<std::size_t>(f[10], lineno, "cut");
    r.value = io::parse_number<double>(f[11], lineno, "value");
    r.stderr_ = io::parse_number<double>(f[12], lineno, "stderr");
    r.n_samples = io::parse_number<std::size_t>(f[13], lineno, "n_samples");
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<ResultRow> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  return parse_csv(in);
}

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_format(std::string_view s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ConfigError(fmt::format("unknown format '{}'", s));
}

inline void emit_results(const std::vector<ResultRow>& rows, const std::string& path, OutputFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path));
  if (format == OutputFormat::Csv) {
    out << to_csv(rows);
  } else {
    out << to_json_rows(rows).dump(2) << '\n';
  }
  out.flush();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path));
}

inline void emit_results(const EnsembleTable& table, const std::string& path, OutputFormat format) {
  emit_results(flatten(table), path, format);
}

}  // namespace mipt
