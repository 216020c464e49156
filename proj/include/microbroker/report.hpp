#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "microbroker/common.hpp"
#include "microbroker/timeseries.hpp"

namespace microbroker {

// Aggregation over runs.csv files written by `simulate` and `evaluate`.
struct RunTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ParseError("runs table has no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }
};

inline const std::vector<std::string>& key_columns() {
  static const std::vector<std::string> k = {"run", "seed", "policy", "scenario", "plan", "weather"};
  return k;
}

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(cell);
  return out;
}
}  // namespace detail

// Reads every runs.csv below `dir` (sorted by path). Columns are unioned;
// cells missing from a file stay empty.
inline RunTable read_runs(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ParseError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "runs.csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ParseError("no runs.csv found under '" + dir.string() + "'");

  RunTable table;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(f.string() + ": empty file");
    const auto header = detail::split_csv_line(line);
    for (const auto& k : key_columns()) {
      if (std::find(header.begin(), header.end(), k) == header.end()) {
        throw ParseError(f.string() + ": missing column '" + k + "'");
      }
    }
    std::vector<std::size_t> map;
    for (const auto& h : header) {
      auto it = std::find(table.columns.begin(), table.columns.end(), h);
      if (it == table.columns.end()) {
        table.columns.push_back(h);
        for (auto& r : table.rows) r.emplace_back();
        it = table.columns.end() - 1;
      }
      map.push_back(static_cast<std::size_t>(it - table.columns.begin()));
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::trim(line).empty()) continue;
      const auto cells = detail::split_csv_line(line);
      if (cells.size() != header.size()) {
        throw ParseError(f.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                         " cells");
      }
      std::vector<std::string> row(table.columns.size());
      for (std::size_t i = 0; i < cells.size(); ++i) row[map[i]] = cells[i];
      table.rows.push_back(std::move(row));
    }
  }
  if (table.rows.empty()) throw ParseError("run files under '" + dir.string() + "' contain no rows");
  return table;
}

struct MetricSummary {
  std::size_t n = 0;
  double min = 0.0, median = 0.0, max = 0.0;
};

inline MetricSummary summarize_values(std::vector<double> v) {
  MetricSummary s;
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  s.n = v.size();
  if (v.empty()) {
    s.min = s.median = s.max = std::nan("");
    return s;
  }
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  s.median = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  return s;
}

inline std::vector<std::string> metric_columns(const RunTable& t) {
  std::vector<std::string> out;
  for (const auto& c : t.columns)
    if (std::find(key_columns().begin(), key_columns().end(), c) == key_columns().end()) out.push_back(c);
  return out;
}

// Groups rows by the given key columns and summarizes every metric column.
inline std::string grouped_summary_csv(const RunTable& t, const std::vector<std::string>& keys) {
  std::vector<std::size_t> key_idx;
  for (const auto& k : keys) key_idx.push_back(t.column(k));
  std::map<std::vector<std::string>, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<std::string> key;
    for (auto i : key_idx) key.push_back(t.rows[r][i]);
    groups[key].push_back(r);
  }
  std::string s;
  for (const auto& k : keys) s += k + ',';
  s += "metric,n,min,median,max\n";
  auto cell = [](double v) { return std::isnan(v) ? std::string("nan") : format_double(v); };
  for (const auto& [key, rows] : groups) {
    for (const auto& m : metric_columns(t)) {
      const auto col = t.column(m);
      std::vector<double> vals;
      for (auto r : rows) {
        double v = std::nan("");
        const auto& text = t.rows[r][col];
        if (!text.empty() && text != "nan" && !detail::parse_real(text, v)) {
          throw ParseError("non-numeric value '" + text + "' in column '" + m + "'");
        }
        vals.push_back(v);
      }
      const auto sum = summarize_values(vals);
      for (const auto& k : key) s += k + ',';
      s += m + ',' + std::to_string(sum.n) + ',' + cell(sum.min) + ',' + cell(sum.median) + ',' + cell(sum.max) + '\n';
    }
  }
  return s;
}

}  // namespace microbroker
