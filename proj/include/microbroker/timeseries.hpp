#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "microbroker/common.hpp"

namespace microbroker {

struct TimeSample {
  EpochSeconds t = 0;
  double value = 0.0;
  bool operator==(const TimeSample&) const = default;
};

struct TimeSeries {
  std::vector<TimeSample> samples;
  Seconds resolution = 1;

  bool empty() const noexcept { return samples.empty(); }

  // Zero-order hold. A sample covers [t_k, t_{k+1}); the last one covers one
  // resolution interval. Outside the covered span there is no value.
  std::optional<double> hold_at(EpochSeconds t) const {
    if (samples.empty() || t < samples.front().t) return std::nullopt;
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](EpochSeconds v, const TimeSample& s) { return v < s.t; });
    --it;
    if (std::next(it) == samples.end() && t >= it->t + resolution) return std::nullopt;
    return it->value;
  }

  bool operator==(const TimeSeries&) const = default;
};

inline void validate(const TimeSeries& ts, const std::string& field = "timeseries") {
  if (ts.resolution < 1) throw ValidationError(field + ".resolution", "must be >= 1 second");
  for (std::size_t i = 0; i < ts.samples.size(); ++i) {
    if (!std::isfinite(ts.samples[i].value)) {
      throw ValidationError(field, "non-finite value at row " + std::to_string(i + 1));
    }
    if (i > 0 && ts.samples[i].t <= ts.samples[i - 1].t) {
      throw ValidationError(field, "timestamps not strictly increasing at row " +
                                       std::to_string(i + 1));
    }
  }
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_int(std::string_view s, std::int64_t& out) {
  s = trim(s);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size() && !s.empty();
}

inline bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

}  // namespace detail

// Reads `epoch_second,value` rows. With `header`, the first line is skipped.
inline TimeSeries parse_timeseries_text(std::istream& in, Seconds resolution, bool header = false,
                                        const std::string& name = "<stream>") {
  TimeSeries ts;
  ts.resolution = resolution;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (header && row == 1) continue;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto comma = body.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError(name + ":" + std::to_string(row) + ": expected 'epoch_second,value'");
    }
    TimeSample s;
    if (!detail::parse_int(body.substr(0, comma), s.t)) {
      throw ParseError(name + ":" + std::to_string(row) + ": non-integer timestamp");
    }
    if (!detail::parse_real(body.substr(comma + 1), s.value)) {
      throw ParseError(name + ":" + std::to_string(row) + ": non-numeric value");
    }
    ts.samples.push_back(s);
  }
  validate(ts, name);
  return ts;
}

inline TimeSeries parse_timeseries(const std::string& path, Seconds resolution, bool header = false) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open timeseries file '" + path + "'");
  return parse_timeseries_text(in, resolution, header, path);
}

// One epoch second per line (event traces). Blank lines are ignored.
inline std::vector<EpochSeconds> parse_event_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open event trace '" + path + "'");
  std::vector<EpochSeconds> events;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    std::int64_t t = 0;
    // tolerate a trailing column, only the first one is read
    if (!detail::parse_int(body.substr(0, body.find(',')), t)) {
      throw ParseError(path + ":" + std::to_string(row) + ": non-integer event time");
    }
    events.push_back(t);
  }
  return events;
}

}  // namespace microbroker
