#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace microbroker {

using Seconds = std::int64_t;       // durations
using EpochSeconds = std::int64_t;  // UTC seconds since 1970-01-01
using Watts = double;
using EurPerKwh = double;
using Euro = double;

inline constexpr Seconds kSecondsPerDay = 86400;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Malformed input text (file cannot be read or does not follow the grammar).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a domain invariant. The message names the field.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Genome/topology mismatch.
class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest text that round-trips a double; used for every CSV writer so that
// identical runs produce identical bytes.
inline std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline Seconds second_of_day(EpochSeconds t) {
  Seconds s = t % kSecondsPerDay;
  return s < 0 ? s + kSecondsPerDay : s;
}

// 0-based day of the year (Jan 1 -> 0).
inline int day_of_year(EpochSeconds t) {
  using namespace std::chrono;
  const sys_days day = floor<days>(sys_seconds{seconds{t}});
  const year_month_day ymd{day};
  return static_cast<int>((day - sys_days{ymd.year() / January / 1}).count());
}

// Parses YYYY-MM-DD into the epoch second of its midnight (UTC).
inline EpochSeconds parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &extra) != 3) {
    throw ParseError("invalid date '" + text + "', expected YYYY-MM-DD");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw ParseError("invalid calendar date '" + text + "'");
  return sys_seconds{sys_days{ymd}}.time_since_epoch().count();
}

inline std::string format_date(EpochSeconds t) {
  using namespace std::chrono;
  const year_month_day ymd{floor<days>(sys_seconds{seconds{t}})};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

// "HH:MM" or "HH:MM:SS" -> second of day.
inline Seconds parse_clock(const std::string& text) {
  int h = 0, m = 0, s = 0;
  char extra = 0;
  const int n = std::sscanf(text.c_str(), "%d:%d:%d%c", &h, &m, &s, &extra);
  if ((n != 2 && n != 3) || h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 59) {
    throw ParseError("invalid clock time '" + text + "', expected HH:MM[:SS]");
  }
  return h * 3600 + m * 60 + s;
}

}  // namespace microbroker
