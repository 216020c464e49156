#pragma once

#include <numbers>
#include <variant>

#include "microbroker/common.hpp"
#include "microbroker/timeseries.hpp"

namespace microbroker {

struct PvParams {
  Watts peak_power = 3300.0;
  double efficiency = 1.0;
  bool operator==(const PvParams&) const = default;
};

// Sinusoidal irradiance over a fixed daylight window.
struct ClearSky {
  Seconds day_length = 8 * 3600;
  Seconds sunrise = 8 * 3600;  // second of day
  bool operator==(const ClearSky&) const = default;

  static ClearSky winter() { return {8 * 3600, 8 * 3600}; }
  static ClearSky summer() { return {16 * 3600, 5 * 3600}; }
};

// Pre-normalized intensity samples in [0,1].
struct Measured {
  TimeSeries series;
  bool operator==(const Measured&) const = default;
};

using WeatherSource = std::variant<ClearSky, Measured>;

inline void validate(const PvParams& pv) {
  if (!(pv.peak_power > 0.0) || !std::isfinite(pv.peak_power)) {
    throw ValidationError("pv.peak_power", "must be > 0");
  }
  if (!(pv.efficiency > 0.0 && pv.efficiency <= 1.0)) {
    throw ValidationError("pv.efficiency", "must lie in (0, 1]");
  }
}

// sin(pi * t / t_max) on [0, t_max], zero outside.
inline double clearsky_intensity(double since_sunrise, double day_length) {
  if (since_sunrise < 0.0 || since_sunrise > day_length) return 0.0;
  const double v = std::sin(std::numbers::pi * since_sunrise / day_length);
  return v < 0.0 ? 0.0 : v;  // sin(pi) is ~1e-16
}

inline Watts pv_power(double intensity, const PvParams& pv) {
  return intensity * pv.peak_power * pv.efficiency;
}

inline double clamp_unit(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

inline Watts supply_at(const WeatherSource& source, const PvParams& pv, EpochSeconds t) {
  const double intensity = std::visit(
      [t](const auto& w) -> double {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, ClearSky>) {
          const auto since = static_cast<double>(second_of_day(t) - w.sunrise);
          return clearsky_intensity(since, static_cast<double>(w.day_length));
        } else {
          return clamp_unit(w.series.hold_at(t).value_or(0.0));
        }
      },
      source);
  return pv_power(intensity, pv);
}

}  // namespace microbroker
