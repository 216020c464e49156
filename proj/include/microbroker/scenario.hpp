#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "microbroker/broker.hpp"
#include "microbroker/common.hpp"
#include "microbroker/contracts.hpp"
#include "microbroker/loads.hpp"
#include "microbroker/supply.hpp"
#include "microbroker/timeseries.hpp"

namespace microbroker {

// Half-open [start, end) band over the day carrying a value.
struct DayBand {
  Seconds start = 0;
  Seconds end = kSecondsPerDay;
  double value = 0.0;
  bool operator==(const DayBand&) const = default;
};

// Bands must partition [0, 86400) in order.
struct DaySchedule {
  std::vector<DayBand> bands;

  double at(Seconds t) const {
    for (const auto& b : bands)
      if (t >= b.start && t < b.end) return b.value;
    throw std::out_of_range("second of day " + std::to_string(t) + " outside schedule");
  }
  bool operator==(const DaySchedule&) const = default;
};

struct TariffSchedule : DaySchedule {};  // EUR/kWh
struct GridPlan : DaySchedule {};        // watts

inline void validate_partition(const DaySchedule& s, const std::string& field) {
  if (s.bands.empty()) throw ValidationError(field, "needs at least one band");
  Seconds cursor = 0;
  for (std::size_t i = 0; i < s.bands.size(); ++i) {
    const auto& b = s.bands[i];
    const std::string f = field + "[" + std::to_string(i) + "]";
    if (b.start != cursor) {
      throw ValidationError(f, b.start < cursor ? "overlaps the previous band" : "leaves a gap before it");
    }
    if (b.end <= b.start) throw ValidationError(f, "end must be after start");
    if (b.end > kSecondsPerDay) throw ValidationError(f, "ends after 86400");
    if (!(b.value >= 0.0) || !std::isfinite(b.value)) throw ValidationError(f, "value must be finite and >= 0");
    cursor = b.end;
  }
  if (cursor != kSecondsPerDay) throw ValidationError(field, "does not cover the day up to 86400");
}

inline EurPerKwh tariff_at(const TariffSchedule& schedule, Seconds t) { return schedule.at(t); }
inline Watts grid_power_at(const GridPlan& plan, Seconds t) { return plan.at(t); }

namespace presets {

inline TariffSchedule italian_get() { return {{{{0, 21600, 0.15}, {21600, 75600, 0.29}, {75600, 86400, 0.15}}}}; }
inline TariffSchedule italian_fit() { return {{{{0, 21600, 0.02}, {21600, 75600, 0.04}, {75600, 86400, 0.02}}}}; }

// Plan0 island, Plan1 1.5 kW, Plan2 3 kW from 06:00 to 18:00 and 1 kW
// otherwise, Plan3 3 kW, Plan4 6 kW.
inline GridPlan plan(int index) {
  switch (index) {
    case 0: return {{{{0, kSecondsPerDay, 0.0}}}};
    case 1: return {{{{0, kSecondsPerDay, 1500.0}}}};
    case 2: return {{{{0, 21600, 1000.0}, {21600, 64800, 3000.0}, {64800, kSecondsPerDay, 1000.0}}}};
    case 3: return {{{{0, kSecondsPerDay, 3000.0}}}};
    case 4: return {{{{0, kSecondsPerDay, 6000.0}}}};
    default: throw ValidationError("grid_plan", "unknown preset plan" + std::to_string(index));
  }
}

}  // namespace presets

struct ScenarioConfig {
  std::string name = "scenario";
  TariffSchedule get = presets::italian_get();
  TariffSchedule fit = presets::italian_fit();
  GridPlan plan = presets::plan(2);
  std::string plan_name = "plan2";
  SlaCatalog catalog;
  std::vector<ApplianceSpec> appliances;
  PvParams pv;
  WeatherSource weather = ClearSky::winter();
  EpochSeconds sim_start = 1420070400;  // 2015-01-01T00:00:00Z
  Seconds sim_length = kSecondsPerDay;
  Seconds time_step = 1;
  std::uint64_t seed = 1;
  MarketParams market;

  bool operator==(const ScenarioConfig&) const = default;

  std::string weather_name() const {
    if (const auto* c = std::get_if<ClearSky>(&weather)) {
      if (*c == ClearSky::winter()) return "ideal-winter";
      if (*c == ClearSky::summer()) return "ideal-summer";
      return "ideal";
    }
    return "measured";
  }
};

inline void validate(const ScenarioConfig& cfg) {
  validate_partition(cfg.get, "tariffs.get");
  validate_partition(cfg.fit, "tariffs.fit");
  validate_partition(cfg.plan, "grid_plan");
  validate(cfg.catalog);
  validate(cfg.pv);
  if (const auto* c = std::get_if<ClearSky>(&cfg.weather)) {
    if (c->day_length <= 0 || c->day_length > kSecondsPerDay) {
      throw ValidationError("weather.day_length", "must lie in (0, 86400]");
    }
    if (c->sunrise < 0 || c->sunrise >= kSecondsPerDay) throw ValidationError("weather.sunrise", "must lie in [0, 86400)");
  } else {
    validate(std::get<Measured>(cfg.weather).series, "weather.samples");
  }
  for (std::size_t i = 0; i < cfg.appliances.size(); ++i) {
    validate(cfg.appliances[i], "appliances[" + std::to_string(i) + "]");
  }
  if (cfg.sim_length < 1) throw ValidationError("sim.length", "must be >= 1 second");
  if (cfg.time_step < 1) throw ValidationError("sim.time_step", "must be >= 1 second");
  const auto& m = cfg.market;
  if (!(m.reference_increment >= 0.0)) throw ValidationError("market.reference_increment", "must be >= 0");
  if (!(m.p_cap > 0.0)) throw ValidationError("market.p_cap", "must be > 0");
  if (!(m.p_scale > 0.0)) throw ValidationError("market.p_scale", "must be > 0");
  if (!(m.power_scale > 0.0)) throw ValidationError("market.power_scale", "must be > 0");
  if (!(m.reimbursement_penalty >= 0.0)) throw ValidationError("market.reimbursement_penalty", "must be >= 0");
}

namespace detail {

using json = nlohmann::ordered_json;

inline const json& require(const json& j, const char* key, const std::string& field) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(field + "." + key, "missing");
  return j.at(key);
}

inline double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ValidationError(field, "expected a number");
  return j.get<double>();
}

inline std::int64_t as_int(const json& j, const std::string& field) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v == std::floor(v)) return static_cast<std::int64_t>(v);
  }
  throw ValidationError(field, "expected an integer");
}

inline std::string as_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ValidationError(field, "expected a string");
  return j.get<std::string>();
}

template <class T>
T number_or(const json& j, const char* key, T fallback, const std::string& field) {
  if (!j.contains(key)) return fallback;
  if constexpr (std::is_integral_v<T>) {
    return static_cast<T>(as_int(j.at(key), field + "." + key));
  } else {
    return static_cast<T>(as_number(j.at(key), field + "." + key));
  }
}

inline DaySchedule parse_bands(const json& j, const char* value_key, const std::string& field) {
  if (!j.is_array()) throw ValidationError(field, "expected a list of bands");
  DaySchedule s;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    const auto& b = j[i];
    s.bands.push_back({as_int(require(b, "start", f), f + ".start"), as_int(require(b, "end", f), f + ".end"),
                       as_number(require(b, value_key, f), f + "." + value_key)});
  }
  return s;
}

inline json bands_json(const DaySchedule& s, const char* value_key) {
  json out = json::array();
  for (const auto& b : s.bands) out.push_back({{"start", b.start}, {"end", b.end}, {value_key, b.value}});
  return out;
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline ApplianceSpec parse_appliance(const json& j, const std::string& field, const std::filesystem::path& base,
                                     EpochSeconds sim_start, Seconds sim_length) {
  ApplianceSpec a;
  a.name = as_string(require(j, "name", field), field + ".name");
  const auto& psi = require(j, "psi", field);
  if (psi.is_string()) {
    if (psi.get<std::string>() != "inflexible") throw ValidationError(field + ".psi", "expected a number or \"inflexible\"");
    a.psi = kInf;
  } else {
    a.psi = as_number(psi, field + ".psi");
  }
  const auto& states = require(j, "states", field);
  if (!states.is_array()) throw ValidationError(field + ".states", "expected a list");
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string f = field + ".states[" + std::to_string(i) + "]";
    const auto& s = states[i];
    OperationState st;
    st.power = as_number(require(s, "power", f), f + ".power");
    st.duration = as_int(require(s, "duration", f), f + ".duration");
    st.start_delay_max = number_or<Seconds>(s, "start_delay_max", 0, f);
    st.interruption_severity = number_or<double>(s, "interruption_severity", 0.0, f);
    a.states.push_back(st);
  }
  const auto& usage = require(j, "usage", field);
  const std::string uf = field + ".usage";
  const auto type = as_string(require(usage, "type", uf), uf + ".type");
  if (type == "probabilistic") {
    Probabilistic p;
    p.omega_star = as_number(require(usage, "omega_star", uf), uf + ".omega_star");
    p.decay = number_or<double>(usage, "decay", 1.0, uf);
    p.recovery = number_or<Seconds>(usage, "recovery", 0, uf);
    p.starts_per_day = number_or<double>(usage, "starts_per_day", 1.0, uf);
    a.usage = p;
  } else if (type == "trace") {
    EventTrace tr;
    if (usage.contains("events")) {
      for (const auto& e : usage.at("events")) tr.starts.push_back(as_int(e, uf + ".events"));
    }
    if (usage.contains("file")) {
      const auto path = resolve(base, as_string(usage.at("file"), uf + ".file"));
      const auto ev = parse_event_trace(path.string());
      tr.starts.insert(tr.starts.end(), ev.begin(), ev.end());
    }
    if (usage.contains("daily")) {
      // clock times repeated on every simulated day
      std::vector<Seconds> clock;
      for (const auto& c : usage.at("daily")) clock.push_back(parse_clock(as_string(c, uf + ".daily")));
      const EpochSeconds first_day = sim_start - second_of_day(sim_start);
      for (EpochSeconds day = first_day; day < sim_start + sim_length; day += kSecondsPerDay) {
        for (Seconds c : clock) {
          const EpochSeconds t = day + c;
          if (t >= sim_start && t < sim_start + sim_length) tr.starts.push_back(t);
        }
      }
    }
    std::sort(tr.starts.begin(), tr.starts.end());
    tr.starts.erase(std::unique(tr.starts.begin(), tr.starts.end()), tr.starts.end());
    a.usage = tr;
  } else {
    throw ValidationError(uf + ".type", "expected \"probabilistic\" or \"trace\"");
  }
  return a;
}

}  // namespace detail

// Scenario files are JSON documents; see docs/scenario-format.md. Relative
// paths inside are resolved against `base_dir`.
inline ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".") {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("scenario root must be an object");
  try {
    ScenarioConfig cfg;
    cfg.name = j.contains("name") ? detail::as_string(j.at("name"), "name") : "scenario";

    const auto& sim = detail::require(j, "sim", "");
    cfg.sim_start = parse_date(detail::as_string(detail::require(sim, "start_date", "sim"), "sim.start_date")) +
                    detail::number_or<Seconds>(sim, "start_second", 0, "sim");
    cfg.sim_length = detail::as_int(detail::require(sim, "length", "sim"), "sim.length");
    cfg.time_step = detail::number_or<Seconds>(sim, "time_step", 1, "sim");
    const auto& seed = detail::require(sim, "seed", "sim");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
      throw ValidationError("sim.seed", "expected a non-negative integer");
    }
    cfg.seed = seed.get<std::uint64_t>();

    const auto& tariffs = detail::require(j, "tariffs", "");
    if (tariffs.is_string()) {
      if (tariffs.get<std::string>() != "italian") throw ValidationError("tariffs", "unknown preset");
      cfg.get = presets::italian_get();
      cfg.fit = presets::italian_fit();
    } else {
      cfg.get = {detail::parse_bands(detail::require(tariffs, "get", "tariffs"), "price", "tariffs.get")};
      cfg.fit = {detail::parse_bands(detail::require(tariffs, "fit", "tariffs"), "price", "tariffs.fit")};
    }

    const auto& plan = detail::require(j, "grid_plan", "");
    if (plan.is_string()) {
      cfg.plan_name = plan.get<std::string>();
      if (cfg.plan_name.size() != 5 || cfg.plan_name.rfind("plan", 0) != 0 || cfg.plan_name[4] < '0' ||
          cfg.plan_name[4] > '4') {
        throw ValidationError("grid_plan", "unknown preset '" + cfg.plan_name + "' (plan0..plan4)");
      }
      cfg.plan = presets::plan(cfg.plan_name[4] - '0');
    } else {
      cfg.plan_name = j.contains("grid_plan_name") ? detail::as_string(j.at("grid_plan_name"), "grid_plan_name")
                                                   : "custom";
      cfg.plan = {detail::parse_bands(plan, "power", "grid_plan")};
    }

    if (j.contains("catalog")) {
      cfg.catalog.durations.clear();
      for (const auto& d : j.at("catalog")) cfg.catalog.durations.push_back(detail::as_int(d, "catalog"));
    }

    if (j.contains("pv")) {
      const auto& pv = j.at("pv");
      cfg.pv.peak_power = detail::number_or<double>(pv, "peak_power", cfg.pv.peak_power, "pv");
      cfg.pv.efficiency = detail::number_or<double>(pv, "efficiency", cfg.pv.efficiency, "pv");
    }

    const std::filesystem::path base = base_dir;
    if (j.contains("weather")) {
      const auto& w = j.at("weather");
      const auto type = detail::as_string(detail::require(w, "type", "weather"), "weather.type");
      if (type == "clearsky") {
        ClearSky c = ClearSky::winter();
        if (w.contains("season")) {
          const auto season = detail::as_string(w.at("season"), "weather.season");
          if (season == "winter") c = ClearSky::winter();
          else if (season == "summer") c = ClearSky::summer();
          else throw ValidationError("weather.season", "expected \"winter\" or \"summer\"");
        }
        c.day_length = detail::number_or<Seconds>(w, "day_length", c.day_length, "weather");
        c.sunrise = detail::number_or<Seconds>(w, "sunrise", c.sunrise, "weather");
        cfg.weather = c;
      } else if (type == "measured") {
        Measured m;
        const auto resolution = detail::number_or<Seconds>(w, "resolution", 900, "weather");
        if (w.contains("file")) {
          const auto path = detail::resolve(base, detail::as_string(w.at("file"), "weather.file"));
          const bool header = w.contains("header") && w.at("header").get<bool>();
          m.series = parse_timeseries(path.string(), resolution, header);
        } else {
          m.series.resolution = resolution;
          for (const auto& s : detail::require(w, "samples", "weather")) {
            if (!s.is_array() || s.size() != 2) throw ValidationError("weather.samples", "expected [t, value] pairs");
            m.series.samples.push_back({detail::as_int(s[0], "weather.samples"), detail::as_number(s[1], "weather.samples")});
          }
        }
        cfg.weather = m;
      } else {
        throw ValidationError("weather.type", "expected \"clearsky\" or \"measured\"");
      }
    }

    if (j.contains("market")) {
      const auto& m = j.at("market");
      auto& mk = cfg.market;
      mk.reference_increment = detail::number_or<double>(m, "reference_increment", mk.reference_increment, "market");
      mk.p_cap = detail::number_or<double>(m, "p_cap", mk.p_cap, "market");
      mk.p_scale = detail::number_or<double>(m, "p_scale", mk.p_scale, "market");
      mk.power_scale = detail::number_or<double>(m, "power_scale", mk.power_scale, "market");
      mk.reimbursement_penalty =
          detail::number_or<double>(m, "reimbursement_penalty", mk.reimbursement_penalty, "market");
    }

    const auto& apps = detail::require(j, "appliances", "");
    if (!apps.is_array()) throw ValidationError("appliances", "expected a list");
    for (std::size_t i = 0; i < apps.size(); ++i) {
      cfg.appliances.push_back(detail::parse_appliance(apps[i], "appliances[" + std::to_string(i) + "]", base,
                                                       cfg.sim_start, cfg.sim_length));
    }
    validate(cfg);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), std::filesystem::path(path).parent_path());
}

// Canonical self-contained form: every band, event and sample is written out,
// so the result reparses to an identical config without external files.
inline std::string serialize_scenario(const ScenarioConfig& cfg) {
  using detail::json;
  json j;
  j["name"] = cfg.name;
  j["sim"] = {{"start_date", format_date(cfg.sim_start)},
              {"start_second", second_of_day(cfg.sim_start)},
              {"length", cfg.sim_length},
              {"time_step", cfg.time_step},
              {"seed", cfg.seed}};
  j["tariffs"] = {{"get", detail::bands_json(cfg.get, "price")}, {"fit", detail::bands_json(cfg.fit, "price")}};
  j["grid_plan"] = detail::bands_json(cfg.plan, "power");
  j["grid_plan_name"] = cfg.plan_name;
  j["catalog"] = cfg.catalog.durations;
  j["pv"] = {{"peak_power", cfg.pv.peak_power}, {"efficiency", cfg.pv.efficiency}};
  if (const auto* c = std::get_if<ClearSky>(&cfg.weather)) {
    j["weather"] = {{"type", "clearsky"}, {"day_length", c->day_length}, {"sunrise", c->sunrise}};
  } else {
    const auto& m = std::get<Measured>(cfg.weather);
    json samples = json::array();
    for (const auto& s : m.series.samples) samples.push_back({s.t, s.value});
    j["weather"] = {{"type", "measured"}, {"resolution", m.series.resolution}, {"samples", samples}};
  }
  j["market"] = {{"reference_increment", cfg.market.reference_increment},
                 {"p_cap", cfg.market.p_cap},
                 {"p_scale", cfg.market.p_scale},
                 {"power_scale", cfg.market.power_scale},
                 {"reimbursement_penalty", cfg.market.reimbursement_penalty}};
  json apps = json::array();
  for (const auto& a : cfg.appliances) {
    json app;
    app["name"] = a.name;
    if (a.inflexible()) app["psi"] = "inflexible";
    else app["psi"] = a.psi;
    json states = json::array();
    for (const auto& s : a.states) {
      states.push_back({{"power", s.power},
                        {"duration", s.duration},
                        {"start_delay_max", s.start_delay_max},
                        {"interruption_severity", s.interruption_severity}});
    }
    app["states"] = states;
    if (const auto* p = std::get_if<Probabilistic>(&a.usage)) {
      app["usage"] = {{"type", "probabilistic"},
                      {"omega_star", p->omega_star},
                      {"decay", p->decay},
                      {"recovery", p->recovery},
                      {"starts_per_day", p->starts_per_day}};
    } else {
      app["usage"] = {{"type", "trace"}, {"events", std::get<EventTrace>(a.usage).starts}};
    }
    apps.push_back(app);
  }
  j["appliances"] = apps;
  return j.dump(2) + "\n";
}

inline std::string config_hash(const ScenarioConfig& cfg) { return hex64(fnv1a64(serialize_scenario(cfg))); }

}  // namespace microbroker
