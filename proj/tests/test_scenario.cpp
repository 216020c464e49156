#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "microbroker/scenario.hpp"
#include "test_paths.hpp"

using namespace microbroker;
namespace fs = std::filesystem;

namespace {

std::string minimal_scenario(const std::string& appliances = "[]", const std::string& tariffs = "\"italian\"") {
  return R"({
    "sim": { "start_date": "2015-01-01", "length": 86400, "seed": 7 },
    "tariffs": )" + tariffs + R"(,
    "grid_plan": "plan2",
    "appliances": )" + appliances + "}";
}

fs::path temp_file(const std::string& name, const std::string& text) {
  auto p = fs::temp_directory_path() / ("microbroker_test_" + name);
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Scenario, ReferenceFileHasSixApplianceFleet) {
  const auto cfg = load_scenario(test_paths::reference_scenario());
  ASSERT_EQ(cfg.appliances.size(), 6u);
  EXPECT_EQ(cfg.plan_name, "plan2");
  EXPECT_EQ(cfg.catalog.durations, (std::vector<Seconds>{1, 10, 30, 60, 120, 600, 1800}));

  // operation models (kW, s) of the six devices
  const auto& tv = cfg.appliances[0];
  ASSERT_EQ(tv.states.size(), 1u);
  EXPECT_DOUBLE_EQ(tv.states[0].power, 180.0);
  EXPECT_EQ(tv.states[0].duration, 3600);
  EXPECT_EQ(cfg.appliances[1].states.size(), 5u);
  const auto& dryer = cfg.appliances[2];
  ASSERT_EQ(dryer.states.size(), 10u);
  for (const auto& s : dryer.states) {
    EXPECT_DOUBLE_EQ(s.power, 2500.0);
    EXPECT_EQ(s.duration, 120);
  }
  EXPECT_EQ(cfg.appliances[3].states.size(), 5u);
  const auto& fridge = cfg.appliances[4];
  ASSERT_EQ(fridge.states.size(), 2u);
  const auto& usage = std::get<Probabilistic>(fridge.usage);
  EXPECT_DOUBLE_EQ(usage.omega_star, 0.8);
  EXPECT_DOUBLE_EQ(usage.decay, 0.5);
  EXPECT_DOUBLE_EQ(cfg.appliances[5].states[0].power, 2000.0);
  for (const auto& a : cfg.appliances) EXPECT_DOUBLE_EQ(a.psi, 0.9);
}

TEST(Scenario, EmptyApplianceListIsValid) {
  const auto cfg = parse_scenario(minimal_scenario());
  EXPECT_TRUE(cfg.appliances.empty());
  EXPECT_EQ(cfg.seed, 7u);
}

TEST(Scenario, BandPastMidnightIsRejected) {
  const auto tariffs = R"({"get": [{"start": 0, "end": 86500, "price": 0.2}],
                           "fit": [{"start": 0, "end": 86400, "price": 0.04}]})";
  try {
    parse_scenario(minimal_scenario("[]", tariffs));
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "tariffs.get[0]");
  }
}

TEST(Scenario, OverlappingAndGappedBandsNameTheBand) {
  const auto overlap = R"({"get": [{"start": 0, "end": 50000, "price": 0.2}, {"start": 40000, "end": 86400, "price": 0.1}],
                           "fit": [{"start": 0, "end": 86400, "price": 0.04}]})";
  EXPECT_THROW(parse_scenario(minimal_scenario("[]", overlap)), ValidationError);
  const auto gap = R"({"get": [{"start": 0, "end": 40000, "price": 0.2}, {"start": 50000, "end": 86400, "price": 0.1}],
                       "fit": [{"start": 0, "end": 86400, "price": 0.04}]})";
  EXPECT_THROW(parse_scenario(minimal_scenario("[]", gap)), ValidationError);
}

TEST(Scenario, NegativePowerIsRejected) {
  const auto apps = R"([{"name": "x", "psi": 0.9, "states": [{"power": -5, "duration": 10}],
                         "usage": {"type": "trace", "events": []}}])";
  try {
    parse_scenario(minimal_scenario(apps));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "appliances[0].states[0].power");
  }
}

TEST(Scenario, MalformedJsonIsAParseError) {
  EXPECT_THROW(parse_scenario("{ \"sim\": "), ParseError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ParseError);
}

TEST(Scenario, MissingSeedIsRejected) {
  EXPECT_THROW(parse_scenario(R"({"sim": {"start_date": "2015-01-01", "length": 10},
                                  "tariffs": "italian", "grid_plan": "plan0", "appliances": []})"),
               ValidationError);
}

TEST(Scenario, InflexibleSentinelAndDailyTraces) {
  const auto apps = R"([{"name": "tv", "psi": "inflexible", "states": [{"power": 100, "duration": 10}],
                         "usage": {"type": "trace", "daily": ["07:30", "19:00"]}}])";
  auto text = minimal_scenario(apps);
  text.replace(text.find("86400"), 5, "172800");
  const auto cfg = parse_scenario(text);
  EXPECT_TRUE(cfg.appliances[0].inflexible());
  const auto& ev = std::get<EventTrace>(cfg.appliances[0].usage).starts;
  const EpochSeconds day0 = parse_date("2015-01-01");
  EXPECT_EQ(ev, (std::vector<EpochSeconds>{day0 + 27000, day0 + 68400, day0 + 86400 + 27000, day0 + 86400 + 68400}));
}

TEST(Scenario, TariffLookupItalian) {
  const auto get = presets::italian_get();
  const auto fit = presets::italian_fit();
  EXPECT_DOUBLE_EQ(tariff_at(get, 12 * 3600), 0.29);
  EXPECT_DOUBLE_EQ(tariff_at(get, 2 * 3600), 0.15);
  EXPECT_DOUBLE_EQ(tariff_at(fit, 12 * 3600), 0.04);
  EXPECT_DOUBLE_EQ(tariff_at(fit, 23 * 3600), 0.02);
  // half-open band edges
  EXPECT_DOUBLE_EQ(tariff_at(get, 6 * 3600 - 1), 0.15);
  EXPECT_DOUBLE_EQ(tariff_at(get, 6 * 3600), 0.29);
  EXPECT_DOUBLE_EQ(tariff_at(get, 21 * 3600), 0.15);
}

TEST(Scenario, GridPlans) {
  // the banded plan: 3 kW from 06:00 to 18:00, 1 kW otherwise
  EXPECT_DOUBLE_EQ(grid_power_at(presets::plan(2), 10 * 3600), 3000.0);
  EXPECT_DOUBLE_EQ(grid_power_at(presets::plan(2), 22 * 3600), 1000.0);
  EXPECT_DOUBLE_EQ(grid_power_at(presets::plan(1), 5), 1500.0);
  EXPECT_DOUBLE_EQ(grid_power_at(presets::plan(3), 22 * 3600), 3000.0);
  EXPECT_DOUBLE_EQ(grid_power_at(presets::plan(4), 0), 6000.0);
  for (Seconds t = 0; t < kSecondsPerDay; t += 997) EXPECT_DOUBLE_EQ(grid_power_at(presets::plan(0), t), 0.0);
}

TEST(Scenario, SchedulesAreTotalOverTheDay) {
  const std::vector<DaySchedule> all = {presets::italian_get(), presets::italian_fit(), presets::plan(0),
                                        presets::plan(1), presets::plan(2), presets::plan(3), presets::plan(4)};
  for (const auto& s : all) {
    validate_partition(s, "s");
    for (Seconds t = 0; t < kSecondsPerDay; ++t) ASSERT_NO_THROW(s.at(t)) << t;
  }
}

TEST(Scenario, RandomPartitionsAreTotal) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> n_cuts(0, 6);
    std::uniform_int_distribution<Seconds> cut(1, kSecondsPerDay - 1);
    std::vector<Seconds> cuts;
    for (int i = n_cuts(rng); i > 0; --i) cuts.push_back(cut(rng));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    DaySchedule s;
    Seconds prev = 0;
    for (Seconds c : cuts) {
      s.bands.push_back({prev, c, static_cast<double>(c)});
      prev = c;
    }
    s.bands.push_back({prev, kSecondsPerDay, 1.0});
    validate_partition(s, "s");
    std::uniform_int_distribution<Seconds> probe(0, kSecondsPerDay - 1);
    for (int k = 0; k < 100; ++k) {
      const Seconds t = probe(rng);
      int hits = 0;
      for (const auto& b : s.bands) hits += (t >= b.start && t < b.end);
      ASSERT_EQ(hits, 1);
      ASSERT_NO_THROW(s.at(t));
    }
  }
}

TEST(Scenario, SerializeReparsesToIdenticalConfig) {
  const auto cfg = load_scenario(test_paths::reference_scenario());
  const auto text = serialize_scenario(cfg);
  const auto again = parse_scenario(text);
  EXPECT_EQ(again, cfg);
  EXPECT_EQ(serialize_scenario(again), text);
}

TEST(Scenario, MeasuredWeatherFromFileRoundTrips) {
  const auto csv = temp_file("weather.csv", "1420070400,0.0\n1420071300,0.25\n1420072200,1.0\n");
  auto text = minimal_scenario();
  text.insert(text.rfind('}'), ", \"weather\": {\"type\": \"measured\", \"file\": \"" + csv.string() +
                                   "\", \"resolution\": 900}");
  const auto cfg = parse_scenario(text);
  const auto& m = std::get<Measured>(cfg.weather);
  EXPECT_EQ(m.series.samples.size(), 3u);
  EXPECT_EQ(parse_scenario(serialize_scenario(cfg)), cfg);
}

TEST(TimeSeries, WellFormedFile) {
  std::string text;
  for (int i = 0; i < 96; ++i) text += std::to_string(1420070400 + i * 900) + "," + std::to_string(i / 96.0) + "\n";
  const auto ts = parse_timeseries(temp_file("ts96.csv", text).string(), 900);
  EXPECT_EQ(ts.samples.size(), 96u);
  EXPECT_EQ(ts.resolution, 900);
}

TEST(TimeSeries, DuplicateTimestampIsRejected) {
  const auto p = temp_file("dup.csv", "100,0.1\n100,0.2\n");
  EXPECT_THROW(parse_timeseries(p.string(), 900), ValidationError);
}

TEST(TimeSeries, NonNumericValueIsRejected) {
  const auto p = temp_file("nan.csv", "100,abc\n");
  EXPECT_THROW(parse_timeseries(p.string(), 900), ParseError);
}

TEST(TimeSeries, EmptyFileIsEmptySeries) {
  const auto ts = parse_timeseries(temp_file("empty.csv", "").string(), 900);
  EXPECT_TRUE(ts.empty());
}

TEST(TimeSeries, HeaderFlagSkipsFirstLine) {
  const auto p = temp_file("hdr.csv", "epoch_second,value\n100,0.5\n");
  EXPECT_THROW(parse_timeseries(p.string(), 900), ParseError);
  EXPECT_EQ(parse_timeseries(p.string(), 900, true).samples.size(), 1u);
}
