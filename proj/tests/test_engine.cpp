#include <gtest/gtest.h>

#include <filesystem>

#include "microbroker/output.hpp"
#include "test_paths.hpp"

using namespace microbroker;

namespace {

ScenarioConfig bare() {
  ScenarioConfig cfg;
  cfg.name = "bare";
  cfg.pv.peak_power = 0.0;
  cfg.plan = presets::plan(0);
  cfg.plan_name = "plan0";
  cfg.sim_length = 600;
  return cfg;
}

ApplianceSpec single_state(const std::string& name, Watts w, Seconds d, std::vector<EpochSeconds> starts) {
  ApplianceSpec s;
  s.name = name;
  s.states = {{w, d, 30, 1.0}};
  s.usage = EventTrace{std::move(starts)};
  return s;
}

}  // namespace

TEST(Engine, EmptyScenarioAdvancesTimeOnly) {
  const auto cfg = bare();
  Simulation sim(cfg, OptimisticPolicy{});
  sim.step();
  EXPECT_EQ(sim.now(), cfg.sim_start + 1);
  ASSERT_EQ(sim.logs().ledger.size(), 1u);
  const auto& row = sim.logs().ledger[0];
  EXPECT_EQ(row.profit(), 0.0);
  EXPECT_EQ(row.committed, 0.0);
  EXPECT_TRUE(sim.book().empty());
}

TEST(Engine, ContractRemainingShiftsEachCycle) {
  auto cfg = bare();
  cfg.plan = presets::plan(4);
  cfg.appliances = {single_state("heater", 100, 100, {cfg.sim_start})};
  Simulation sim(cfg, OptimisticPolicy{});
  sim.step();
  ASSERT_EQ(sim.book().size(), 1u);
  EXPECT_EQ(sim.book().active()[0].duration, 120);  // best fit for 100 s
  EXPECT_EQ(sim.book().active()[0].remaining, 119);
  sim.step();
  EXPECT_EQ(sim.book().active()[0].remaining, 118);
}

TEST(Engine, EnforcementRunsBeforeAllocation) {
  auto cfg = bare();
  cfg.plan.bands = {{0, 10, 1000.0}, {10, kSecondsPerDay, 500.0}};
  cfg.appliances = {single_state("a", 800, 100, {cfg.sim_start}), single_state("b", 400, 50, {cfg.sim_start + 10})};
  Simulation sim(cfg, OptimisticPolicy{});
  for (int i = 0; i < 11; ++i) sim.step();
  // capacity fell to 500 W: a (800 W) is terminated first, then b (400 W) fits
  ASSERT_EQ(sim.book().size(), 1u);
  EXPECT_EQ(sim.book().active()[0].load, 1u);
  const auto& logs = sim.logs();
  ASSERT_EQ(logs.contracts.size(), 1u);
  const auto& term = logs.contracts[0];
  EXPECT_EQ(term.reason, ContractEnd::Terminated);
  EXPECT_EQ(term.end, cfg.sim_start + 10);
  // refund for the remaining 110 s at the all-grid night price
  EXPECT_NEAR(term.reimbursement, 0.8 * 110.0 / 3600.0 * 0.15, 1e-15);
  EXPECT_NEAR(logs.ledger[10].cost_reimb, term.reimbursement, 0.0);
  bool interrupted = false;
  for (const auto& e : logs.events)
    if (e.kind == LoadEventKind::Interrupted && e.load == 0 && e.t == cfg.sim_start + 10) interrupted = true;
  EXPECT_TRUE(interrupted);
  EXPECT_LE(logs.max_overcommit, 0.0);
}

TEST(Engine, ZeroLengthRunUsesConventions) {
  auto cfg = bare();
  cfg.sim_length = 0;
  const auto r = run_simulation(cfg, OptimisticPolicy{});
  EXPECT_TRUE(r.logs.ledger.empty());
  EXPECT_FALSE(r.report.par.has_value());
  EXPECT_EQ(r.report.availability.availability, 1.0);
  EXPECT_EQ(r.report.reactivity, 1.0);
}

TEST(Engine, TimeDilationCoversTheSameSpan) {
  auto cfg = load_scenario(test_paths::reference_scenario());
  cfg.time_step = 10;
  const auto r = run_simulation(cfg, OptimisticPolicy{});
  EXPECT_EQ(r.logs.ledger.size(), 8640u);
  EXPECT_EQ(r.logs.ledger.back().t, cfg.sim_start + kSecondsPerDay - 10);
  EXPECT_LE(r.logs.max_overcommit, 0.0);
}

TEST(Engine, ReferenceDayIsFeasibleAndDeterministic) {
  const auto cfg = load_scenario(test_paths::reference_scenario());
  for (const BrokerPolicy policy : {BrokerPolicy{OptimisticPolicy{}}, BrokerPolicy{PessimisticPolicy{}}}) {
    const auto a = run_simulation(cfg, policy);
    const auto b = run_simulation(cfg, policy);
    EXPECT_EQ(a.logs.ledger.size(), 86400u);
    EXPECT_LE(a.logs.max_overcommit, 0.0);
    EXPECT_LE(a.logs.max_balance_error, 1e-9);
    EXPECT_EQ(ledger_csv(a.logs.ledger), ledger_csv(b.logs.ledger));
    EXPECT_EQ(contracts_csv(a.logs.contracts), contracts_csv(b.logs.contracts));
    EXPECT_GT(a.report.completed, 0u);
  }
}

TEST(Engine, SeedOverrideChangesTheRun) {
  auto cfg = load_scenario(test_paths::reference_scenario());
  cfg.time_step = 10;
  RunOptions o1, o2;
  o1.seed = 1;
  o2.seed = 2;
  const auto a = run_simulation(cfg, PessimisticPolicy{}, o1);
  const auto b = run_simulation(cfg, PessimisticPolicy{}, o2);
  EXPECT_EQ(a.seed, 1u);
  EXPECT_NE(ledger_csv(a.logs.ledger), ledger_csv(b.logs.ledger));
}

TEST(Engine, RunningProfitMatchesContractLog) {
  auto cfg = load_scenario(test_paths::reference_scenario());
  const auto r = run_simulation(cfg, PessimisticPolicy{});
  auto tariffs = [&](EpochSeconds t) {
    const auto sod = second_of_day(t);
    return std::pair{tariff_at(cfg.fit, sod), tariff_at(cfg.get, sod)};
  };
  const auto rebuilt = profit_from_contracts(r.logs.contracts, r.logs.ledger, tariffs);
  EXPECT_NEAR(rebuilt.profit, r.report.profit.profit, 1e-9);
  EXPECT_NEAR(rebuilt.cost_reimbursement, r.report.profit.cost_reimbursement, 1e-12);
}

TEST(Output, WriteRunProducesFiles) {
  auto cfg = bare();
  cfg.appliances = {single_state("x", 100, 20, {cfg.sim_start + 5})};
  cfg.plan = presets::plan(1);
  const auto result = run_simulation(cfg, OptimisticPolicy{});
  const auto dir = std::filesystem::temp_directory_path() / "microbroker_test_write_run";
  std::filesystem::remove_all(dir);
  write_run(dir, cfg, "optimistic", result);
  for (const char* f : {"ledger.csv", "events.csv", "contracts.csv", "metrics.csv", "report.json", "manifest.json",
                        "runs.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const auto ledger = ledger_csv(result.logs.ledger);
  EXPECT_EQ(ledger.substr(0, ledger.find('\n')),
            "t,P_re,P_grid,committed,income_ugrid,income_feedin,cost_supply,cost_reimb,n_contracts");
}
