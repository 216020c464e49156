#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <vector>

#include "microbroker/broker.hpp"
#include "microbroker/loads.hpp"
#include "microbroker/metrics.hpp"
#include "microbroker/policy.hpp"
#include "microbroker/scenario.hpp"
#include "microbroker/supply.hpp"

namespace microbroker {

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  bool keep_ledger = true;
  bool keep_events = true;
  bool keep_contracts = true;
};

struct SimLogs {
  std::vector<StepLedger> ledger;
  std::vector<LoadEvent> events;
  std::vector<ContractRecord> contracts;
  std::vector<double> demand;  // consumed watts per cycle

  ProfitBreakdown running;  // accumulated cycle by cycle
  std::uint64_t steps = 0;
  Watts max_overcommit = 0.0;         // max(0, committed - capacity) after allocation
  double max_balance_error = 0.0;     // |consumed + fed_in - (P_re + grid_drawn)|
  std::map<Seconds, std::uint64_t> granted_by_duration;
  std::uint64_t interruptions = 0, completed = 0, abandoned = 0;
};

struct SimulationResult {
  MetricsReport report;
  SimLogs logs;
  std::vector<LoadAgent> agents;
  std::uint64_t seed = 0;
};

inline SupplyContext supply_context(const ScenarioConfig& cfg, EpochSeconds t) {
  const Seconds sod = second_of_day(t);
  return {supply_at(cfg.weather, cfg.pv, t), grid_power_at(cfg.plan, sod), tariff_at(cfg.fit, sod),
          tariff_at(cfg.get, sod), sod, day_of_year(t)};
}

// One scenario run. Each cycle: supply update, enforcement, usage sampling,
// pricing, bidding, allocation, settlement, logging. A single seeded stream
// feeds every random draw in that fixed order.
class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, BrokerPolicy policy, RunOptions opts = {})
      : cfg_(&cfg), policy_(std::move(policy)), opts_(opts), seed_(opts.seed.value_or(cfg.seed)), rng_(seed_),
        t_(cfg.sim_start), end_(cfg.sim_start + cfg.sim_length) {
    check_policy(policy_, cfg.catalog);
    agents_.reserve(cfg.appliances.size());
    for (std::size_t i = 0; i < cfg.appliances.size(); ++i) agents_.push_back(make_agent(i, cfg.appliances[i]));
    logs_.demand.reserve(static_cast<std::size_t>(std::max<Seconds>(0, cfg.sim_length / cfg.time_step + 1)));
  }

  bool done() const noexcept { return t_ >= end_; }
  EpochSeconds now() const noexcept { return t_; }
  const SlaBook& book() const noexcept { return book_; }
  const std::vector<LoadAgent>& agents() const noexcept { return agents_; }
  const SimLogs& logs() const noexcept { return logs_; }
  const PriceVector& last_prices() const noexcept { return prices_; }

  void step() {
    if (done()) return;
    const Seconds dt = std::min(cfg_->time_step, end_ - t_);
    const SupplyContext ctx = supply_context(*cfg_, t_);

    // enforcement
    auto enforcement = enforce(book_, ctx, t_);
    for (auto& rec : enforcement.terminated) {
      auto& agent = agents_[rec.contract.load];
      if (const auto* st = agent.current_state(); st && st->power > 0.0 && !book_.covers(agent.id, st->power)) {
        if (auto ev = on_contract_terminated(agent, t_)) record(*ev);
      }
      if (opts_.keep_contracts) logs_.contracts.push_back(rec);
    }

    // usage sampling
    for (auto& agent : agents_) {
      if (agent.idle() && sample_start(agent, t_, dt, rng_)) record(request_start(agent, t_));
    }

    // pricing and bidding
    prices_ = price_vector(policy_, ctx, book_, cfg_->catalog, cfg_->market);
    std::vector<Bid> bids;
    for (auto& agent : agents_) {
      const auto* st = agent.current_state();
      if (!st || st->power <= 0.0 || book_.covers(agent.id, st->power)) continue;
      auto q = select_sla(*st, agent.remaining_in_state(), prices_, cfg_->catalog, agent.spec.psi);
      if (q.is_zero()) {
        ++agent.cnbp;  // nothing affordable
      } else {
        bids.push_back({agent.id, std::move(q)});
      }
    }

    // allocation
    const auto allocation = allocate(book_, bids, prices_, cfg_->catalog, ctx, t_, rng_);
    for (LoadId id : allocation.granted_loads) ++agents_[id].cbp;
    for (LoadId id : allocation.rejected) ++agents_[id].cnbp;
    for (const auto& c : book_.active()) {
      if (c.start == t_) ++logs_.granted_by_duration[c.duration];
    }
    logs_.max_overcommit = std::max(logs_.max_overcommit, book_.committed_power() - ctx.capacity());

    // loads consume and advance
    Watts consumed = 0.0;
    for (auto& agent : agents_) {
      const auto* st = agent.current_state();
      const bool powered = st && (st->power <= 0.0 || book_.covers(agent.id, st->power));
      if (powered) consumed += st->power;
      for (const auto& ev : step_load(agent, powered, t_, dt)) record(ev);
    }

    // settlement
    auto settlement = settle_step(book_, ctx, consumed, enforcement.reimbursement, t_, dt);
    if (opts_.keep_contracts) {
      for (auto& rec : settlement.expired) logs_.contracts.push_back(rec);
    }
    const auto& row = settlement.row;
    logs_.running.income_ugrid += row.income_ugrid;
    logs_.running.income_feedin += row.income_feedin;
    logs_.running.cost_supply += row.cost_supply;
    logs_.running.cost_reimbursement += row.cost_reimb;
    logs_.running.profit += row.profit();
    logs_.max_balance_error =
        std::max(logs_.max_balance_error, std::abs(row.consumed + row.fed_in - (row.p_re + row.grid_drawn)));
    logs_.demand.push_back(consumed);
    if (opts_.keep_ledger) logs_.ledger.push_back(row);
    ++logs_.steps;
    t_ += dt;
  }

  void run() {
    while (!done()) step();
  }

  SimulationResult finish() && {
    for (auto& agent : agents_) finalize_agent(agent, t_);
    if (opts_.keep_contracts) {
      for (const auto& c : book_.active()) logs_.contracts.push_back({c, t_, ContractEnd::Open, 0.0});
      std::sort(logs_.contracts.begin(), logs_.contracts.end(),
                [](const ContractRecord& a, const ContractRecord& b) { return a.contract.id < b.contract.id; });
    }
    SimulationResult out;
    out.report = build_report(logs_, agents_);
    out.logs = std::move(logs_);
    out.agents = std::move(agents_);
    out.seed = seed_;
    return out;
  }

  static MetricsReport build_report(const SimLogs& logs, const std::vector<LoadAgent>& agents) {
    MetricsReport r;
    if (!logs.demand.empty()) r.par = par(logs.demand);
    std::vector<Seconds> up, down;
    for (const auto& a : agents) {
      up.insert(up.end(), a.up_segments.begin(), a.up_segments.end());
      down.insert(down.end(), a.down_segments.begin(), a.down_segments.end());
      r.cbp += a.cbp;
      r.cnbp += a.cnbp;
      r.discomfort += a.discomfort;
    }
    r.availability = availability(up, down);
    r.reactivity = reactivity(r.cbp, r.cnbp);
    r.profit = logs.running;
    r.interruptions = logs.interruptions;
    r.completed = logs.completed;
    r.abandoned = logs.abandoned;
    r.contracts_by_duration = logs.granted_by_duration;
    return r;
  }

 private:
  void record(const LoadEvent& ev) {
    switch (ev.kind) {
      case LoadEventKind::Interrupted: ++logs_.interruptions; break;
      case LoadEventKind::OperationCompleted: ++logs_.completed; break;
      case LoadEventKind::Abandoned: ++logs_.abandoned; break;
      default: break;
    }
    if (opts_.keep_events) logs_.events.push_back(ev);
  }

  const ScenarioConfig* cfg_;
  BrokerPolicy policy_;
  RunOptions opts_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  EpochSeconds t_;
  EpochSeconds end_;
  std::vector<LoadAgent> agents_;
  SlaBook book_;
  PriceVector prices_;
  SimLogs logs_;
};

inline SimulationResult run_simulation(const ScenarioConfig& cfg, const BrokerPolicy& policy, RunOptions opts = {}) {
  Simulation sim(cfg, policy, opts);
  sim.run();
  return std::move(sim).finish();
}

}  // namespace microbroker
