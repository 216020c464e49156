// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "microbroker/microbroker.hpp"
#include "oracles.hpp"
#include "test_paths.hpp"

using namespace microbroker;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ScenarioConfig reference() { return load_scenario(test_paths::reference_scenario()); }

Genome seeded_genome(const Topology& topo, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_genome(topo, rng);
}

// 1. Supply cost against an independently written oracle.
Verdict ac1() {
  std::mt19937_64 rng(20150101);
  std::uniform_real_distribution<double> w(0.0, 10000.0), price(0.0, 1.0);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double ps = w(rng), pre = w(rng), fit = price(rng), get = price(rng);
    const double got = base_price(ps, pre, fit, get);
    const double want = oracle::supply_cost(ps, pre, fit, get);
    const double rel = want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
    worst = std::max(worst, rel);
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-12 && dt < 1.0, fmt("1000 tuples, max rel err %.3g, %.4f s", worst, dt)};
}

// 2. Worked supply-cost point.
Verdict ac2() {
  const double p = base_price(4000, 1000, 0.05, 0.5);
  return {p == 0.3875, fmt("base_price(4000, 1000, 0.05, 0.5) = %.17g", p)};
}

// 3. Feasibility and energy balance for every policy over a full day.
Verdict ac3() {
  const auto cfg = reference();
  const Layered topo{kNetInputs, 2, cfg.catalog.size()};
  const std::vector<BrokerPolicy> policies = {OptimisticPolicy{}, PessimisticPolicy{},
                                              NeuralPolicy{topo, seeded_genome(topo, 7)}};
  bool ok = true;
  std::string detail;
  for (const auto& policy : policies) {
    RunOptions opts;
    opts.keep_events = opts.keep_contracts = false;
    const auto t0 = Clock::now();
    const auto r = run_simulation(cfg, policy, opts);
    const double dt = seconds_since(t0);
    bool feasible = r.logs.max_overcommit <= 0.0;
    for (const auto& row : r.logs.ledger) feasible = feasible && row.committed <= row.p_re + row.p_grid;
    const bool good = feasible && r.logs.max_balance_error <= 1e-9 && dt < 10.0 && r.logs.steps == 86400;
    ok = ok && good;
    detail += fmt("%s: overcommit %.3g W, drift %.3g W, %.2f s; ", policy_name(policy).c_str(),
                  std::max(0.0, r.logs.max_overcommit), r.logs.max_balance_error, dt);
  }
  return {ok, detail};
}

// 4. Running profit vs profit rebuilt from the contract log.
Verdict ac4() {
  const auto cfg = reference();
  auto tariffs = [&](EpochSeconds t) {
    const auto sod = second_of_day(t);
    return std::pair{tariff_at(cfg.fit, sod), tariff_at(cfg.get, sod)};
  };
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RunOptions opts;
    opts.seed = seed;
    opts.keep_events = false;
    const BrokerPolicy policy = seed % 2 ? BrokerPolicy{PessimisticPolicy{}} : BrokerPolicy{OptimisticPolicy{}};
    const auto r = run_simulation(cfg, policy, opts);
    const auto rebuilt = profit_from_contracts(r.logs.contracts, r.logs.ledger, tariffs);
    worst = std::max(worst, std::abs(rebuilt.profit - r.report.profit.profit));
  }
  return {worst <= 1e-9, fmt("10 seeds, max |running - rebuilt| = %.3g EUR", worst)};
}

// 5. Qualitative broker comparison on the reference fleet.
Verdict ac5() {
  auto cfg = reference();
  cfg.plan = presets::plan(2);
  cfg.plan_name = "plan2";
  cfg.weather = ClearSky::winter();
  RunOptions opts;
  opts.keep_ledger = opts.keep_events = opts.keep_contracts = false;
  const auto opt = run_simulation(cfg, OptimisticPolicy{}, opts).report;
  const auto pes = run_simulation(cfg, PessimisticPolicy{}, opts).report;

  const auto total = pes.contracts_total();
  const auto unit_it = pes.contracts_by_duration.find(cfg.catalog.shortest());
  const double unit_share =
      total ? static_cast<double>(unit_it == pes.contracts_by_duration.end() ? 0 : unit_it->second) / total : 0.0;
  const bool a = unit_share >= 0.70;
  const bool b = opt.reactivity < pes.reactivity;
  const bool c = opt.availability.availability >= pes.availability.availability;

  auto island = cfg;
  island.plan = presets::plan(0);
  island.plan_name = "plan0";
  const auto isl = run_simulation(island, OptimisticPolicy{}, opts).report;
  const double par0 = isl.par.value_or(0.0);
  const bool d = par0 >= 50.0 && par0 <= 500.0;

  return {a && b && c && d,
          fmt("(a) unit share %.3f [%s] (b) R opt %.4f < pes %.4f [%s] (c) A opt %.4f >= pes %.4f [%s] "
              "(d) Plan0 PAR %.2f [%s]",
              unit_share, a ? "ok" : "no", opt.reactivity, pes.reactivity, b ? "ok" : "no",
              opt.availability.availability, pes.availability.availability, c ? "ok" : "no", par0,
              d ? "ok" : "no")};
}

// 6. Desk-scale neuroevolution.
Verdict ac6() {
  auto cfg = reference();
  cfg.time_step = 10;
  const Layered topo{kNetInputs, 2, cfg.catalog.size()};
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    EvolutionParams p;
    p.population_size = 20;
    p.generations = 20;
    p.seed = seed;
    const auto r = evolve(p, cfg, topo);
    bool monotone = r.history.size() == 20 && r.history.front().best >= r.initial.best;
    for (std::size_t g = 1; g < r.history.size(); ++g) monotone = monotone && r.history[g].best >= r.history[g - 1].best;
    const double champ = r.champion_record.components.cost_reimbursement;
    const bool reimb = champ <= r.initial.best_reimbursement;
    ok = ok && monotone && reimb;
    detail += fmt("seed %llu: monotone %s, reimb %.3g <= %.3g %s; ", static_cast<unsigned long long>(seed),
                  monotone ? "yes" : "no", champ, r.initial.best_reimbursement, reimb ? "yes" : "no");
  }
  const double dt = seconds_since(t0);
  detail += fmt("%.1f s", dt);
  return {ok && dt < 600.0, detail};
}

// 7. Network outputs and decoded prices stay in range.
Verdict ac7() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> scale(0.1, 100.0), x(-3.0, 3.0);
  const MarketParams market;
  const Topology topos[] = {Layered{kNetInputs, 2, 7}, FullyConnected{kNetInputs, 9, 7, 3}};
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto& topo = topos[i % 2];
    const double s = scale(rng);
    std::uniform_real_distribution<double> gene(-s, s);
    Genome g;
    for (std::size_t k = 0; k < gene_count(topo); ++k) g.genes.push_back(gene(rng));
    std::vector<double> in(kNetInputs);
    for (auto& v : in) v = x(rng);
    const auto out = forward(g, topo, std::span<const double>(in));
    for (double o : out) violations += !(o >= -1.0 && o <= 1.0);
    for (double p : decode_prices(out, market.p_scale).prices) violations += !(p >= 0.0 && p <= market.p_scale);
  }
  return {violations == 0, fmt("10000 genomes, %zu out-of-range values", violations)};
}

// 8. Metric formulas on constructed traces.
Verdict ac8() {
  int failures = 0;
  auto check = [&](double got, double want) { failures += got != want; };

  check(par(std::vector<double>(10, 3.0)), 1.0);
  check(par(std::vector<double>{0.0, 4.0}), 2.0);
  check(par(std::vector<double>{1.0, 2.0, 3.0, 6.0}), 2.0);
  check(par(std::vector<double>{5.0, 0.0, 0.0, 0.0, 0.0}), 5.0);
  check(par(std::vector<double>{0.0, 0.0}), 1.0);
  std::vector<double> spike(200, 0.0);  // P_max 2000 W, P_avg 10 W
  spike[0] = 2000.0;
  check(par(spike), 200.0);

  using S = std::vector<Seconds>;
  check(availability(S{100}, S{}).availability, 1.0);
  check(availability(S{10, 30}, S{20, 20}).availability, 0.5);
  check(availability(S{99}, S{1}).availability, 0.99);
  check(availability(S{30, 60}, S{15}).availability, 0.75);
  check(availability(S{4}, S{12}).availability, 0.25);

  check(reactivity(5, 0), 1.0);
  check(reactivity(0, 5), 0.0);
  check(reactivity(3, 1), 0.75);
  check(reactivity(1, 1), 0.5);
  check(reactivity(0, 0), 1.0);

  return {failures == 0, fmt("16 hand-computed cases, %d mismatches", failures)};
}

// 9. Byte-identical ledgers and checkpoints from identical inputs.
Verdict ac9() {
  auto cfg = reference();
  bool ledgers = true;
  for (const BrokerPolicy& policy : {BrokerPolicy{OptimisticPolicy{}}, BrokerPolicy{PessimisticPolicy{}}}) {
    RunOptions opts;
    opts.seed = 99;
    const auto a = ledger_csv(run_simulation(cfg, policy, opts).logs.ledger);
    const auto b = ledger_csv(run_simulation(cfg, policy, opts).logs.ledger);
    ledgers = ledgers && a == b && !a.empty();
  }
  cfg.time_step = 60;
  const Layered topo{kNetInputs, 2, cfg.catalog.size()};
  EvolutionParams p;
  p.population_size = 8;
  p.generations = 4;
  p.seed = 5;
  const auto ck1 = serialize_checkpoint({topo, evolve(p, cfg, topo).champion});
  p.threads = 1;
  const auto ck2 = serialize_checkpoint({topo, evolve(p, cfg, topo).champion});
  const bool ckpt = ck1 == ck2;
  return {ledgers && ckpt, fmt("ledgers identical: %s, checkpoints identical: %s", ledgers ? "yes" : "no",
                               ckpt ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"AC1 supply-cost oracle equivalence", ac1},
      {"AC2 supply-cost point check", ac2},
      {"AC3 conservation and feasibility", ac3},
      {"AC4 accounting identity", ac4},
      {"AC5 qualitative broker comparison", ac5},
      {"AC6 desk-scale neuroevolution", ac6},
      {"AC7 neural bounds", ac7},
      {"AC8 metrics unit suite", ac8},
      {"AC9 determinism", ac9},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
