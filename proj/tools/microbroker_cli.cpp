// microbroker command line: simulate | train | evaluate | report
//
// Exit codes: 0 success, 1 usage error, 2 data/config error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "microbroker/microbroker.hpp"

namespace mb = microbroker;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_out() {
  const char* env = std::getenv("MICROBROKER_OUT");
  return env && *env ? env : "out";
}

struct ScenarioFlags {
  std::string path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> plan;
  std::optional<std::string> weather;
  std::optional<mb::Seconds> time_step;
  std::optional<mb::Seconds> length;

  void add(CLI::App* cmd) {
    cmd->add_option("--scenario", path, "Scenario file")->required();
    cmd->add_option("--seed", seed, "Seed (overrides the scenario)");
    cmd->add_option("--plan", plan, "Grid plan preset plan0..plan4 (overrides the scenario)");
    cmd->add_option("--weather", weather, "Ideal weather season: winter | summer (overrides the scenario)");
    cmd->add_option("--time-step", time_step, "Seconds per trading cycle (time dilation)");
    cmd->add_option("--length", length, "Simulated seconds (overrides the scenario)");
  }

  mb::ScenarioConfig load() const {
    if (!fs::exists(path)) throw mb::ParseError("scenario file not found: '" + path + "'");
    auto cfg = mb::load_scenario(path);
    if (seed) cfg.seed = *seed;
    if (plan) {
      const auto& p = *plan;
      if (p.size() != 5 || p.rfind("plan", 0) != 0 || p[4] < '0' || p[4] > '4') {
        throw UsageError("--plan expects plan0..plan4");
      }
      cfg.plan = mb::presets::plan(p[4] - '0');
      cfg.plan_name = p;
    }
    if (weather) {
      if (*weather == "winter") cfg.weather = mb::ClearSky::winter();
      else if (*weather == "summer") cfg.weather = mb::ClearSky::summer();
      else throw UsageError("--weather expects winter or summer");
    }
    if (time_step) cfg.time_step = *time_step;
    if (length) cfg.sim_length = *length;
    mb::validate(cfg);
    return cfg;
  }
};

mb::BrokerPolicy parse_policy(const std::string& text) {
  if (text == "optimistic") return mb::OptimisticPolicy{};
  if (text == "pessimistic") return mb::PessimisticPolicy{};
  if (text.rfind("neural:", 0) == 0) {
    auto ck = mb::load_checkpoint(text.substr(7));
    return mb::NeuralPolicy{ck.topology, ck.genome};
  }
  throw UsageError("--policy expects optimistic, pessimistic or neural:CHECKPOINT");
}

int cmd_simulate(const ScenarioFlags& sf, const std::string& policy_text, const std::string& out) {
  const auto cfg = sf.load();
  const auto policy = parse_policy(policy_text);
  const auto result = mb::run_simulation(cfg, policy);
  mb::write_run(out, cfg, mb::policy_name(policy), result);
  std::cout << mb::report_text(result.report);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_train(const ScenarioFlags& sf, mb::EvolutionParams params, const std::string& topology,
              std::size_t hidden, std::size_t neurons, std::size_t steps, const std::string& out) {
  const auto cfg = sf.load();
  params.seed = sf.seed.value_or(cfg.seed);
  mb::Topology topo;
  if (topology == "layered") {
    topo = mb::Layered{mb::kNetInputs, hidden, cfg.catalog.size()};
  } else if (topology == "fully-connected") {
    topo = mb::FullyConnected{mb::kNetInputs, std::max(neurons, cfg.catalog.size()), cfg.catalog.size(), steps};
  } else {
    throw UsageError("--topology expects layered or fully-connected");
  }
  const auto result = mb::evolve(params, cfg, topo, [](const mb::GenerationStats& g) {
    std::cerr << "generation " << g.generation << " best " << mb::format_double(g.best) << " median "
              << mb::format_double(g.median) << "\n";
  });
  fs::create_directories(out);
  mb::write_text(fs::path(out) / "training_log.csv", mb::training_log_csv(result));
  mb::save_checkpoint((fs::path(out) / "champion.genome").string(), {topo, result.champion});
  const auto& c = result.champion_record.components;
  mb::write_text(fs::path(out) / "manifest.json",
                 mb::manifest_json(cfg, "neural", params.seed,
                                   {{"population", std::to_string(params.population_size)},
                                    {"generations", std::to_string(params.generations)},
                                    {"initial_best_fitness", mb::format_double(result.initial.best)},
                                    {"initial_best_reimbursement", mb::format_double(result.initial.best_reimbursement)},
                                    {"champion_fitness", mb::format_double(result.champion_record.fitness)},
                                    {"champion_profit", mb::format_double(c.profit)},
                                    {"champion_reimbursement", mb::format_double(c.cost_reimbursement)}}));
  std::cout << "champion fitness " << mb::format_double(result.champion_record.fitness) << ", wrote " << out << "\n";
  return 0;
}

int cmd_evaluate(const ScenarioFlags& sf, const std::string& policy_text, std::size_t runs, const std::string& out) {
  if (runs < 1) throw UsageError("--runs must be >= 1");
  const auto cfg = sf.load();
  const auto policy = parse_policy(policy_text);
  const std::uint64_t base = sf.seed.value_or(cfg.seed);
  std::vector<mb::RunRow> rows;
  for (std::size_t i = 0; i < runs; ++i) {
    mb::RunOptions opts;
    opts.seed = base + i;
    opts.keep_ledger = opts.keep_events = opts.keep_contracts = false;
    const auto result = mb::run_simulation(cfg, policy, opts);
    rows.push_back({i, result.seed, mb::policy_name(policy), cfg.name, cfg.plan_name, cfg.weather_name(), result.report});
  }
  fs::create_directories(out);
  mb::write_text(fs::path(out) / "runs.csv", mb::runs_csv(rows, cfg.catalog));
  mb::write_text(fs::path(out) / "manifest.json",
                 mb::manifest_json(cfg, mb::policy_name(policy), base,
                                   {{"runs", std::to_string(runs)},
                                    {"seeds", std::to_string(base) + ".." + std::to_string(base + runs - 1)}}));
  std::cout << "evaluated " << runs << " runs, wrote " << out << "\n";
  return 0;
}

int cmd_report(const std::string& in, const std::optional<std::string>& out_opt) {
  const auto table = mb::read_runs(in);
  const fs::path out = out_opt.value_or(in);
  const auto summary = mb::grouped_summary_csv(table, {"policy"});
  mb::write_text(out / "summary.csv", summary);
  mb::write_text(out / "plot_by_plan.csv", mb::grouped_summary_csv(table, {"policy", "plan", "weather"}));
  std::cout << summary;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microgrid SLA broker simulator and neuroevolution trainer"};
  app.require_subcommand(1);

  std::string out = default_out();
  std::string policy = "optimistic";

  ScenarioFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "Run one simulation and write ledgers and metrics");
  sim_flags.add(simulate);
  simulate->add_option("--policy", policy, "optimistic | pessimistic | neural:CHECKPOINT");
  simulate->add_option("--out", out, "Output directory (default $MICROBROKER_OUT or ./out)");

  ScenarioFlags train_flags;
  mb::EvolutionParams params;
  std::string topology = "layered";
  std::size_t hidden = 2, neurons = 9, steps = 3;
  auto* train = app.add_subcommand("train", "Evolve a neural broker");
  train_flags.add(train);
  train->add_option("--generations", params.generations, "Generations (default 500)");
  train->add_option("--population", params.population_size, "Population size (default 50)");
  train->add_option("--sigma", params.mutation_sigma, "Gaussian mutation std (default 0.2)");
  train->add_option("--topology", topology, "layered | fully-connected");
  train->add_option("--hidden", hidden, "Hidden neurons of the layered network (default 2)");
  train->add_option("--neurons", neurons, "Neurons of the fully connected network (default 9)");
  train->add_option("--internal-steps", steps, "Recurrent iterations of the fully connected network (default 3)");
  train->add_option("--threads", params.threads, "Evaluation threads (0 = all cores)");
  train->add_option("--out", out, "Output directory");

  ScenarioFlags eval_flags;
  std::size_t runs = 100;
  std::string eval_policy = "optimistic";
  auto* evaluate = app.add_subcommand("evaluate", "Run N seeded simulations and write per-run metrics");
  eval_flags.add(evaluate);
  evaluate->add_option("--policy", eval_policy, "optimistic | pessimistic | neural:CHECKPOINT");
  evaluate->add_option("--runs", runs, "Number of runs (default 100)");
  evaluate->add_option("--out", out, "Output directory");

  std::string report_in;
  std::optional<std::string> report_out;
  auto* report = app.add_subcommand("report", "Summarize run outputs (min/median/max per policy)");
  report->add_option("--in", report_in, "Directory holding run outputs")->required();
  report->add_option("--out", report_out, "Where to write summaries (default: --in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_flags, policy, out);
    if (train->parsed()) return cmd_train(train_flags, params, topology, hidden, neurons, steps, out);
    if (evaluate->parsed()) return cmd_evaluate(eval_flags, eval_policy, runs, out);
    if (report->parsed()) return cmd_report(report_in, report_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
