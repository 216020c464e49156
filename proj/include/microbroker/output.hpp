#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "microbroker/engine.hpp"
#include "microbroker/evolve.hpp"

namespace microbroker {

namespace fs = std::filesystem;

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << text;
}

inline std::string ledger_csv(const std::vector<StepLedger>& ledger) {
  std::string s = "t,P_re,P_grid,committed,income_ugrid,income_feedin,cost_supply,cost_reimb,n_contracts\n";
  for (const auto& r : ledger) {
    s += std::to_string(r.t) + ',' + format_double(r.p_re) + ',' + format_double(r.p_grid) + ',' +
         format_double(r.committed) + ',' + format_double(r.income_ugrid) + ',' + format_double(r.income_feedin) +
         ',' + format_double(r.cost_supply) + ',' + format_double(r.cost_reimb) + ',' +
         std::to_string(r.n_contracts) + '\n';
  }
  return s;
}

inline std::string events_csv(const std::vector<LoadEvent>& events, const std::vector<LoadAgent>& agents) {
  std::string s = "t,load,name,kind,state,value\n";
  for (const auto& e : events) {
    s += std::to_string(e.t) + ',' + std::to_string(e.load) + ',' + agents[e.load].spec.name + ',' +
         to_string(e.kind) + ',' + std::to_string(e.state) + ',' + format_double(e.value) + '\n';
  }
  return s;
}

inline std::string contracts_csv(const std::vector<ContractRecord>& contracts) {
  std::string s = "id,load,power,duration,unit_price,start,end,reason,billed_seconds,income,reimbursement\n";
  for (const auto& r : contracts) {
    const auto& c = r.contract;
    s += std::to_string(c.id) + ',' + std::to_string(c.load) + ',' + format_double(c.power) + ',' +
         std::to_string(c.duration) + ',' + format_double(c.unit_price) + ',' + std::to_string(c.start) + ',' +
         std::to_string(r.end) + ',' + to_string(r.reason) + ',' + std::to_string(c.billed) + ',' +
         format_double(r.income()) + ',' + format_double(r.reimbursement) + '\n';
  }
  return s;
}

// Flat metric list shared by the text, CSV and JSON reports and by runs.csv.
inline std::vector<std::pair<std::string, double>> metric_fields(const MetricsReport& r) {
  std::vector<std::pair<std::string, double>> f = {
      {"par", r.par.value_or(std::nan(""))},
      {"mtbf", r.availability.mtbf},
      {"mttr", r.availability.mttr},
      {"availability", r.availability.availability},
      {"unavailability", r.availability.unavailability},
      {"failure_rate", r.availability.failure_rate},
      {"reactivity", r.reactivity},
      {"cbp", static_cast<double>(r.cbp)},
      {"cnbp", static_cast<double>(r.cnbp)},
      {"profit", r.profit.profit},
      {"income_ugrid", r.profit.income_ugrid},
      {"income_feedin", r.profit.income_feedin},
      {"cost_supply", r.profit.cost_supply},
      {"cost_reimbursement", r.profit.cost_reimbursement},
      {"discomfort", r.discomfort},
      {"interruptions", static_cast<double>(r.interruptions)},
      {"completed", static_cast<double>(r.completed)},
      {"abandoned", static_cast<double>(r.abandoned)},
      {"contracts", static_cast<double>(r.contracts_total())},
  };
  return f;
}

inline std::string metric_text(double v) { return std::isnan(v) ? "nan" : format_double(v); }

inline std::string report_csv(const MetricsReport& r) {
  std::string s = "metric,value\n";
  for (const auto& [k, v] : metric_fields(r)) s += k + ',' + metric_text(v) + '\n';
  for (const auto& [d, n] : r.contracts_by_duration) s += "sla_" + std::to_string(d) + ',' + std::to_string(n) + '\n';
  return s;
}

inline std::string report_text(const MetricsReport& r) {
  std::ostringstream os;
  char buf[128];
  for (const auto& [k, v] : metric_fields(r)) {
    std::snprintf(buf, sizeof buf, "%-20s %s\n", k.c_str(), metric_text(v).c_str());
    os << buf;
  }
  os << "granted SLAs by duration:\n";
  for (const auto& [d, n] : r.contracts_by_duration) {
    std::snprintf(buf, sizeof buf, "  %6lld s  %llu\n", static_cast<long long>(d), static_cast<unsigned long long>(n));
    os << buf;
  }
  return os.str();
}

inline std::string report_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : metric_fields(r)) {
    if (std::isnan(v)) j[k] = nullptr;
    else j[k] = v;
  }
  nlohmann::ordered_json slas = nlohmann::ordered_json::object();
  for (const auto& [d, n] : r.contracts_by_duration) slas[std::to_string(d)] = n;
  j["granted_by_duration"] = slas;
  return j.dump(2) + "\n";
}

struct RunRow {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::string policy;
  std::string scenario;
  std::string plan;
  std::string weather;
  MetricsReport report;
};

inline std::string runs_csv(const std::vector<RunRow>& rows, const SlaCatalog& catalog) {
  std::string s = "run,seed,policy,scenario,plan,weather";
  for (const auto& [k, v] : metric_fields(MetricsReport{})) s += ',' + k;
  for (Seconds d : catalog.durations) s += ",sla_" + std::to_string(d);
  s += '\n';
  for (const auto& row : rows) {
    s += std::to_string(row.run) + ',' + std::to_string(row.seed) + ',' + row.policy + ',' + row.scenario + ',' +
         row.plan + ',' + row.weather;
    for (const auto& [k, v] : metric_fields(row.report)) s += ',' + metric_text(v);
    for (Seconds d : catalog.durations) {
      const auto it = row.report.contracts_by_duration.find(d);
      s += ',' + std::to_string(it == row.report.contracts_by_duration.end() ? 0 : it->second);
    }
    s += '\n';
  }
  return s;
}

inline std::string manifest_json(const ScenarioConfig& cfg, const std::string& policy, std::uint64_t seed,
                                 const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  nlohmann::ordered_json j;
  j["scenario"] = cfg.name;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = seed;
  j["policy"] = policy;
  j["plan"] = cfg.plan_name;
  j["weather"] = cfg.weather_name();
  j["sim_start"] = cfg.sim_start;
  j["sim_length"] = cfg.sim_length;
  j["time_step"] = cfg.time_step;
  for (const auto& [k, v] : extra) j[k] = v;
  return j.dump(2) + "\n";
}

// Writes ledger, events, contracts, metrics and manifest of one run.
inline void write_run(const fs::path& dir, const ScenarioConfig& cfg, const std::string& policy,
                      const SimulationResult& result) {
  fs::create_directories(dir);
  write_text(dir / "ledger.csv", ledger_csv(result.logs.ledger));
  write_text(dir / "events.csv", events_csv(result.logs.events, result.agents));
  write_text(dir / "contracts.csv", contracts_csv(result.logs.contracts));
  write_text(dir / "metrics.csv", report_csv(result.report));
  write_text(dir / "report.txt", report_text(result.report));
  write_text(dir / "report.json", report_json(result.report));
  write_text(dir / "manifest.json", manifest_json(cfg, policy, result.seed));
  write_text(dir / "runs.csv",
             runs_csv({{0, result.seed, policy, cfg.name, cfg.plan_name, cfg.weather_name(), result.report}},
                      cfg.catalog));
}

inline std::string training_log_csv(const EvolutionResult& r) {
  std::string s = "generation,best,median,worst,best_reimbursement\n";
  for (const auto& g : r.history) {
    s += std::to_string(g.generation) + ',' + format_double(g.best) + ',' + format_double(g.median) + ',' +
         format_double(g.worst) + ',' + format_double(g.best_reimbursement) + '\n';
  }
  return s;
}

}  // namespace microbroker
