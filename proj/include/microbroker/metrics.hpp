#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "microbroker/broker.hpp"
#include "microbroker/common.hpp"

namespace microbroker {

// Peak-to-average ratio of a non-negative demand series.
inline double par(std::span<const double> demand) {
  if (demand.empty()) throw std::invalid_argument("par: empty demand series");
  const double peak = *std::max_element(demand.begin(), demand.end());
  const double mean = std::accumulate(demand.begin(), demand.end(), 0.0) / static_cast<double>(demand.size());
  if (mean == 0.0) return 1.0;  // idle grid
  return peak / mean;
}

struct AvailabilityStats {
  double mtbf = 0.0;  // seconds
  double mttr = 0.0;  // seconds
  double availability = 1.0;
  double unavailability = 0.0;
  double failure_rate = 0.0;  // per second
};

inline AvailabilityStats availability(std::span<const Seconds> uptime, std::span<const Seconds> downtime) {
  auto mean = [](std::span<const Seconds> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (auto x : xs) s += static_cast<double>(x);
    return s / static_cast<double>(xs.size());
  };
  AvailabilityStats a;
  a.mtbf = mean(uptime);
  a.mttr = mean(downtime);
  if (a.mtbf > 0.0) a.failure_rate = 1.0 / a.mtbf;
  if (downtime.empty() || a.mtbf + a.mttr == 0.0) {
    a.mttr = 0.0;
    a.availability = 1.0;
  } else {
    a.availability = a.mtbf / (a.mtbf + a.mttr);
  }
  a.unavailability = 1.0 - a.availability;
  return a;
}

inline double reactivity(std::uint64_t cbp, std::uint64_t cnbp) {
  if (cbp + cnbp == 0) return 1.0;  // never blocked
  return static_cast<double>(cbp) / static_cast<double>(cbp + cnbp);
}

struct ProfitBreakdown {
  Euro profit = 0.0;
  Euro income_ugrid = 0.0;
  Euro income_feedin = 0.0;
  Euro cost_supply = 0.0;
  Euro cost_reimbursement = 0.0;

  static ProfitBreakdown from_components(Euro ugrid, Euro feedin, Euro supply, Euro reimb) {
    return {(ugrid + feedin) - (supply + reimb), ugrid, feedin, supply, reimb};
  }
};

// Column sums of the step ledger combined as (income) - (costs).
inline ProfitBreakdown profit(std::span<const StepLedger> ledger) {
  Euro ugrid = 0, feedin = 0, supply = 0, reimb = 0;
  for (const auto& r : ledger) {
    ugrid += r.income_ugrid;
    feedin += r.income_feedin;
    supply += r.cost_supply;
    reimb += r.cost_reimb;
  }
  return ProfitBreakdown::from_components(ugrid, feedin, supply, reimb);
}

// Same quantity rebuilt from the contract log (sales and refunds) plus the
// metered energy flows of the ledger, without reading its money columns.
inline ProfitBreakdown profit_from_contracts(std::span<const ContractRecord> contracts,
                                             std::span<const StepLedger> ledger, const auto& tariff_lookup) {
  Euro ugrid = 0, feedin = 0, supply = 0, reimb = 0;
  for (const auto& c : contracts) {
    ugrid += c.income();
    reimb += c.reimbursement;
  }
  for (const auto& r : ledger) {
    const auto [fit, get] = tariff_lookup(r.t);
    const double pv_used = std::min(r.consumed, r.p_re);
    supply += kwh(r.consumed - pv_used, r.dt) * get + kwh(pv_used, r.dt) * fit;
    feedin += kwh(r.p_re - pv_used, r.dt) * fit;
  }
  return ProfitBreakdown::from_components(ugrid, feedin, supply, reimb);
}

struct MetricsReport {
  std::optional<double> par;  // undefined for an empty run
  AvailabilityStats availability;
  double reactivity = 1.0;
  std::uint64_t cbp = 0;
  std::uint64_t cnbp = 0;
  ProfitBreakdown profit;
  double discomfort = 0.0;
  std::uint64_t interruptions = 0;
  std::uint64_t completed = 0;
  std::uint64_t abandoned = 0;
  std::map<Seconds, std::uint64_t> contracts_by_duration;  // granted contracts

  std::uint64_t contracts_total() const {
    std::uint64_t n = 0;
    for (const auto& [d, c] : contracts_by_duration) n += c;
    return n;
  }
};

}  // namespace microbroker
