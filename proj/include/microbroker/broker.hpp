#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "microbroker/common.hpp"
#include "microbroker/contracts.hpp"

namespace microbroker {

// Cost of supplying P_s watts when P_re comes from local generation (bought
// at the feed-in tariff) and the rest from the grid (at the grid tariff).
inline EurPerKwh base_price(Watts p_s, Watts p_re, EurPerKwh fit, EurPerKwh get) {
  if (p_s <= p_re) return fit;
  return (p_re * fit + (p_s - p_re) * get) / p_s;
}

inline double kwh(Watts w, Seconds dt) { return w / 1000.0 * static_cast<double>(dt) / 3600.0; }

struct MarketParams {
  Watts reference_increment = 1000.0;  // marginal unit used to price a cycle
  EurPerKwh p_cap = 10.0;              // pessimistic surcharge ceiling
  EurPerKwh p_scale = 1.0;             // neural price range [0, p_scale]
  Watts power_scale = 6000.0;          // neural input normalization
  double reimbursement_penalty = 100000.0;
  bool operator==(const MarketParams&) const = default;
};

enum class ContractEnd { Open, Expired, Terminated };

inline const char* to_string(ContractEnd e) {
  switch (e) {
    case ContractEnd::Open: return "open";
    case ContractEnd::Expired: return "expired";
    case ContractEnd::Terminated: return "terminated";
  }
  return "?";
}

struct ContractRecord {
  SlaContract contract;
  EpochSeconds end = 0;
  ContractEnd reason = ContractEnd::Open;
  Euro reimbursement = 0.0;

  Euro income() const { return kwh(contract.power, contract.billed) * contract.unit_price; }
};

// Active contracts in signing order (ids increase along the vector).
class SlaBook {
 public:
  const std::vector<SlaContract>& active() const noexcept { return active_; }
  std::size_t size() const noexcept { return active_.size(); }
  bool empty() const noexcept { return active_.empty(); }

  Watts committed_power() const {
    return std::accumulate(active_.begin(), active_.end(), 0.0,
                           [](double s, const SlaContract& c) { return s + c.power; });
  }

  // Largest contracted power currently held by `load`.
  Watts held_power(LoadId load) const {
    Watts best = 0.0;
    for (const auto& c : active_)
      if (c.load == load) best = std::max(best, c.power);
    return best;
  }

  bool covers(LoadId load, Watts power) const { return power > 0.0 && held_power(load) >= power; }

  const SlaContract& sign(LoadId load, Watts power, Seconds duration, EurPerKwh unit_price, EpochSeconds t) {
    active_.push_back({next_id_++, load, power, duration, unit_price, t, duration, 0});
    return active_.back();
  }

  // Removes and returns the most recently signed contract.
  SlaContract pop_newest() {
    SlaContract c = active_.back();
    active_.pop_back();
    return c;
  }

  // Charges one cycle, shifts remaining time left and drops expired contracts.
  template <class OnExpire>
  void advance(Seconds dt, OnExpire&& on_expire) {
    for (auto& c : active_) {
      c.billed += dt;
      c.remaining -= dt;
    }
    auto keep = std::stable_partition(active_.begin(), active_.end(),
                                      [](const SlaContract& c) { return c.remaining > 0; });
    for (auto it = keep; it != active_.end(); ++it) on_expire(*it);
    active_.erase(keep, active_.end());
  }

 private:
  std::vector<SlaContract> active_;
  ContractId next_id_ = 1;
};

struct Bid {
  LoadId load = 0;
  QuantityVector quantity;
};

struct Allocation {
  std::vector<ContractId> granted;
  std::vector<LoadId> granted_loads;
  std::vector<LoadId> rejected;
};

// Grants bids at the posted prices, in seeded random order, while the
// committed power stays within P_re + P_grid.
template <class Rng>
Allocation allocate(SlaBook& book, const std::vector<Bid>& bids, const PriceVector& prices,
                    const SlaCatalog& catalog, const SupplyContext& ctx, EpochSeconds t, Rng& rng) {
  Allocation out;
  std::vector<std::size_t> order(bids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  Watts committed = book.committed_power();
  const Watts capacity = ctx.capacity();
  for (std::size_t i : order) {
    const auto& bid = bids[i];
    const auto k = bid.quantity.demanded_index();
    if (!k) continue;
    const Watts demand = bid.quantity.power[*k];
    if (committed + demand <= capacity) {
      committed += demand;
      out.granted.push_back(book.sign(bid.load, demand, catalog.durations[*k], prices[*k], t).id);
      out.granted_loads.push_back(bid.load);
    } else {
      out.rejected.push_back(bid.load);
    }
  }
  return out;
}

struct Enforcement {
  Euro reimbursement = 0.0;
  std::vector<ContractRecord> terminated;
};

// Restores feasibility by terminating the most recently signed contracts.
// Each one is refunded at the current supply cost for its remaining time.
inline Enforcement enforce(SlaBook& book, const SupplyContext& ctx, EpochSeconds t) {
  Enforcement out;
  Watts committed = book.committed_power();
  if (committed <= ctx.capacity()) return out;
  const EurPerKwh cost = base_price(committed, ctx.p_re, ctx.fit, ctx.get);
  while (!book.empty() && book.committed_power() > ctx.capacity()) {
    SlaContract c = book.pop_newest();
    const Euro refund = kwh(c.power, c.remaining) * cost;
    out.reimbursement += refund;
    out.terminated.push_back({c, t, ContractEnd::Terminated, refund});
  }
  return out;
}

struct StepLedger {
  EpochSeconds t = 0;
  Seconds dt = 1;
  Watts p_re = 0.0;
  Watts p_grid = 0.0;
  Watts committed = 0.0;
  Watts consumed = 0.0;
  Watts pv_used = 0.0;
  Watts grid_drawn = 0.0;
  Watts fed_in = 0.0;
  Euro income_ugrid = 0.0;
  Euro income_feedin = 0.0;
  Euro cost_supply = 0.0;
  Euro cost_reimb = 0.0;
  std::size_t n_contracts = 0;

  Euro profit() const { return (income_ugrid + income_feedin) - (cost_supply + cost_reimb); }
};

struct Settlement {
  StepLedger row;
  std::vector<ContractRecord> expired;
};

// Books one cycle. PV serves the load first, the grid covers the residual and
// surplus PV is fed in.
inline Settlement settle_step(SlaBook& book, const SupplyContext& ctx, Watts consumed, Euro reimbursement,
                              EpochSeconds t, Seconds dt) {
  Settlement out;
  auto& r = out.row;
  r.t = t;
  r.dt = dt;
  r.p_re = ctx.p_re;
  r.p_grid = ctx.p_grid;
  r.committed = book.committed_power();
  r.n_contracts = book.size();
  r.consumed = consumed;
  r.pv_used = std::min(consumed, ctx.p_re);
  r.grid_drawn = consumed - r.pv_used;
  r.fed_in = ctx.p_re - r.pv_used;
  for (const auto& c : book.active()) r.income_ugrid += kwh(c.power, dt) * c.unit_price;
  r.cost_supply = kwh(r.grid_drawn, dt) * ctx.get + kwh(r.pv_used, dt) * ctx.fit;
  r.income_feedin = kwh(r.fed_in, dt) * ctx.fit;
  r.cost_reimb = reimbursement;
  book.advance(dt, [&](const SlaContract& c) { out.expired.push_back({c, t + dt, ContractEnd::Expired, 0.0}); });
  return out;
}

// Rule-based pricing. p0 is the supply cost of one more reference increment
// on top of the committed power.
inline EurPerKwh marginal_price(const SupplyContext& ctx, Watts committed, const MarketParams& m) {
  return base_price(committed + m.reference_increment, ctx.p_re, ctx.fit, ctx.get);
}

inline PriceVector optimistic_prices(EurPerKwh p0, const SlaCatalog& catalog) {
  return {std::vector<EurPerKwh>(catalog.size(), p0)};
}

inline PriceVector pessimistic_prices(EurPerKwh p0, const SlaCatalog& catalog, EurPerKwh p_cap) {
  PriceVector pv;
  pv.prices.reserve(catalog.size());
  const double d_min = static_cast<double>(catalog.shortest());
  for (Seconds d : catalog.durations) pv.prices.push_back(std::min(p0 * static_cast<double>(d) / d_min, p_cap));
  return pv;
}

}  // namespace microbroker
