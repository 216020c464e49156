#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "microbroker/common.hpp"

namespace microbroker {

using LoadId = std::size_t;
using ContractId = std::uint64_t;

// Provisioning durations on offer, strictly increasing, starting with the
// unitary (1 s) agreement.
struct SlaCatalog {
  std::vector<Seconds> durations{1, 10, 30, 60, 120, 600, 1800};

  std::size_t size() const noexcept { return durations.size(); }
  Seconds shortest() const { return durations.front(); }
  bool operator==(const SlaCatalog&) const = default;
};

inline void validate(const SlaCatalog& catalog) {
  if (catalog.durations.empty()) throw ValidationError("catalog", "must not be empty");
  if (catalog.durations.front() != 1) {
    throw ValidationError("catalog", "first duration must be the unitary 1 s agreement");
  }
  for (std::size_t i = 1; i < catalog.durations.size(); ++i) {
    if (catalog.durations[i] <= catalog.durations[i - 1]) {
      throw ValidationError("catalog", "durations must be strictly increasing");
    }
  }
}

// Unit price (EUR/kWh) per catalog entry.
struct PriceVector {
  std::vector<EurPerKwh> prices;
  std::size_t size() const noexcept { return prices.size(); }
  EurPerKwh operator[](std::size_t k) const { return prices[k]; }
  bool operator==(const PriceVector&) const = default;
};

// Demanded power (W) per catalog entry; the load policy sets at most one entry.
struct QuantityVector {
  std::vector<Watts> power;

  std::size_t size() const noexcept { return power.size(); }
  bool is_zero() const {
    for (double p : power)
      if (p != 0.0) return false;
    return true;
  }
  // Index of the single demanded duration, if any.
  std::optional<std::size_t> demanded_index() const {
    for (std::size_t k = 0; k < power.size(); ++k)
      if (power[k] > 0.0) return k;
    return std::nullopt;
  }
  bool operator==(const QuantityVector&) const = default;
};

struct SlaContract {
  ContractId id = 0;  // signing order; higher means more recent
  LoadId load = 0;
  Watts power = 0.0;
  Seconds duration = 0;
  EurPerKwh unit_price = 0.0;
  EpochSeconds start = 0;
  Seconds remaining = 0;
  Seconds billed = 0;  // seconds of provisioning already charged
};

struct SupplyContext {
  Watts p_re = 0.0;
  Watts p_grid = 0.0;
  EurPerKwh fit = 0.0;
  EurPerKwh get = 0.0;
  Seconds second_of_day = 0;
  int day_of_year = 0;

  Watts capacity() const noexcept { return p_re + p_grid; }
};

}  // namespace microbroker
