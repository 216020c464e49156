#pragma once

#include <string>
#include <variant>

#include "microbroker/broker.hpp"
#include "microbroker/neuro.hpp"

namespace microbroker {

// Same price for every duration.
struct OptimisticPolicy {};

// Price grows linearly with the duration, capped at MarketParams::p_cap.
struct PessimisticPolicy {};

struct NeuralPolicy {
  Topology topology = Layered{};
  Genome genome;
};

using BrokerPolicy = std::variant<OptimisticPolicy, PessimisticPolicy, NeuralPolicy>;

inline std::string policy_name(const BrokerPolicy& p) {
  switch (p.index()) {
    case 0: return "optimistic";
    case 1: return "pessimistic";
    default: return "neural";
  }
}

// Throws TopologyError when the network cannot drive this catalog.
inline void check_policy(const BrokerPolicy& policy, const SlaCatalog& catalog) {
  const auto* n = std::get_if<NeuralPolicy>(&policy);
  if (!n) return;
  validate(n->topology);
  if (n_inputs(n->topology) != kNetInputs) {
    throw TopologyError("neural broker needs " + std::to_string(kNetInputs) + " inputs, checkpoint has " +
                        std::to_string(n_inputs(n->topology)));
  }
  if (n_outputs(n->topology) != catalog.size()) {
    throw TopologyError("neural broker has " + std::to_string(n_outputs(n->topology)) +
                        " outputs, catalog has " + std::to_string(catalog.size()) + " durations");
  }
  check_genome(n->genome, n->topology);
}

inline PriceVector price_vector(const BrokerPolicy& policy, const SupplyContext& ctx, const SlaBook& book,
                                const SlaCatalog& catalog, const MarketParams& market) {
  return std::visit(
      [&](const auto& p) -> PriceVector {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NeuralPolicy>) {
          const auto in = encode_input(ctx, {market.power_scale, market.p_scale});
          return decode_prices(forward(p.genome, p.topology, in), market.p_scale);
        } else {
          const EurPerKwh p0 = marginal_price(ctx, book.committed_power(), market);
          if constexpr (std::is_same_v<P, OptimisticPolicy>) {
            return optimistic_prices(p0, catalog);
          } else {
            return pessimistic_prices(p0, catalog, market.p_cap);
          }
        }
      },
      policy);
}

}  // namespace microbroker
