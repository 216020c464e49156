#pragma once

#include <array>
#include <fstream>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "microbroker/common.hpp"
#include "microbroker/contracts.hpp"

namespace microbroker {

inline constexpr std::size_t kNetInputs = 6;

// input -> hidden -> output, one pass.
struct Layered {
  std::size_t n_inputs = kNetInputs;
  std::size_t n_hidden = 2;
  std::size_t n_outputs = 7;
  bool operator==(const Layered&) const = default;
};

// Every non-input neuron receives every input and every neuron's previous
// output. The last n_outputs neurons are the outputs.
struct FullyConnected {
  std::size_t n_inputs = kNetInputs;
  std::size_t n_neurons = 9;
  std::size_t n_outputs = 7;
  std::size_t internal_steps = 3;
  bool operator==(const FullyConnected&) const = default;
};

using Topology = std::variant<Layered, FullyConnected>;

inline std::size_t n_inputs(const Topology& t) {
  return std::visit([](const auto& v) { return v.n_inputs; }, t);
}
inline std::size_t n_outputs(const Topology& t) {
  return std::visit([](const auto& v) { return v.n_outputs; }, t);
}

inline std::size_t weight_count(const Topology& topo) {
  return std::visit(
      [](const auto& t) -> std::size_t {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Layered>) {
          return t.n_inputs * t.n_hidden + t.n_hidden * t.n_outputs;
        } else {
          return (t.n_inputs + t.n_neurons) * t.n_neurons;
        }
      },
      topo);
}

inline std::size_t bias_count(const Topology& topo) {
  return std::visit(
      [](const auto& t) -> std::size_t {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Layered>) {
          return t.n_hidden + t.n_outputs;
        } else {
          return t.n_neurons;
        }
      },
      topo);
}

inline std::size_t gene_count(const Topology& topo) { return weight_count(topo) + bias_count(topo); }

inline void validate(const Topology& topo) {
  std::visit(
      [](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if (t.n_inputs == 0 || t.n_outputs == 0) throw TopologyError("topology needs inputs and outputs");
        if constexpr (std::is_same_v<T, Layered>) {
          if (t.n_hidden == 0) throw TopologyError("layered topology needs at least one hidden neuron");
        } else {
          if (t.n_neurons < t.n_outputs) throw TopologyError("fully connected topology has fewer neurons than outputs");
          if (t.internal_steps == 0) throw TopologyError("fully connected topology needs internal_steps >= 1");
        }
      },
      topo);
}

// Flat gene vector: all weights first, then all biases.
//   Layered:  W1[j * n_hidden + i] (input j -> hidden i), W2[j * n_outputs + i],
//             biases hidden..., outputs...
//   FullyConnected: W[j * n_neurons + i] with sources j = inputs then neurons.
struct Genome {
  std::vector<double> genes;

  std::span<const double> weights(const Topology& t) const { return {genes.data(), weight_count(t)}; }
  std::span<const double> biases(const Topology& t) const {
    return {genes.data() + weight_count(t), bias_count(t)};
  }
  bool operator==(const Genome&) const = default;
};

inline void check_genome(const Genome& g, const Topology& topo) {
  if (g.genes.size() != gene_count(topo)) {
    throw TopologyError("genome has " + std::to_string(g.genes.size()) + " genes, topology expects " +
                        std::to_string(gene_count(topo)));
  }
}

// Linear threshold.
inline double activate(double x) {
  if (x <= -1.0) return -1.0;
  if (x < 1.0) return x;
  return 1.0;
}

struct InputNorms {
  Watts power_scale = 6000.0;
  EurPerKwh price_scale = 1.0;
};

struct NetInput {
  double p_re = 0.0;
  double p_grid = 0.0;
  double fit = 0.0;
  double get = 0.0;
  double hour = 0.0;
  double day = 0.0;

  std::array<double, kNetInputs> to_array() const { return {p_re, p_grid, fit, get, hour, day}; }
};

inline NetInput encode_input(const SupplyContext& ctx, const InputNorms& norms) {
  auto unit = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };
  NetInput in;
  in.p_re = unit(ctx.p_re / norms.power_scale);
  in.p_grid = unit(ctx.p_grid / norms.power_scale);
  in.fit = unit(ctx.fit / norms.price_scale);
  in.get = unit(ctx.get / norms.price_scale);
  in.hour = unit(std::sin(std::numbers::pi * static_cast<double>(ctx.second_of_day) / 86400.0));
  in.day = unit(std::sin(std::numbers::pi * static_cast<double>(ctx.day_of_year) / 365.0));
  return in;
}

namespace detail {

inline std::vector<double> forward_layered(const Genome& g, const Layered& t, std::span<const double> in) {
  const double* w1 = g.genes.data();
  const double* w2 = w1 + t.n_inputs * t.n_hidden;
  const double* b_hidden = w2 + t.n_hidden * t.n_outputs;
  const double* b_out = b_hidden + t.n_hidden;

  std::vector<double> hidden(t.n_hidden);
  for (std::size_t i = 0; i < t.n_hidden; ++i) {
    double sum = b_hidden[i];
    for (std::size_t j = 0; j < t.n_inputs; ++j) sum += w1[j * t.n_hidden + i] * in[j];
    hidden[i] = activate(sum);
  }
  std::vector<double> out(t.n_outputs);
  for (std::size_t i = 0; i < t.n_outputs; ++i) {
    double sum = b_out[i];
    for (std::size_t j = 0; j < t.n_hidden; ++j) sum += w2[j * t.n_outputs + i] * hidden[j];
    out[i] = activate(sum);
  }
  return out;
}

inline std::vector<double> forward_fully_connected(const Genome& g, const FullyConnected& t,
                                                   std::span<const double> in) {
  const std::size_t n = t.n_neurons;
  const double* w = g.genes.data();
  const double* b = w + (t.n_inputs + n) * n;
  std::vector<double> prev(n, 0.0), next(n);
  for (std::size_t k = 0; k < t.internal_steps; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double sum = b[i];
      for (std::size_t j = 0; j < t.n_inputs; ++j) sum += w[j * n + i] * in[j];
      for (std::size_t j = 0; j < n; ++j) sum += w[(t.n_inputs + j) * n + i] * prev[j];
      next[i] = activate(sum);
    }
    std::swap(prev, next);
  }
  return {prev.end() - static_cast<std::ptrdiff_t>(t.n_outputs), prev.end()};
}

}  // namespace detail

inline std::vector<double> forward(const Genome& g, const Topology& topo, std::span<const double> in) {
  check_genome(g, topo);
  if (in.size() != n_inputs(topo)) {
    throw TopologyError("network expects " + std::to_string(n_inputs(topo)) + " inputs, got " +
                        std::to_string(in.size()));
  }
  return std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Layered>) {
          return detail::forward_layered(g, t, in);
        } else {
          return detail::forward_fully_connected(g, t, in);
        }
      },
      topo);
}

inline std::vector<double> forward(const Genome& g, const Topology& topo, const NetInput& in) {
  const auto arr = in.to_array();
  return forward(g, topo, std::span<const double>(arr));
}

inline PriceVector decode_prices(std::span<const double> out, EurPerKwh p_scale) {
  PriceVector pv;
  pv.prices.reserve(out.size());
  for (double o : out) pv.prices.push_back((activate(o) + 1.0) / 2.0 * p_scale);
  return pv;
}

// Checkpoint text format:
//   microbroker-genome 1
//   topology layered <inputs> <hidden> <outputs>
//   topology fully_connected <inputs> <neurons> <outputs> <steps>
//   genes <n>
//   <one C99 hex-float per line>
struct Checkpoint {
  Topology topology;
  Genome genome;
  bool operator==(const Checkpoint&) const = default;
};

inline std::string serialize_checkpoint(const Checkpoint& ck) {
  std::ostringstream os;
  os << "microbroker-genome 1\n";
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Layered>) {
          os << "topology layered " << t.n_inputs << ' ' << t.n_hidden << ' ' << t.n_outputs << '\n';
        } else {
          os << "topology fully_connected " << t.n_inputs << ' ' << t.n_neurons << ' ' << t.n_outputs << ' '
             << t.internal_steps << '\n';
        }
      },
      ck.topology);
  os << "genes " << ck.genome.genes.size() << '\n';
  char buf[64];
  for (double v : ck.genome.genes) {
    std::snprintf(buf, sizeof buf, "%a\n", v);
    os << buf;
  }
  return os.str();
}

inline Checkpoint parse_checkpoint(std::istream& in, const std::string& name = "<checkpoint>") {
  auto fail = [&](const std::string& why) { return ParseError(name + ": " + why); };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "microbroker-genome" || version != 1) {
    throw fail("not a microbroker-genome v1 checkpoint");
  }
  std::string key, kind;
  if (!(in >> key >> kind) || key != "topology") throw fail("missing topology line");
  Checkpoint ck;
  if (kind == "layered") {
    Layered t;
    if (!(in >> t.n_inputs >> t.n_hidden >> t.n_outputs)) throw fail("bad layered topology");
    ck.topology = t;
  } else if (kind == "fully_connected") {
    FullyConnected t;
    if (!(in >> t.n_inputs >> t.n_neurons >> t.n_outputs >> t.internal_steps)) {
      throw fail("bad fully_connected topology");
    }
    ck.topology = t;
  } else {
    throw fail("unknown topology '" + kind + "'");
  }
  validate(ck.topology);
  std::size_t n = 0;
  if (!(in >> key >> n) || key != "genes") throw fail("missing genes line");
  ck.genome.genes.reserve(n);
  std::string tok;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> tok)) throw fail("truncated gene list");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v)) throw fail("bad gene '" + tok + "'");
    ck.genome.genes.push_back(v);
  }
  if (in >> tok) throw fail("trailing data after genes");
  check_genome(ck.genome, ck.topology);
  return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write checkpoint '" + path + "'");
  out << serialize_checkpoint(ck);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint '" + path + "'");
  return parse_checkpoint(in, path);
}

}  // namespace microbroker
