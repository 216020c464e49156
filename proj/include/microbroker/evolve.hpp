#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "microbroker/engine.hpp"
#include "microbroker/neuro.hpp"

namespace microbroker {

// Offspring composition per generation; the five rates sum to 1.
struct EvolutionParams {
  std::size_t population_size = 50;
  std::size_t generations = 500;
  double elite_rate = 0.15;
  double mutation_rate = 0.40;
  double crossover_rate = 0.30;
  double random_creation_rate = 0.05;
  double random_selection_rate = 0.10;
  double mutation_sigma = 0.2;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
};

inline void validate(const EvolutionParams& p) {
  if (p.population_size < 2) throw ValidationError("population_size", "must be >= 2");
  const double rates[] = {p.elite_rate, p.mutation_rate, p.crossover_rate, p.random_creation_rate,
                          p.random_selection_rate};
  for (double r : rates)
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("rates", "each rate must lie in [0, 1]");
  const double sum = std::accumulate(std::begin(rates), std::end(rates), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("rates", "must sum to 1");
  if (!(p.mutation_sigma >= 0.0) || !std::isfinite(p.mutation_sigma)) {
    throw ValidationError("mutation_sigma", "must be finite and >= 0");
  }
}

struct Composition {
  std::size_t elite = 0, mutation = 0, crossover = 0, random_new = 0, random_survivor = 0;
  std::size_t total() const { return elite + mutation + crossover + random_new + random_survivor; }
};

// Floor every count, keep at least one elite, hand the remainder to mutation.
inline Composition composition(const EvolutionParams& p) {
  const auto n = static_cast<double>(p.population_size);
  auto fl = [n](double rate) { return static_cast<std::size_t>(std::floor(rate * n + 1e-9)); };
  Composition c;
  c.elite = std::max<std::size_t>(1, fl(p.elite_rate));
  c.crossover = fl(p.crossover_rate);
  c.random_new = fl(p.random_creation_rate);
  c.random_survivor = fl(p.random_selection_rate);
  const std::size_t fixed = c.elite + c.crossover + c.random_new + c.random_survivor;
  c.mutation = fixed >= p.population_size ? 0 : p.population_size - fixed;
  return c;
}

struct FitnessRecord {
  std::size_t genome = 0;
  ProfitBreakdown components;
  double fitness = 0.0;
};

inline double penalized_fitness(const ProfitBreakdown& p, double penalty) {
  return (p.income_ugrid + p.income_feedin) - (p.cost_supply + penalty * p.cost_reimbursement);
}

inline FitnessRecord evaluate_fitness(const Genome& g, const Topology& topo, const ScenarioConfig& scenario) {
  RunOptions opts;
  opts.keep_ledger = opts.keep_events = opts.keep_contracts = false;
  auto result = run_simulation(scenario, NeuralPolicy{topo, g}, opts);
  FitnessRecord rec;
  rec.components = result.report.profit;
  rec.fitness = penalized_fitness(rec.components, scenario.market.reimbursement_penalty);
  return rec;
}

template <class Rng>
Genome random_genome(const Topology& topo, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Genome g;
  g.genes.resize(gene_count(topo));
  for (auto& v : g.genes) v = u(rng);
  return g;
}

template <class Rng>
Genome mutate(const Genome& parent, double sigma, Rng& rng) {
  std::normal_distribution<double> n(0.0, sigma);
  Genome g = parent;
  for (auto& v : g.genes) {
    const double next = v + n(rng);
    if (std::isfinite(next)) v = next;
  }
  return g;
}

// Single-point crossover; the cut lies strictly inside the gene vector.
template <class Rng>
Genome crossover(const Genome& a, const Genome& b, Rng& rng) {
  Genome child = a;
  if (a.genes.size() < 2) return child;
  std::uniform_int_distribution<std::size_t> cut(1, a.genes.size() - 1);
  const std::size_t k = cut(rng);
  std::copy(b.genes.begin() + static_cast<std::ptrdiff_t>(k), b.genes.end(),
            child.genes.begin() + static_cast<std::ptrdiff_t>(k));
  return child;
}

struct Individual {
  Genome genome;
  FitnessRecord record;
  bool evaluated = false;
};

// Ranked by fitness, descending; ties keep their previous order.
inline void rank(std::vector<Individual>& pop) {
  std::stable_sort(pop.begin(), pop.end(),
                   [](const Individual& a, const Individual& b) { return a.record.fitness > b.record.fitness; });
}

// Builds the next population from a ranked one. Elites keep their evaluation.
template <class Rng>
std::vector<Individual> next_generation(const std::vector<Individual>& ranked, const Topology& topo,
                                        const EvolutionParams& params, Rng& rng) {
  const auto comp = composition(params);
  const std::size_t n = ranked.size();
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  std::uniform_int_distribution<std::size_t> any_elite(0, std::min(comp.elite, n) - 1);
  std::bernoulli_distribution coin(0.5);
  auto tournament = [&]() -> const Genome& {
    const std::size_t a = any(rng), b = any(rng);
    return ranked[std::min(a, b)].genome;  // lower index ranks higher
  };

  std::vector<Individual> next;
  next.reserve(params.population_size);
  for (std::size_t i = 0; i < comp.elite && i < n; ++i) next.push_back(ranked[i]);
  for (std::size_t i = 0; i < comp.mutation; ++i) {
    const Genome& parent = coin(rng) ? ranked[any_elite(rng)].genome : ranked[any(rng)].genome;
    next.push_back({mutate(parent, params.mutation_sigma, rng), {}, false});
  }
  for (std::size_t i = 0; i < comp.crossover; ++i) {
    const Genome& a = tournament();
    const Genome& b = tournament();
    next.push_back({crossover(a, b, rng), {}, false});
  }
  for (std::size_t i = 0; i < comp.random_new; ++i) next.push_back({random_genome(topo, rng), {}, false});
  for (std::size_t i = 0; i < comp.random_survivor; ++i) next.push_back(ranked[any(rng)]);
  while (next.size() < params.population_size) next.push_back(ranked[any(rng)]);
  return next;
}

// Evaluates every unevaluated individual; results land at their own index.
inline void evaluate_population(std::vector<Individual>& pop, const Topology& topo, const ScenarioConfig& scenario,
                                unsigned threads) {
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < pop.size(); ++i)
    if (!pop[i].evaluated) todo.push_back(i);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < todo.size(); k += stride) {
      auto& ind = pop[todo[k]];
      ind.record = evaluate_fitness(ind.genome, topo, scenario);
      ind.record.genome = todo[k];
      ind.evaluated = true;
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, todo.size())));
  if (threads <= 1) {
    work(0, 1);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
}

struct GenerationStats {
  std::size_t generation = 0;
  double best = 0.0;
  double median = 0.0;
  double worst = 0.0;
  Euro best_reimbursement = 0.0;
};

inline GenerationStats summarize(const std::vector<Individual>& ranked, std::size_t generation) {
  GenerationStats s;
  s.generation = generation;
  s.best = ranked.front().record.fitness;
  s.worst = ranked.back().record.fitness;
  const std::size_t n = ranked.size();
  s.median = n % 2 ? ranked[n / 2].record.fitness
                   : 0.5 * (ranked[n / 2 - 1].record.fitness + ranked[n / 2].record.fitness);
  s.best_reimbursement = ranked.front().record.components.cost_reimbursement;
  return s;
}

struct EvolutionResult {
  Genome champion;
  FitnessRecord champion_record;
  GenerationStats initial;               // random population before any breeding
  std::vector<GenerationStats> history;  // one row per bred generation 1..G
};

// Generation 0 is the random initial population; each of the G generations
// breeds, evaluates and ranks once.
inline EvolutionResult evolve(const EvolutionParams& params, const ScenarioConfig& scenario, const Topology& topo,
                              const std::function<void(const GenerationStats&)>& on_generation = {}) {
  validate(params);
  validate(topo);
  check_policy(NeuralPolicy{topo, Genome{std::vector<double>(gene_count(topo), 0.0)}}, scenario.catalog);

  std::mt19937_64 rng(params.seed);
  std::vector<Individual> pop;
  pop.reserve(params.population_size);
  for (std::size_t i = 0; i < params.population_size; ++i) pop.push_back({random_genome(topo, rng), {}, false});
  evaluate_population(pop, topo, scenario, params.threads);
  rank(pop);

  EvolutionResult out;
  out.initial = summarize(pop, 0);
  for (std::size_t g = 1; g <= params.generations; ++g) {
    pop = next_generation(pop, topo, params, rng);
    evaluate_population(pop, topo, scenario, params.threads);
    rank(pop);
    out.history.push_back(summarize(pop, g));
    if (on_generation) on_generation(out.history.back());
  }
  out.champion = pop.front().genome;
  out.champion_record = pop.front().record;
  return out;
}

}  // namespace microbroker
