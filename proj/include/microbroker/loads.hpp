#pragma once

#include <random>
#include <string>
#include <variant>
#include <vector>

#include "microbroker/common.hpp"
#include "microbroker/contracts.hpp"

namespace microbroker {

struct OperationState {
  Watts power = 0.0;
  Seconds duration = 1;
  Seconds start_delay_max = 0;       // tolerated wait before the state starts
  double interruption_severity = 0;  // discomfort weight of an interruption
  bool operator==(const OperationState&) const = default;
};

// Start probability per second = willingness * starts_per_day / 86400.
struct Probabilistic {
  double omega_star = 1.0;
  double decay = 1.0;  // multiplicative on completion
  Seconds recovery = 0;
  double starts_per_day = 1.0;
  bool operator==(const Probabilistic&) const = default;
};

struct EventTrace {
  std::vector<EpochSeconds> starts;  // sorted
  bool operator==(const EventTrace&) const = default;
};

using UsageModel = std::variant<Probabilistic, EventTrace>;

struct ApplianceSpec {
  std::string name;
  std::vector<OperationState> states;
  EurPerKwh psi = kInf;  // +inf: inflexible, accepts any price
  UsageModel usage = Probabilistic{};
  bool operator==(const ApplianceSpec&) const = default;

  bool inflexible() const noexcept { return std::isinf(psi); }
};

inline void validate(const ApplianceSpec& spec, const std::string& field) {
  if (spec.name.empty()) throw ValidationError(field + ".name", "must not be empty");
  if (spec.states.empty()) throw ValidationError(field + ".states", "must not be empty");
  for (std::size_t i = 0; i < spec.states.size(); ++i) {
    const auto& s = spec.states[i];
    const std::string f = field + ".states[" + std::to_string(i) + "]";
    if (!(s.power >= 0.0) || !std::isfinite(s.power)) throw ValidationError(f + ".power", "must be >= 0");
    if (s.duration < 1) throw ValidationError(f + ".duration", "must be >= 1 second");
    if (s.start_delay_max < 0) throw ValidationError(f + ".start_delay_max", "must be >= 0");
    if (!(s.interruption_severity >= 0.0)) {
      throw ValidationError(f + ".interruption_severity", "must be >= 0");
    }
  }
  if (!(spec.psi >= 0.0)) throw ValidationError(field + ".psi", "must be >= 0");
  if (const auto* p = std::get_if<Probabilistic>(&spec.usage)) {
    if (!(p->omega_star >= 0.0 && p->omega_star <= 1.0)) {
      throw ValidationError(field + ".usage.omega_star", "must lie in [0, 1]");
    }
    if (!(p->decay >= 0.0 && p->decay <= 1.0)) {
      throw ValidationError(field + ".usage.decay", "must lie in [0, 1]");
    }
    if (p->recovery < 0) throw ValidationError(field + ".usage.recovery", "must be >= 0");
    if (!(p->starts_per_day >= 0.0)) throw ValidationError(field + ".usage.starts_per_day", "must be >= 0");
  } else {
    const auto& tr = std::get<EventTrace>(spec.usage);
    for (std::size_t i = 1; i < tr.starts.size(); ++i) {
      if (tr.starts[i] <= tr.starts[i - 1]) {
        throw ValidationError(field + ".usage.events", "must be strictly increasing");
      }
    }
  }
}

namespace phase {
struct Idle {};
struct WaitingToStart {
  std::size_t state = 0;
  EpochSeconds since = 0;
};
struct Running {
  std::size_t state = 0;
  Seconds elapsed = 0;
};
struct Interrupted {
  std::size_t state = 0;
  Seconds elapsed = 0;
  EpochSeconds since = 0;
};
}  // namespace phase

using LoadPhase = std::variant<phase::Idle, phase::WaitingToStart, phase::Running, phase::Interrupted>;

enum class LoadEventKind {
  StartRequested,
  StateStarted,
  OperationCompleted,
  Abandoned,
  Interrupted,  // value = interruption severity
  Resumed,      // value = downtime seconds
};

enum class InterruptCause { Terminated, NotRenewed };

inline const char* to_string(LoadEventKind k) {
  switch (k) {
    case LoadEventKind::StartRequested: return "start_requested";
    case LoadEventKind::StateStarted: return "state_started";
    case LoadEventKind::OperationCompleted: return "completed";
    case LoadEventKind::Abandoned: return "abandoned";
    case LoadEventKind::Interrupted: return "interrupted";
    case LoadEventKind::Resumed: return "resumed";
  }
  return "?";
}

struct LoadEvent {
  EpochSeconds t = 0;
  LoadId load = 0;
  LoadEventKind kind = LoadEventKind::StartRequested;
  std::size_t state = 0;
  double value = 0.0;
};

struct LoadAgent {
  LoadId id = 0;
  ApplianceSpec spec;
  LoadPhase phase = phase::Idle{};
  double willingness = 1.0;
  double recovery_rate = 0.0;  // willingness per second while below omega*
  std::size_t trace_cursor = 0;

  std::uint64_t cbp = 0;
  std::uint64_t cnbp = 0;
  double discomfort = 0.0;

  // Availability bookkeeping: uptime accumulates between failures.
  Seconds uptime_open = 0;
  std::vector<Seconds> up_segments;
  std::vector<Seconds> down_segments;

  bool idle() const noexcept { return std::holds_alternative<phase::Idle>(phase); }
  bool wants_power() const noexcept { return !idle(); }

  // State the load currently needs power for.
  const OperationState* current_state() const {
    return std::visit(
        [this](const auto& p) -> const OperationState* {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, phase::Idle>) {
            return nullptr;
          } else {
            return &spec.states[p.state];
          }
        },
        phase);
  }

  Seconds remaining_in_state() const {
    return std::visit(
        [this](const auto& p) -> Seconds {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, phase::Idle>) {
            return 0;
          } else if constexpr (std::is_same_v<P, phase::WaitingToStart>) {
            return spec.states[p.state].duration;
          } else {
            return spec.states[p.state].duration - p.elapsed;
          }
        },
        phase);
  }
};

inline LoadAgent make_agent(LoadId id, ApplianceSpec spec) {
  LoadAgent a;
  a.id = id;
  a.spec = std::move(spec);
  if (const auto* p = std::get_if<Probabilistic>(&a.spec.usage)) a.willingness = p->omega_star;
  return a;
}

// Whether an Idle agent requests to start during [t, t + dt).
template <class Rng>
bool sample_start(LoadAgent& agent, EpochSeconds t, Seconds dt, Rng& rng) {
  if (!agent.idle()) return false;
  if (auto* trace = std::get_if<EventTrace>(&agent.spec.usage)) {
    auto& i = agent.trace_cursor;
    // events that fell while the load was busy are dropped
    while (i < trace->starts.size() && trace->starts[i] < t) ++i;
    if (i < trace->starts.size() && trace->starts[i] < t + dt) {
      ++i;
      return true;
    }
    return false;
  }
  const auto& p = std::get<Probabilistic>(agent.spec.usage);
  if (agent.willingness <= 0.0 || p.starts_per_day <= 0.0) return false;
  const double prob = std::min(1.0, agent.willingness * p.starts_per_day / 86400.0 * static_cast<double>(dt));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < prob;
}

// Multiplicative decay on completion, then linear recovery to omega* over the
// configured recovery window.
inline void decay_willingness(LoadAgent& agent) {
  const auto* p = std::get_if<Probabilistic>(&agent.spec.usage);
  if (!p) return;
  agent.willingness *= p->decay;
  if (p->recovery <= 0) {
    agent.willingness = p->omega_star;
    agent.recovery_rate = 0.0;
  } else {
    agent.recovery_rate = (p->omega_star - agent.willingness) / static_cast<double>(p->recovery);
  }
}

inline void recover_willingness(LoadAgent& agent, Seconds dt) {
  const auto* p = std::get_if<Probabilistic>(&agent.spec.usage);
  if (!p || agent.recovery_rate <= 0.0) return;
  agent.willingness += agent.recovery_rate * static_cast<double>(dt);
  if (agent.willingness >= p->omega_star) {
    agent.willingness = p->omega_star;
    agent.recovery_rate = 0.0;
  }
}

inline LoadEvent request_start(LoadAgent& agent, EpochSeconds t) {
  agent.phase = phase::WaitingToStart{0, t};
  return {t, agent.id, LoadEventKind::StartRequested, 0, 0.0};
}

// Best-fit: the shortest affordable duration that covers the remaining state
// time; otherwise the longest affordable one (the state re-purchases later).
inline QuantityVector select_sla(const OperationState& state, Seconds remaining, const PriceVector& prices,
                                 const SlaCatalog& catalog, EurPerKwh psi) {
  QuantityVector q{std::vector<Watts>(catalog.size(), 0.0)};
  if (state.power <= 0.0) return q;
  std::optional<std::size_t> fit, longest;
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    if (!(prices[k] <= psi)) continue;
    longest = k;
    if (!fit && catalog.durations[k] >= remaining) fit = k;
  }
  if (const auto pick = fit ? fit : longest) q.power[*pick] = state.power;
  return q;
}

namespace detail {
inline LoadEvent interrupt(LoadAgent& agent, std::size_t state, Seconds elapsed, EpochSeconds t, double sev) {
  agent.up_segments.push_back(agent.uptime_open);
  agent.uptime_open = 0;
  agent.discomfort += sev;
  agent.phase = phase::Interrupted{state, elapsed, t};
  return {t, agent.id, LoadEventKind::Interrupted, state, sev};
}
}  // namespace detail

// The broker terminated a contract that was powering the current state.
inline std::optional<LoadEvent> on_contract_terminated(LoadAgent& agent, EpochSeconds t) {
  if (auto* r = std::get_if<phase::Running>(&agent.phase)) {
    return detail::interrupt(agent, r->state, r->elapsed, t, agent.spec.states[r->state].interruption_severity);
  }
  return std::nullopt;
}

// Advances the agent by one trading cycle of length dt. `powered` is whether
// the agent holds a contract covering its current state for [t, t + dt).
inline std::vector<LoadEvent> step_load(LoadAgent& agent, bool powered, EpochSeconds t, Seconds dt) {
  std::vector<LoadEvent> events;
  const EpochSeconds t_next = t + dt;

  auto run = [&](std::size_t state, Seconds elapsed) {
    elapsed += dt;
    agent.uptime_open += dt;
    const auto& spec_state = agent.spec.states[state];
    if (elapsed < spec_state.duration) {
      agent.phase = phase::Running{state, elapsed};
    } else if (state + 1 < agent.spec.states.size()) {
      agent.phase = phase::WaitingToStart{state + 1, t_next};
    } else {
      agent.phase = phase::Idle{};
      decay_willingness(agent);
      events.push_back({t_next, agent.id, LoadEventKind::OperationCompleted, state, 0.0});
    }
  };

  if (std::holds_alternative<phase::Idle>(agent.phase)) {
    recover_willingness(agent, dt);
  } else if (auto* w = std::get_if<phase::WaitingToStart>(&agent.phase)) {
    const auto state = w->state;
    if (powered) {
      events.push_back({t, agent.id, LoadEventKind::StateStarted, state, 0.0});
      run(state, 0);
    } else if (t_next - w->since > agent.spec.states[state].start_delay_max) {
      agent.phase = phase::Idle{};
      events.push_back({t_next, agent.id, LoadEventKind::Abandoned, state, 0.0});
    }
  } else if (auto* r = std::get_if<phase::Running>(&agent.phase)) {
    const auto state = r->state;
    const auto elapsed = r->elapsed;
    if (powered) {
      run(state, elapsed);
    } else {
      events.push_back(
          detail::interrupt(agent, state, elapsed, t, agent.spec.states[state].interruption_severity));
    }
  } else if (auto* i = std::get_if<phase::Interrupted>(&agent.phase)) {
    if (powered) {
      const auto downtime = t - i->since;
      agent.down_segments.push_back(downtime);
      events.push_back({t, agent.id, LoadEventKind::Resumed, i->state, static_cast<double>(downtime)});
      run(i->state, i->elapsed);
    }
  }
  return events;
}

// Closes open availability segments at the end of a run.
inline void finalize_agent(LoadAgent& agent, EpochSeconds t_end) {
  if (auto* i = std::get_if<phase::Interrupted>(&agent.phase)) {
    agent.down_segments.push_back(t_end - i->since);
  }
  if (agent.uptime_open > 0) {
    agent.up_segments.push_back(agent.uptime_open);
    agent.uptime_open = 0;
  }
}

}  // namespace microbroker
