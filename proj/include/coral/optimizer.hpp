#pragma once

// Covariance-guided online search: reward evaluation, correlation analysis
// over a sliding window, and correlation-weighted configuration proposals,
// repeated for a fixed iteration budget.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coral/config_space.hpp"
#include "coral/device.hpp"
#include "coral/weights.hpp"

namespace coral {

struct ScenarioConstraints {
  double throughput_target_fps = 30.0;
  double power_budget_mw = 6500.0;
  double power_floor_mw = 0.0;
  std::size_t window_size = 5;
  std::size_t iteration_budget = 10;

  void validate() const {
    if (!(throughput_target_fps > 0.0)) throw std::invalid_argument("throughput_target_fps must be > 0");
    if (!(power_floor_mw >= 0.0)) throw std::invalid_argument("power_floor_mw must be >= 0");
    if (!(power_budget_mw > power_floor_mw)) {
      throw std::invalid_argument("power_budget_mw must exceed power_floor_mw");
    }
    if (window_size < 2) throw std::invalid_argument("window_size must be >= 2");
    if (iteration_budget < 1) throw std::invalid_argument("iteration_budget must be >= 1");
  }

  [[nodiscard]] bool satisfied_by(double throughput_fps, double power_mw) const noexcept {
    return throughput_fps >= throughput_target_fps && power_mw <= power_budget_mw;
  }
  [[nodiscard]] bool satisfied_by(const MeasurementSample& s) const noexcept {
    return satisfied_by(s.throughput_fps, s.power_mw);
  }

  friend bool operator==(const ScenarioConstraints&, const ScenarioConstraints&) = default;
};

/// Stand-in throughput for the penalty branch when a configuration delivered 0 fps.
inline constexpr double kZeroThroughputGuard = 1e-6;

/// Efficiency tau/p when both constraints hold (boundaries included);
/// otherwise records the configuration in `prohibited` and returns -(p/tau).
inline double reward(const MeasurementSample& sample, const ScenarioConstraints& constraints,
                     ProhibitedSet& prohibited) {
  if (sample.throughput_fps < constraints.throughput_target_fps ||
      sample.power_mw > constraints.power_budget_mw) {
    prohibited.add(sample.config);
    const double t = sample.throughput_fps > 0.0 ? sample.throughput_fps : kZeroThroughputGuard;
    return -(sample.power_mw / t);
  }
  return sample.throughput_fps / sample.power_mw;
}

/// Score for a configuration that failed to run: strictly below every
/// reward seen so far.
inline double failure_penalty(double worst_reward_so_far) { return std::min(worst_reward_so_far, 0.0) - 1.0; }

struct Leader {
  MeasurementSample sample;
  double reward = 0.0;

  [[nodiscard]] const Configuration& config() const noexcept { return sample.config; }
  friend bool operator==(const Leader&, const Leader&) = default;
};

enum class HeuristicMode : std::uint8_t { cores, freq, both, off };

constexpr std::string_view to_string(HeuristicMode m) noexcept {
  switch (m) {
    case HeuristicMode::cores: return "cores";
    case HeuristicMode::freq: return "freq";
    case HeuristicMode::both: return "both";
    case HeuristicMode::off: return "off";
  }
  return "?";
}

inline std::optional<HeuristicMode> parse_heuristic(std::string_view s) noexcept {
  for (auto m : {HeuristicMode::cores, HeuristicMode::freq, HeuristicMode::both, HeuristicMode::off}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

enum class Phase : std::uint8_t { bootstrap, explore, search, fallback };

constexpr std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::bootstrap: return "bootstrap";
    case Phase::explore: return "explore";
    case Phase::search: return "search";
    case Phase::fallback: return "fallback";
  }
  return "?";
}

/// One iteration of a tuning run. Search-phase fields (weights, direction,
/// heuristic, collisions) describe how the configuration was proposed.
struct TraceEntry {
  std::size_t iteration = 0;
  Phase phase = Phase::bootstrap;
  Configuration config;
  Measurement measurement;
  double reward = 0.0;
  bool aside = false;
  std::optional<CorrelationWeights> weights;
  std::optional<Configuration> proposed;  // before the collision rule
  bool descending = false;
  bool heuristic_applied = false;
  std::size_t collision_steps = 0;
  std::optional<double> best_reward;  // leader reward after this iteration
  std::size_t prohibited_size = 0;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct CoralState {
  explicit CoralState(std::size_t window_size = 5) : window(window_size) {}

  std::optional<Leader> best;
  std::optional<Leader> second_best;
  SampleWindow window;
  ProhibitedSet prohibited;
  std::set<Configuration> evaluated;
  bool aside = false;
  std::optional<MeasurementSample> last_sample;
  std::size_t iteration = 0;
  std::vector<TraceEntry> trace;
};

/// Keeps the top two distinct configurations by reward. Ties keep the
/// earlier entry ahead. Returns true when the best reward strictly improved
/// (or the first best was set).
inline bool update_leaders(CoralState& state, const MeasurementSample& sample, double r) {
  Leader incoming{sample, r};
  if (!state.best) {
    state.best = incoming;
    return true;
  }
  if (state.best->config() == sample.config) {
    if (r > state.best->reward) {
      state.best = incoming;
      return true;
    }
    return false;
  }
  if (state.second_best && state.second_best->config() == sample.config) {
    if (r <= state.second_best->reward) return false;
    state.second_best = incoming;
    if (state.second_best->reward > state.best->reward) {
      std::swap(*state.best, *state.second_best);
      return true;
    }
    return false;
  }
  if (r > state.best->reward) {
    state.second_best = state.best;
    state.best = incoming;
    return true;
  }
  if (!state.second_best || r > state.second_best->reward) state.second_best = incoming;
  return false;
}

struct Proposal {
  Configuration config;
  Configuration proposed;  // after stepping and heuristic, before collision handling
  bool descending = false;
  bool heuristic_applied = false;
  std::size_t collision_steps = 0;
  bool fallback = false;
};

namespace detail {

inline std::size_t grid_distance(const Configuration& a, const Configuration& b, const DeviceSpec& spec) {
  std::size_t d = 0;
  for (Dimension dim : kAllDimensions) {
    const auto& axis = spec.axis(dim);
    const auto ia = axis.index_of(a.get(dim));
    const auto ib = axis.index_of(b.get(dim));
    d += ia > ib ? ia - ib : ib - ia;
  }
  return d;
}

/// Grid configuration closest to `from` (ties to the lexicographically
/// smaller one) accepted by `ok`.
template <typename Pred>
std::optional<Configuration> nearest_where(const Configuration& from, const DeviceSpec& spec, Pred ok) {
  std::optional<Configuration> found;
  std::size_t found_dist = std::numeric_limits<std::size_t>::max();
  for (const auto& c : enumerate_grid(spec)) {
    if (!ok(c)) continue;
    const auto d = grid_distance(from, c, spec);
    if (d < found_dist) {
      found = c;
      found_dist = d;
    }
  }
  return found;
}

}  // namespace detail

/// Next configuration from the two leaders and the correlation weights.
///
/// Per dimension: gamma = max(alpha, beta), step = |best - second| * gamma / 2.
/// Bounds (l, h) = (best, second), swapped when `aside`. When the last sample
/// beat the throughput target with power at or above the floor the proposal
/// moves to l - step, otherwise to h + step; each value snaps onto its axis.
/// If the best configuration already beats the target with power above the
/// floor, CPU cores (per `heuristic`) drop to the minimum and concurrency
/// rises to the maximum.
///
/// A proposal that is prohibited or was already evaluated is moved along a
/// single dimension in the search direction: one grid step along each
/// dimension in descending gamma order, then two steps, and so on, for at
/// most grid-size attempts. Dimensions pinned by the heuristic stay put.
/// Failing that the best configuration is re-proposed, or, if it is
/// prohibited, the nearest configuration that is not.
inline Proposal propose_next(const CoralState& state, const CorrelationWeights& weights,
                             const ScenarioConstraints& constraints, const DeviceSpec& spec,
                             HeuristicMode heuristic = HeuristicMode::cores) {
  if (!state.best || !state.second_best) {
    throw std::logic_error("propose_next requires both a best and a second-best configuration");
  }
  const Configuration& x = state.best->config();
  const Configuration& y = state.second_best->config();
  const auto gamma = weights.gamma();

  Proposal p;
  const auto& last = state.last_sample ? *state.last_sample : state.best->sample;
  p.descending = last.throughput_fps > constraints.throughput_target_fps &&
                 last.power_mw >= constraints.power_floor_mw;

  for (Dimension d : kAllDimensions) {
    const double xi = x.get(d);
    const double yi = y.get(d);
    const double step = 0.5 * std::abs(xi - yi) * gamma[index_of(d)];
    const double lo = state.aside ? yi : xi;
    const double hi = state.aside ? xi : yi;
    const double v = p.descending ? lo - step : hi + step;
    p.proposed.set(d, snap(v, spec.axis(d)));
  }

  const auto& best = state.best->sample;
  if (heuristic != HeuristicMode::off && best.power_mw > constraints.power_floor_mw &&
      best.throughput_fps > constraints.throughput_target_fps) {
    if (heuristic == HeuristicMode::cores || heuristic == HeuristicMode::both) {
      p.proposed.cpu_cores = spec.axis(Dimension::cpu_cores).min();
    }
    if (heuristic == HeuristicMode::freq || heuristic == HeuristicMode::both) {
      p.proposed.cpu_freq = spec.axis(Dimension::cpu_freq).min();
    }
    p.proposed.concurrency = spec.axis(Dimension::concurrency).max();
    p.heuristic_applied = true;
  }

  auto blocked = [&](const Configuration& c) {
    return state.prohibited.contains(c) || state.evaluated.count(c) != 0;
  };
  p.config = p.proposed;
  if (!blocked(p.config)) return p;

  std::array<Dimension, kDimensions> order = kAllDimensions;
  std::stable_sort(order.begin(), order.end(),
                   [&](Dimension a, Dimension b) { return gamma[index_of(a)] > gamma[index_of(b)]; });
  const int dir = p.descending ? -1 : 1;
  auto pinned = [&](Dimension d) {
    if (d == Dimension::concurrency) return true;
    if (d == Dimension::cpu_cores) return heuristic == HeuristicMode::cores || heuristic == HeuristicMode::both;
    if (d == Dimension::cpu_freq) return heuristic == HeuristicMode::freq || heuristic == HeuristicMode::both;
    return false;
  };
  std::size_t attempts = 0;
  const std::size_t max_attempts = spec.grid_size();
  bool moved = true;
  for (long long k = 1; moved && attempts < max_attempts; ++k) {
    moved = false;
    for (Dimension d : order) {
      if (attempts >= max_attempts) break;
      if (p.heuristic_applied && pinned(d)) continue;
      const auto& axis = spec.axis(d);
      const auto idx = static_cast<long long>(axis.index_of(p.proposed.get(d))) + dir * k;
      if (idx < 0 || idx >= static_cast<long long>(axis.size())) continue;
      moved = true;
      ++attempts;
      Configuration cand = p.proposed;
      cand.set(d, axis.values()[static_cast<std::size_t>(idx)]);
      if (!blocked(cand)) {
        p.config = cand;
        p.collision_steps = attempts;
        return p;
      }
    }
  }

  p.fallback = true;
  p.collision_steps = attempts;
  if (!state.prohibited.contains(x)) {
    p.config = x;
    return p;
  }
  if (auto c = detail::nearest_where(p.proposed, spec, [&](const Configuration& c) { return !blocked(c); })) {
    p.config = *c;
  } else if (auto c2 = detail::nearest_where(p.proposed, spec,
                                             [&](const Configuration& c) { return !state.prohibited.contains(c); })) {
    p.config = *c2;
  } else {
    p.config = x;
  }
  return p;
}

/// How the first two configurations are chosen.
struct InitPolicy {
  enum class Kind : std::uint8_t { mid_max, random_pair, explicit_pair };
  Kind kind = Kind::mid_max;
  std::optional<std::pair<Configuration, Configuration>> pair;

  static InitPolicy mid_max() { return {}; }
  static InitPolicy random_pair() { return {Kind::random_pair, std::nullopt}; }
  static InitPolicy explicit_pair(const Configuration& a, const Configuration& b) {
    return {Kind::explicit_pair, std::make_pair(a, b)};
  }

  friend bool operator==(const InitPolicy&, const InitPolicy&) = default;
};

struct RunOptions {
  InitPolicy init;
  HeuristicMode heuristic = HeuristicMode::cores;
  std::uint64_t seed = 0;
  MeasurementProtocol protocol;
};

/// Outcome of any search method; baselines use the same shape.
struct TuningResult {
  std::string method;
  std::optional<MeasurementSample> best_sample;
  double reward = -std::numeric_limits<double>::infinity();
  bool feasible = false;
  double efficiency = 0.0;
  std::vector<TraceEntry> trace;
  std::size_t iterations_used = 0;

  [[nodiscard]] std::optional<Configuration> best_config() const {
    if (!best_sample) return std::nullopt;
    return best_sample->config;
  }
};

inline TuningResult make_result(std::string method, const std::optional<Leader>& best,
                                const ScenarioConstraints& constraints) {
  TuningResult r;
  r.method = std::move(method);
  if (best) {
    r.best_sample = best->sample;
    r.reward = best->reward;
    r.feasible = constraints.satisfied_by(best->sample);
    r.efficiency = best->sample.efficiency();
  }
  return r;
}

namespace detail {

inline std::optional<Configuration> random_unexplored(const CoralState& state, const DeviceSpec& spec,
                                                      std::mt19937_64& rng) {
  std::vector<Configuration> pool;
  for (const auto& c : enumerate_grid(spec)) {
    if (!state.prohibited.contains(c) && state.evaluated.count(c) == 0) pool.push_back(c);
  }
  if (pool.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return pool[pick(rng)];
}

}  // namespace detail

/// Runs exactly `constraints.iteration_budget` measure/reward/correlate/propose
/// iterations against `backend` and returns the best configuration by reward.
/// Callers must check `feasible`: when nothing met both constraints the
/// result holds the least-penalized configuration.
inline TuningResult run(DeviceBackend& backend, const ScenarioConstraints& constraints,
                        const RunOptions& options = {}) {
  constraints.validate();
  options.protocol.validate();
  const DeviceSpec& spec = backend.spec();
  std::mt19937_64 rng(options.seed);
  CoralState state(constraints.window_size);
  double worst_reward = 0.0;

  std::optional<std::pair<Configuration, Configuration>> init;
  switch (options.init.kind) {
    case InitPolicy::Kind::mid_max: init = std::make_pair(spec.mid_config(), spec.max_config()); break;
    case InitPolicy::Kind::explicit_pair:
      if (!options.init.pair) throw std::invalid_argument("explicit init policy without a pair");
      for (const auto* c : {&options.init.pair->first, &options.init.pair->second}) {
        auto report = validate(*c, spec);
        if (!report.ok()) throw std::invalid_argument("init configuration invalid: " + report.message());
      }
      init = options.init.pair;
      break;
    case InitPolicy::Kind::random_pair: break;
  }

  auto unexplored = [&](const Configuration& c) {
    return !state.prohibited.contains(c) && state.evaluated.count(c) == 0;
  };

  for (std::size_t it = 1; it <= constraints.iteration_budget; ++it) {
    state.iteration = it;
    TraceEntry e;
    e.iteration = it;
    e.aside = state.aside;

    std::optional<Configuration> next;
    if (it <= 2) {
      e.phase = Phase::bootstrap;
      if (init) {
        const auto& c = it == 1 ? init->first : init->second;
        if (unexplored(c)) next = c;
      }
      if (!next) next = detail::random_unexplored(state, spec, rng);
    } else if (!state.best || !state.second_best) {
      e.phase = Phase::explore;
      next = detail::random_unexplored(state, spec, rng);
    } else {
      e.phase = Phase::search;
      const auto w = correlation_weights(state.window);
      const auto p = propose_next(state, w, constraints, spec, options.heuristic);
      e.weights = w;
      e.proposed = p.proposed;
      e.descending = p.descending;
      e.heuristic_applied = p.heuristic_applied;
      e.collision_steps = p.collision_steps;
      if (p.fallback) e.phase = Phase::fallback;
      next = p.config;
    }
    if (!next) {
      // Whole grid explored or prohibited.
      e.phase = Phase::fallback;
      next = state.best ? state.best->config() : spec.mid_config();
    }

    e.config = *next;
    e.measurement = backend.measure(*next, options.protocol);
    state.evaluated.insert(*next);

    bool improved = false;
    if (const auto* s = std::get_if<MeasurementSample>(&e.measurement)) {
      e.reward = reward(*s, constraints, state.prohibited);
      state.window.push(*s);
      state.last_sample = *s;
      improved = update_leaders(state, *s, e.reward);
    } else {
      e.reward = failure_penalty(worst_reward);
      state.prohibited.add(*next);
    }
    worst_reward = std::min(worst_reward, e.reward);
    state.aside = !improved;

    if (state.best) e.best_reward = state.best->reward;
    e.prohibited_size = state.prohibited.size();
    state.trace.push_back(std::move(e));
  }

  auto result = make_result("coral", state.best, constraints);
  result.trace = std::move(state.trace);
  result.iterations_used = result.trace.size();
  return result;
}

}  // namespace coral
