#pragma once

// Comparison methods scored on the same reward scale as the online search:
// exhaustive oracle, budget-matched random search and fixed presets.

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "coral/config_space.hpp"
#include "coral/device.hpp"
#include "coral/optimizer.hpp"

namespace coral {

class BaselineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Higher reward wins; equal rewards go to the lexicographically smaller configuration.
inline bool outranks(const Leader& a, const Leader& b) {
  if (a.reward != b.reward) return a.reward > b.reward;
  return a.config() < b.config();
}

}  // namespace detail

/// Evaluates every configuration the backend can enumerate and returns the
/// best by reward: the max-efficiency feasible configuration when one
/// exists, else the least-penalized one. Hardware failures are skipped.
inline TuningResult oracle_search(DeviceBackend& backend, const ScenarioConstraints& constraints,
                                  const MeasurementProtocol& protocol = {}) {
  constraints.validate();
  auto configs = backend.enumerable_configs();
  if (!configs) {
    throw BaselineError("oracle requires an enumerable backend (profile table or noiseless synthetic)");
  }
  if (configs->empty()) throw BaselineError("oracle: empty profile");

  std::optional<Leader> best;
  std::size_t evaluated = 0;
  ProhibitedSet scratch;
  for (const auto& c : *configs) {
    const auto m = backend.measure(c, protocol);
    ++evaluated;
    const auto* s = std::get_if<MeasurementSample>(&m);
    if (!s) continue;
    Leader cand{*s, reward(*s, constraints, scratch)};
    if (!best || detail::outranks(cand, *best)) best = cand;
  }
  if (!best) throw BaselineError("oracle: profile has no valid configurations");
  auto r = make_result("oracle", best, constraints);
  r.iterations_used = evaluated;
  return r;
}

/// Configurations in the order random_search visits them.
inline std::vector<Configuration> random_trial_order(const DeviceSpec& spec, std::size_t trials,
                                                     std::uint64_t seed) {
  auto grid = enumerate_grid(spec);
  std::mt19937_64 rng(seed);
  std::shuffle(grid.begin(), grid.end(), rng);
  grid.resize(std::min(trials, grid.size()));
  return grid;
}

/// `trials` grid configurations drawn uniformly without replacement, each
/// scored like the online search; the best is returned.
inline TuningResult random_search(DeviceBackend& backend, const ScenarioConstraints& constraints,
                                  std::size_t trials, std::uint64_t seed,
                                  const MeasurementProtocol& protocol = {}) {
  constraints.validate();
  if (trials < 1) throw std::invalid_argument("random_search needs at least one trial");

  std::optional<Leader> best;
  ProhibitedSet prohibited;
  std::vector<TraceEntry> trace;
  double worst_reward = 0.0;
  std::size_t it = 0;
  for (const auto& c : random_trial_order(backend.spec(), trials, seed)) {
    TraceEntry e;
    e.iteration = ++it;
    e.phase = Phase::explore;
    e.config = c;
    e.measurement = backend.measure(c, protocol);
    if (const auto* s = std::get_if<MeasurementSample>(&e.measurement)) {
      e.reward = reward(*s, constraints, prohibited);
      Leader cand{*s, e.reward};
      if (!best || detail::outranks(cand, *best)) best = cand;
    } else {
      e.reward = failure_penalty(worst_reward);
      prohibited.add(c);
    }
    worst_reward = std::min(worst_reward, e.reward);
    if (best) e.best_reward = best->reward;
    e.prohibited_size = prohibited.size();
    trace.push_back(std::move(e));
  }
  auto r = make_result("random" + std::to_string(trials), best, constraints);
  r.trace = std::move(trace);
  r.iterations_used = r.trace.size();
  return r;
}

enum class PresetKind : std::uint8_t { max_power, default_mode };

struct PresetMode {
  PresetKind kind = PresetKind::max_power;
  Configuration config;

  [[nodiscard]] std::string name() const { return kind == PresetKind::max_power ? "max_power" : "default"; }
};

/// Every axis at its maximum.
inline PresetMode max_power_preset(const DeviceSpec& spec) { return {PresetKind::max_power, spec.max_config()}; }

/// The default configuration shipped with the device spec.
inline PresetMode default_preset(const DeviceSpec& spec) {
  if (!spec.default_preset()) {
    throw BaselineError("device spec '" + spec.name() + "' has no default preset");
  }
  return {PresetKind::default_mode, *spec.default_preset()};
}

/// One measurement of the preset configuration. Hardware failure is
/// propagated as BaselineError.
inline TuningResult preset_eval(DeviceBackend& backend, const PresetMode& mode,
                                const ScenarioConstraints& constraints, const MeasurementProtocol& protocol = {}) {
  constraints.validate();
  auto report = validate(mode.config, backend.spec());
  if (!report.ok()) throw BaselineError("preset " + mode.name() + " invalid: " + report.message());
  const auto m = backend.measure(mode.config, protocol);
  const auto* s = std::get_if<MeasurementSample>(&m);
  if (!s) throw BaselineError("preset " + mode.name() + " failed on hardware: " + to_string(mode.config));
  ProhibitedSet scratch;
  Leader l{*s, reward(*s, constraints, scratch)};
  auto r = make_result(mode.name(), l, constraints);
  r.iterations_used = 1;
  return r;
}

}  // namespace coral
