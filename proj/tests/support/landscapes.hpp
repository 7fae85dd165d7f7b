#pragma once

// Seeded synthetic landscapes with narrow dual-constraint feasible regions,
// used by the convergence suites.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "coral/config_space.hpp"
#include "coral/device.hpp"
#include "coral/optimizer.hpp"

namespace coral::testing {

struct Landscape {
  DeviceSpec spec;
  SyntheticSurfaceParams params;
  ScenarioConstraints constraints;
  std::size_t feasible_count = 0;
};

/// Random surface parameters around the device's typical operating envelope.
inline SyntheticSurfaceParams random_surface(const DeviceSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  SyntheticSurfaceParams p;
  const bool orin = spec.name() == "orin_nano";
  p.peak_throughput = orin ? u(70.0, 100.0) : u(30.0, 44.0);
  p.idle_power = orin ? u(2200.0, 3200.0) : u(2600.0, 3600.0);
  p.cpu_power_coeff = u(1500.0, 4000.0);
  p.gpu_power_coeff = u(1500.0, 4000.0);
  p.mem_power_coeff = u(200.0, 800.0);
  p.concurrency_power_coeff = u(200.0, 800.0);
  p.bottleneck_ratio = u(2.5, 5.0);
  p.concurrency_saturation = u(0.4, 1.5);
  p.noise_stddev_fraction = 0.0;
  p.failure_predicate = false;
  p.seed = seed;
  return p;
}

/// Throughput target at a seeded quantile; power budget chosen so that a
/// seeded 1-5% slice of the grid is feasible.
inline std::optional<Landscape> make_landscape(const DeviceSpec& spec, std::uint64_t seed) {
  Landscape l{spec, random_surface(spec, seed), {}, 0};
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const auto grid = enumerate_grid(spec);
  std::vector<SurfacePoint> pts;
  pts.reserve(grid.size());
  for (const auto& c : grid) pts.push_back(synthetic_surface(l.params, spec, c));

  std::vector<double> tputs;
  for (const auto& p : pts) tputs.push_back(p.throughput_fps);
  std::sort(tputs.begin(), tputs.end());
  const double q = u(0.5, 0.85);
  const double target = tputs[static_cast<std::size_t>(q * static_cast<double>(tputs.size() - 1))];

  std::vector<double> powers;
  for (const auto& p : pts) {
    if (p.throughput_fps >= target) powers.push_back(p.power_mw);
  }
  std::sort(powers.begin(), powers.end());
  const double frac = u(0.01, 0.05);
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(frac * static_cast<double>(grid.size())));
  if (powers.size() < k) return std::nullopt;
  const double budget = powers[k - 1];

  l.constraints.throughput_target_fps = target;
  l.constraints.power_budget_mw = budget;
  for (const auto& p : pts) {
    if (l.constraints.satisfied_by(p.throughput_fps, p.power_mw)) ++l.feasible_count;
  }
  if (l.feasible_count == 0 || l.feasible_count * 20 > grid.size()) return std::nullopt;
  return l;
}

}  // namespace coral::testing
