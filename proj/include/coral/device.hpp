#pragma once

// Device backends: something that turns a Configuration into measured
// throughput (fps) and power (mW).

#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "coral/config_space.hpp"

namespace coral {

/// Averaged observation of one configuration.
struct MeasurementSample {
  Configuration config;
  double throughput_fps = 0.0;
  double power_mw = 0.0;
  int sample_count = 0;

  [[nodiscard]] double efficiency() const noexcept { return throughput_fps / power_mw; }

  friend bool operator==(const MeasurementSample&, const MeasurementSample&) = default;
};

/// The configuration could not run (out of memory, runtime error).
struct HardwareFailure {
  Configuration config;
  std::string reason = "infeasible_hardware";

  friend bool operator==(const HardwareFailure&, const HardwareFailure&) = default;
};

using Measurement = std::variant<MeasurementSample, HardwareFailure>;

inline bool succeeded(const Measurement& m) noexcept { return std::holds_alternative<MeasurementSample>(m); }

/// Warm-up then per-second readings, averaged. Readings are synthetic draws
/// unless `realtime` is set, in which case the backend sleeps through them.
struct MeasurementProtocol {
  int warmup_seconds = 2;
  int readings = 3;
  bool realtime = false;

  void validate() const {
    if (warmup_seconds < 0) throw std::invalid_argument("protocol warmup_seconds must be >= 0");
    if (readings < 1) throw std::invalid_argument("protocol readings must be >= 1");
  }

  friend bool operator==(const MeasurementProtocol&, const MeasurementProtocol&) = default;
};

/// Raised for configurations a backend cannot answer (not a hardware failure).
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DeviceBackend {
 public:
  virtual ~DeviceBackend() = default;

  [[nodiscard]] virtual const DeviceSpec& spec() const noexcept = 0;
  virtual Measurement measure(const Configuration& config, const MeasurementProtocol& protocol) = 0;

  /// Every configuration the backend can answer without side effects, or
  /// nullopt when exhaustive enumeration is not meaningful.
  [[nodiscard]] virtual std::optional<std::vector<Configuration>> enumerable_configs() const = 0;

  /// True when concurrent measure() calls are safe.
  [[nodiscard]] virtual bool reentrant() const noexcept = 0;

 protected:
  void require_valid(const Configuration& c) const {
    auto report = validate(c, spec());
    if (!report.ok()) {
      throw BackendError("configuration " + to_string(c) + " rejected by " + spec().name() + ": " +
                         report.message());
    }
  }
};

// --------------------------------------------------------------------------
// Table replay

/// One row of a profile table; invalid rows carry no metrics.
struct ProfileRecord {
  Configuration config;
  double throughput_fps = 0.0;
  double power_mw = 0.0;
  bool valid = false;

  friend bool operator==(const ProfileRecord&, const ProfileRecord&) = default;
};

/// Profile rows keyed and ordered by configuration.
struct ProfileTable {
  std::string device;
  std::map<Configuration, ProfileRecord> records;

  friend bool operator==(const ProfileTable&, const ProfileTable&) = default;
};

/// Axes made of the distinct values present in each column of the table.
inline DeviceSpec spec_from_profile(const ProfileTable& table) {
  if (table.records.empty()) throw std::invalid_argument("profile table is empty");
  std::vector<ParameterAxis> axes;
  for (Dimension d : kAllDimensions) {
    std::set<int> values;
    for (const auto& [cfg, rec] : table.records) values.insert(cfg.get(d));
    axes.emplace_back(d, std::vector<int>(values.begin(), values.end()));
  }
  return DeviceSpec(table.device, std::move(axes));
}

/// Replays recorded metrics. Reentrant: measure() only reads the table.
class TableBackend final : public DeviceBackend {
 public:
  TableBackend(ProfileTable table, DeviceSpec spec) : table_(std::move(table)), spec_(std::move(spec)) {
    for (const auto& [cfg, rec] : table_.records) require_valid(cfg);
  }

  explicit TableBackend(ProfileTable table) : table_(std::move(table)), spec_(spec_from_profile(table_)) {}

  [[nodiscard]] const DeviceSpec& spec() const noexcept override { return spec_; }
  [[nodiscard]] const ProfileTable& table() const noexcept { return table_; }

  /// Throws BackendError for configurations missing from the table.
  Measurement measure(const Configuration& config, const MeasurementProtocol& protocol) override {
    auto it = table_.records.find(config);
    if (it == table_.records.end()) {
      throw BackendError("configuration " + to_string(config) + " is not in the profile table");
    }
    if (!it->second.valid) return HardwareFailure{config};
    return MeasurementSample{config, it->second.throughput_fps, it->second.power_mw, protocol.readings};
  }

  [[nodiscard]] std::optional<std::vector<Configuration>> enumerable_configs() const override {
    std::vector<Configuration> out;
    out.reserve(table_.records.size());
    for (const auto& [cfg, rec] : table_.records) out.push_back(cfg);
    return out;
  }

  [[nodiscard]] bool reentrant() const noexcept override { return true; }

 private:
  ProfileTable table_;
  DeviceSpec spec_;
};

// --------------------------------------------------------------------------
// Synthetic response surface

struct SyntheticSurfaceParams {
  double peak_throughput = 36.0;       // fps at the all-max configuration
  double idle_power = 3000.0;          // mW
  double cpu_power_coeff = 3000.0;     // mW, scales cores * cpu_freq^2
  double gpu_power_coeff = 2800.0;     // mW, scales gpu_freq^2
  double mem_power_coeff = 400.0;      // mW, scales mem_freq
  double concurrency_power_coeff = 400.0;
  double bottleneck_ratio = 2.5;       // GPU capped at ratio * cores * cpu_freq (normalized)
  double concurrency_saturation = 0.9;
  double noise_stddev_fraction = 0.0;
  std::uint64_t seed = 0;
  /// Concurrency at axis max together with mem_freq at axis min fails to run.
  bool failure_predicate = true;

  void validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be >= 0");
    };
    if (!(peak_throughput > 0.0)) throw std::invalid_argument("peak_throughput must be > 0");
    if (!(idle_power > 0.0)) throw std::invalid_argument("idle_power must be > 0");
    nonneg(cpu_power_coeff, "cpu_power_coeff");
    nonneg(gpu_power_coeff, "gpu_power_coeff");
    nonneg(mem_power_coeff, "mem_power_coeff");
    nonneg(concurrency_power_coeff, "concurrency_power_coeff");
    nonneg(bottleneck_ratio, "bottleneck_ratio");
    nonneg(concurrency_saturation, "concurrency_saturation");
    if (!(noise_stddev_fraction >= 0.0 && noise_stddev_fraction <= 0.2)) {
      throw std::invalid_argument("noise_stddev_fraction must be in [0, 0.2]");
    }
  }

  friend bool operator==(const SyntheticSurfaceParams&, const SyntheticSurfaceParams&) = default;
};

struct SurfacePoint {
  double throughput_fps = 0.0;
  double power_mw = 0.0;
};

/// Noiseless surface. Every input is normalized by its axis maximum:
///
///   gpu_eff    = min(gpu, bottleneck_ratio * cores * cpu)
///   throughput = peak * gpu_eff * (0.5 + 0.5 mem) * sat(conc) / sat(conc_max),
///                sat(c) = 1 - exp(-concurrency_saturation * c)
///   power      = idle + cpu_coeff * cores * cpu^2 + gpu_coeff * gpu^2
///                + mem_coeff * mem + conc_coeff * conc
///
/// Concurrency enters the saturation term as a raw count.
inline SurfacePoint synthetic_surface(const SyntheticSurfaceParams& p, const DeviceSpec& spec,
                                      const Configuration& c) {
  auto norm = [&](Dimension d) {
    return static_cast<double>(c.get(d)) / static_cast<double>(spec.axis(d).max());
  };
  const double cpu = norm(Dimension::cpu_freq);
  const double cores = norm(Dimension::cpu_cores);
  const double gpu = norm(Dimension::gpu_freq);
  const double mem = norm(Dimension::mem_freq);
  const double conc = norm(Dimension::concurrency);

  const double gpu_eff = std::min(gpu, p.bottleneck_ratio * cores * cpu);
  const double sat_max =
      1.0 - std::exp(-p.concurrency_saturation * static_cast<double>(spec.axis(Dimension::concurrency).max()));
  const double sat = 1.0 - std::exp(-p.concurrency_saturation * static_cast<double>(c.concurrency));
  const double conc_factor = sat_max > 0.0 ? sat / sat_max : 1.0;

  SurfacePoint out;
  out.throughput_fps = p.peak_throughput * gpu_eff * (0.5 + 0.5 * mem) * conc_factor;
  out.power_mw = p.idle_power + p.cpu_power_coeff * cores * cpu * cpu + p.gpu_power_coeff * gpu * gpu +
                 p.mem_power_coeff * mem + p.concurrency_power_coeff * conc;
  return out;
}

/// Synthetic backend with optional seeded multiplicative Gaussian noise per
/// reading. Not reentrant: readings consume a shared noise stream.
class SyntheticBackend final : public DeviceBackend {
 public:
  SyntheticBackend(DeviceSpec spec, SyntheticSurfaceParams params)
      : spec_(std::move(spec)), params_(params), rng_(params.seed) {
    params_.validate();
  }

  [[nodiscard]] const DeviceSpec& spec() const noexcept override { return spec_; }
  [[nodiscard]] const SyntheticSurfaceParams& params() const noexcept { return params_; }

  [[nodiscard]] bool fails(const Configuration& c) const noexcept {
    return params_.failure_predicate && c.concurrency == spec_.axis(Dimension::concurrency).max() &&
           c.mem_freq == spec_.axis(Dimension::mem_freq).min();
  }

  Measurement measure(const Configuration& config, const MeasurementProtocol& protocol) override {
    protocol.validate();
    require_valid(config);
    if (fails(config)) return HardwareFailure{config};

    const auto core = synthetic_surface(params_, spec_, config);
    for (int s = 0; s < protocol.warmup_seconds; ++s) {
      (void)reading(core);
      pace(protocol);
    }
    double tput = 0.0;
    double power = 0.0;
    for (int s = 0; s < protocol.readings; ++s) {
      const auto r = reading(core);
      tput += r.throughput_fps;
      power += r.power_mw;
      pace(protocol);
    }
    const double n = static_cast<double>(protocol.readings);
    return MeasurementSample{config, tput / n, power / n, protocol.readings};
  }

  [[nodiscard]] std::optional<std::vector<Configuration>> enumerable_configs() const override {
    if (params_.noise_stddev_fraction > 0.0) return std::nullopt;
    return enumerate_grid(spec_);
  }

  [[nodiscard]] bool reentrant() const noexcept override { return params_.noise_stddev_fraction == 0.0; }

 private:
  SurfacePoint reading(const SurfacePoint& core) {
    if (params_.noise_stddev_fraction == 0.0) return core;
    std::normal_distribution<double> noise(0.0, params_.noise_stddev_fraction);
    SurfacePoint r;
    r.throughput_fps = std::max(0.0, core.throughput_fps * (1.0 + noise(rng_)));
    r.power_mw = std::max(1e-3, core.power_mw * (1.0 + noise(rng_)));
    return r;
  }

  static void pace(const MeasurementProtocol& protocol) {
    if (protocol.realtime) std::this_thread::sleep_for(std::chrono::seconds(1));
  }

  DeviceSpec spec_;
  SyntheticSurfaceParams params_;
  std::mt19937_64 rng_;
};

/// Placeholder for a physical-device backend (apply settings, run the
/// workload, read the power meter). No hardware driver ships with this
/// library; measure() always throws.
class HardwareAdapterBackend final : public DeviceBackend {
 public:
  explicit HardwareAdapterBackend(DeviceSpec spec) : spec_(std::move(spec)) {}

  [[nodiscard]] const DeviceSpec& spec() const noexcept override { return spec_; }

  Measurement measure(const Configuration&, const MeasurementProtocol&) override {
    throw BackendError("hardware adapter for " + spec_.name() + " is not implemented");
  }

  [[nodiscard]] std::optional<std::vector<Configuration>> enumerable_configs() const override {
    return std::nullopt;
  }
  [[nodiscard]] bool reentrant() const noexcept override { return false; }

 private:
  DeviceSpec spec_;
};

}  // namespace coral
