#pragma once

// Tunable hardware parameter space: axes, device specs, configurations, grid
// enumeration, snapping and the prohibited-configuration set.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coral {

/// Parameter dimensions. The enumerator value is the index used for
/// correlation weights and per-dimension arrays.
enum class Dimension : std::uint8_t { cpu_freq = 0, cpu_cores, gpu_freq, mem_freq, concurrency };

inline constexpr std::size_t kDimensions = 5;

inline constexpr std::array<Dimension, kDimensions> kAllDimensions = {
    Dimension::cpu_freq, Dimension::cpu_cores, Dimension::gpu_freq, Dimension::mem_freq,
    Dimension::concurrency};

/// Enumeration / sort order, following the device parameter table rows.
inline constexpr std::array<Dimension, kDimensions> kEnumerationOrder = {
    Dimension::cpu_cores, Dimension::cpu_freq, Dimension::gpu_freq, Dimension::mem_freq,
    Dimension::concurrency};

constexpr std::size_t index_of(Dimension d) noexcept { return static_cast<std::size_t>(d); }

constexpr std::string_view to_string(Dimension d) noexcept {
  switch (d) {
    case Dimension::cpu_freq: return "cpu_freq";
    case Dimension::cpu_cores: return "cpu_cores";
    case Dimension::gpu_freq: return "gpu_freq";
    case Dimension::mem_freq: return "mem_freq";
    case Dimension::concurrency: return "concurrency";
  }
  return "?";
}

inline std::optional<Dimension> parse_dimension(std::string_view s) noexcept {
  for (Dimension d : kAllDimensions) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

template <typename T>
using PerDimension = std::array<T, kDimensions>;

/// One point of the 5-dimensional setting space. Frequencies in MHz, cores and
/// concurrency as counts.
struct Configuration {
  int cpu_freq = 0;
  int cpu_cores = 0;
  int gpu_freq = 0;
  int mem_freq = 0;
  int concurrency = 0;

  [[nodiscard]] int get(Dimension d) const noexcept {
    switch (d) {
      case Dimension::cpu_freq: return cpu_freq;
      case Dimension::cpu_cores: return cpu_cores;
      case Dimension::gpu_freq: return gpu_freq;
      case Dimension::mem_freq: return mem_freq;
      case Dimension::concurrency: return concurrency;
    }
    return 0;
  }

  void set(Dimension d, int v) noexcept {
    switch (d) {
      case Dimension::cpu_freq: cpu_freq = v; break;
      case Dimension::cpu_cores: cpu_cores = v; break;
      case Dimension::gpu_freq: gpu_freq = v; break;
      case Dimension::mem_freq: mem_freq = v; break;
      case Dimension::concurrency: concurrency = v; break;
    }
  }

  [[nodiscard]] std::array<int, kDimensions> ordered_key() const noexcept {
    return {cpu_cores, cpu_freq, gpu_freq, mem_freq, concurrency};
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;
  friend bool operator<(const Configuration& a, const Configuration& b) noexcept {
    return a.ordered_key() < b.ordered_key();
  }
};

inline std::string to_string(const Configuration& c) {
  return "(cores=" + std::to_string(c.cpu_cores) + ", cpu=" + std::to_string(c.cpu_freq) +
         ", gpu=" + std::to_string(c.gpu_freq) + ", mem=" + std::to_string(c.mem_freq) +
         ", conc=" + std::to_string(c.concurrency) + ")";
}

/// Allowed discrete values for one dimension; strictly ascending positive integers.
class ParameterAxis {
 public:
  ParameterAxis() = default;

  ParameterAxis(Dimension dim, std::vector<int> values) : dim_(dim), values_(std::move(values)) {
    if (values_.empty()) {
      throw std::invalid_argument("axis " + std::string(to_string(dim_)) + " has no values");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] <= 0) {
        throw std::invalid_argument("axis " + std::string(to_string(dim_)) + " has non-positive value " +
                                    std::to_string(values_[i]));
      }
      if (i > 0 && values_[i] <= values_[i - 1]) {
        throw std::invalid_argument("axis " + std::string(to_string(dim_)) +
                                    " values are not strictly ascending");
      }
    }
  }

  /// min, min+step, ... up to and including max when reachable.
  static ParameterAxis stepped(Dimension dim, int min, int max, int step) {
    if (step <= 0) throw std::invalid_argument("axis step must be positive");
    if (max < min) throw std::invalid_argument("axis max below min");
    std::vector<int> v;
    for (long long x = min; x <= max; x += step) v.push_back(static_cast<int>(x));
    return {dim, std::move(v)};
  }

  [[nodiscard]] Dimension dimension() const noexcept { return dim_; }
  [[nodiscard]] const std::vector<int>& values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] int min() const noexcept { return values_.front(); }
  [[nodiscard]] int max() const noexcept { return values_.back(); }

  [[nodiscard]] bool contains(int v) const noexcept {
    return std::binary_search(values_.begin(), values_.end(), v);
  }

  /// Position of `v` in the value list; `v` must be a member.
  [[nodiscard]] std::size_t index_of(int v) const {
    auto it = std::lower_bound(values_.begin(), values_.end(), v);
    if (it == values_.end() || *it != v) {
      throw std::out_of_range(std::to_string(v) + " is not on axis " + std::string(to_string(dim_)));
    }
    return static_cast<std::size_t>(it - values_.begin());
  }

  friend bool operator==(const ParameterAxis&, const ParameterAxis&) = default;

 private:
  Dimension dim_ = Dimension::cpu_freq;
  std::vector<int> values_{1};
};

/// Nearest allowed value; exact midpoints resolve to the lower neighbour and
/// out-of-range inputs clamp to the ends.
inline int snap(double value, const ParameterAxis& axis) {
  if (!std::isfinite(value)) throw std::invalid_argument("snap: non-finite value");
  const auto& v = axis.values();
  if (value <= v.front()) return v.front();
  if (value >= v.back()) return v.back();
  auto hi = std::lower_bound(v.begin(), v.end(), value,
                             [](int a, double b) { return static_cast<double>(a) < b; });
  if (static_cast<double>(*hi) == value) return *hi;
  auto lo = hi - 1;
  const double below = value - static_cast<double>(*lo);
  const double above = static_cast<double>(*hi) - value;
  return above < below ? *hi : *lo;
}

/// Per-device parameter axes plus the device's "default" preset configuration.
class DeviceSpec {
 public:
  DeviceSpec() = default;

  DeviceSpec(std::string name, std::vector<ParameterAxis> axes, std::optional<Configuration> default_preset = {})
      : name_(std::move(name)), default_preset_(default_preset) {
    if (axes.size() != kDimensions) {
      throw std::invalid_argument("device spec needs exactly 5 axes, got " + std::to_string(axes.size()));
    }
    PerDimension<bool> seen{};
    for (auto& a : axes) {
      const auto i = index_of(a.dimension());
      if (seen[i]) throw std::invalid_argument("duplicate axis " + std::string(to_string(a.dimension())));
      seen[i] = true;
      axes_[i] = std::move(a);
    }
    if (default_preset_) {
      for (Dimension d : kAllDimensions) {
        if (!axis(d).contains(default_preset_->get(d))) {
          throw std::invalid_argument("default preset value for " + std::string(to_string(d)) +
                                      " is not on its axis");
        }
      }
    }
  }

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const ParameterAxis& axis(Dimension d) const noexcept { return axes_[index_of(d)]; }
  [[nodiscard]] const PerDimension<ParameterAxis>& axes() const noexcept { return axes_; }
  [[nodiscard]] const std::optional<Configuration>& default_preset() const noexcept { return default_preset_; }

  [[nodiscard]] std::size_t grid_size() const noexcept {
    std::size_t n = 1;
    for (const auto& a : axes_) n *= a.size();
    return n;
  }

  [[nodiscard]] Configuration min_config() const noexcept {
    Configuration c;
    for (Dimension d : kAllDimensions) c.set(d, axis(d).min());
    return c;
  }

  [[nodiscard]] Configuration max_config() const noexcept {
    Configuration c;
    for (Dimension d : kAllDimensions) c.set(d, axis(d).max());
    return c;
  }

  /// Median allowed value per axis (lower median for even cardinality).
  [[nodiscard]] Configuration mid_config() const noexcept {
    Configuration c;
    for (Dimension d : kAllDimensions) {
      const auto& a = axis(d);
      c.set(d, a.values()[(a.size() - 1) / 2]);
    }
    return c;
  }

  friend bool operator==(const DeviceSpec&, const DeviceSpec&) = default;

 private:
  std::string name_;
  PerDimension<ParameterAxis> axes_{};
  std::optional<Configuration> default_preset_;
};

/// Result of checking a configuration against a spec; lists each offending dimension.
struct ValidationReport {
  std::vector<Dimension> violations;

  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }

  [[nodiscard]] std::string message() const {
    if (ok()) return "ok";
    std::string s = "value not allowed for:";
    for (Dimension d : violations) {
      s += ' ';
      s += to_string(d);
    }
    return s;
  }
};

inline ValidationReport validate(const Configuration& c, const DeviceSpec& spec) {
  ValidationReport r;
  for (Dimension d : kAllDimensions) {
    if (!spec.axis(d).contains(c.get(d))) r.violations.push_back(d);
  }
  return r;
}

/// Cartesian product of all axes in lexicographic enumeration order.
inline std::vector<Configuration> enumerate_grid(const DeviceSpec& spec) {
  std::vector<Configuration> out;
  out.reserve(spec.grid_size());
  const auto& cores = spec.axis(Dimension::cpu_cores).values();
  const auto& cpu = spec.axis(Dimension::cpu_freq).values();
  const auto& gpu = spec.axis(Dimension::gpu_freq).values();
  const auto& mem = spec.axis(Dimension::mem_freq).values();
  const auto& conc = spec.axis(Dimension::concurrency).values();
  for (int a : cores)
    for (int b : cpu)
      for (int g : gpu)
        for (int m : mem)
          for (int k : conc) out.push_back(Configuration{b, a, g, m, k});
  return out;
}

/// Configurations proven infeasible during one tuning run. Only grows.
class ProhibitedSet {
 public:
  /// Returns true when `c` was not yet present.
  bool add(const Configuration& c) { return entries_.insert(c).second; }
  [[nodiscard]] bool contains(const Configuration& c) const { return entries_.count(c) != 0; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] const std::set<Configuration>& entries() const noexcept { return entries_; }

 private:
  std::set<Configuration> entries_;
};

namespace devices {

/// Jetson Xavier NX: 5 x 8 x 6 x 3 x 3 = 2,160 configurations.
inline DeviceSpec xavier_nx() {
  return DeviceSpec("xavier_nx",
                    {ParameterAxis::stepped(Dimension::cpu_cores, 2, 6, 1),
                     ParameterAxis::stepped(Dimension::cpu_freq, 1190, 1890, 100),
                     ParameterAxis::stepped(Dimension::gpu_freq, 510, 1010, 100),
                     ParameterAxis(Dimension::mem_freq, {1500, 1666, 1866}),
                     ParameterAxis::stepped(Dimension::concurrency, 1, 3, 1)},
                    Configuration{1490, 4, 710, 1500, 1});
}

/// Jetson Orin Nano: 5 x 8 x 4 x 2 x 5 = 1,600 configurations.
inline DeviceSpec orin_nano() {
  return DeviceSpec("orin_nano",
                    {ParameterAxis::stepped(Dimension::cpu_cores, 2, 6, 1),
                     ParameterAxis::stepped(Dimension::cpu_freq, 806, 1506, 100),
                     ParameterAxis::stepped(Dimension::gpu_freq, 306, 606, 100),
                     ParameterAxis(Dimension::mem_freq, {2133, 3199}),
                     ParameterAxis::stepped(Dimension::concurrency, 1, 5, 1)},
                    Configuration{1106, 4, 406, 2133, 1});
}

inline std::optional<DeviceSpec> builtin(std::string_view name) {
  if (name == "xavier_nx") return xavier_nx();
  if (name == "orin_nano") return orin_nano();
  return std::nullopt;
}

}  // namespace devices
}  // namespace coral
