#pragma once

// JSON file schemas: device specs, synthetic surface parameters, scenarios
// and tuning results.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "coral/config_space.hpp"
#include "coral/device.hpp"
#include "coral/optimizer.hpp"

namespace coral {

using nlohmann::json;

/// Schema violation; the message names the offending field path.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
}

namespace detail {

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(origin, std::string("malformed JSON: ") + e.what());
  }
}

inline void require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw SchemaError(field, "expected an object");
}

inline void reject_unknown(const json& j, const std::string& field, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) throw SchemaError(field.empty() ? key : field + "." + key, "unknown field");
  }
}

inline std::string path_of(const std::string& parent, std::string_view key) {
  return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

inline const json& require(const json& j, const std::string& parent, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path_of(parent, key), "missing required field");
  return *it;
}

inline double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw SchemaError(field, "expected a number");
  return v.get<double>();
}

inline long long as_integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw SchemaError(field, "expected an integer");
  return v.get<long long>();
}

inline std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw SchemaError(field, "expected a string");
  return v.get<std::string>();
}

inline bool as_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw SchemaError(field, "expected a boolean");
  return v.get<bool>();
}

template <typename F>
void optional_field(const json& j, const std::string& parent, std::string_view key, F&& assign) {
  if (auto it = j.find(key); it != j.end()) assign(*it, path_of(parent, key));
}

}  // namespace detail

// --------------------------------------------------------------------------
// Configuration

inline json to_json(const Configuration& c) {
  return json{{"cpu_cores", c.cpu_cores}, {"cpu_freq", c.cpu_freq}, {"gpu_freq", c.gpu_freq},
              {"mem_freq", c.mem_freq}, {"concurrency", c.concurrency}};
}

inline Configuration configuration_from_json(const json& j, const std::string& field) {
  detail::require_object(j, field);
  detail::reject_unknown(j, field, {"cpu_cores", "cpu_freq", "gpu_freq", "mem_freq", "concurrency"});
  Configuration c;
  for (Dimension d : kAllDimensions) {
    const auto key = to_string(d);
    c.set(d, static_cast<int>(detail::as_integer(detail::require(j, field, key), detail::path_of(field, key))));
  }
  return c;
}

// --------------------------------------------------------------------------
// Device spec
//
// {
//   "device_name": "xavier_nx",
//   "axes": {
//     "cpu_freq": {"min": 1190, "max": 1890, "step": 100},
//     "mem_freq": [1500, 1666, 1866],
//     ...all five dimensions...
//   },
//   "default_preset": {"cpu_cores": 4, "cpu_freq": 1490, ...}   (optional)
// }

inline json to_json(const DeviceSpec& spec) {
  json axes = json::object();
  for (Dimension d : kAllDimensions) axes[std::string(to_string(d))] = spec.axis(d).values();
  json j{{"device_name", spec.name()}, {"axes", axes}};
  if (spec.default_preset()) j["default_preset"] = to_json(*spec.default_preset());
  return j;
}

inline DeviceSpec device_spec_from_json(const json& j) {
  detail::require_object(j, "device spec");
  detail::reject_unknown(j, "", {"device_name", "axes", "default_preset"});
  const auto name = detail::as_string(detail::require(j, "", "device_name"), "device_name");
  const auto& axes_json = detail::require(j, "", "axes");
  detail::require_object(axes_json, "axes");
  detail::reject_unknown(axes_json, "axes", {"cpu_freq", "cpu_cores", "gpu_freq", "mem_freq", "concurrency"});

  std::vector<ParameterAxis> axes;
  for (Dimension d : kAllDimensions) {
    const auto field = "axes." + std::string(to_string(d));
    const auto& a = detail::require(axes_json, "axes", to_string(d));
    try {
      if (a.is_array()) {
        std::vector<int> values;
        for (std::size_t i = 0; i < a.size(); ++i) {
          values.push_back(static_cast<int>(detail::as_integer(a[i], field + "[" + std::to_string(i) + "]")));
        }
        axes.emplace_back(d, std::move(values));
      } else if (a.is_object()) {
        detail::reject_unknown(a, field, {"min", "max", "step"});
        const auto lo = detail::as_integer(detail::require(a, field, "min"), field + ".min");
        const auto hi = detail::as_integer(detail::require(a, field, "max"), field + ".max");
        const auto step = detail::as_integer(detail::require(a, field, "step"), field + ".step");
        axes.push_back(ParameterAxis::stepped(d, static_cast<int>(lo), static_cast<int>(hi), static_cast<int>(step)));
      } else {
        throw SchemaError(field, "expected a value list or {min, max, step}");
      }
    } catch (const std::invalid_argument& e) {
      throw SchemaError(field, e.what());
    }
  }
  std::optional<Configuration> preset;
  detail::optional_field(j, "", "default_preset",
                         [&](const json& v, const std::string& f) { preset = configuration_from_json(v, f); });
  try {
    return DeviceSpec(name, std::move(axes), preset);
  } catch (const std::invalid_argument& e) {
    throw SchemaError("default_preset", e.what());
  }
}

/// "builtin:<name>" or a path to a device spec file.
inline DeviceSpec load_device_spec(const std::string& ref) {
  if (ref.rfind("builtin:", 0) == 0) {
    const auto name = ref.substr(8);
    if (auto s = devices::builtin(name)) return *s;
    throw SchemaError("device_spec", "unknown built-in device '" + name + "'");
  }
  return device_spec_from_json(detail::parse_json_text(read_file(ref), ref));
}

/// Hash of the canonical JSON form, independent of file formatting.
inline std::string spec_hash(const DeviceSpec& spec) { return hex64(fnv1a64(to_json(spec).dump())); }

// --------------------------------------------------------------------------
// Synthetic surface parameters (all fields optional; defaults apply)

inline json to_json(const SyntheticSurfaceParams& p) {
  return json{{"peak_throughput", p.peak_throughput},
              {"idle_power", p.idle_power},
              {"cpu_power_coeff", p.cpu_power_coeff},
              {"gpu_power_coeff", p.gpu_power_coeff},
              {"mem_power_coeff", p.mem_power_coeff},
              {"concurrency_power_coeff", p.concurrency_power_coeff},
              {"bottleneck_ratio", p.bottleneck_ratio},
              {"concurrency_saturation", p.concurrency_saturation},
              {"noise_stddev_fraction", p.noise_stddev_fraction},
              {"seed", p.seed},
              {"failure_predicate", p.failure_predicate}};
}

inline SyntheticSurfaceParams synthetic_params_from_json(const json& j) {
  detail::require_object(j, "synthetic params");
  detail::reject_unknown(j, "",
                         {"peak_throughput", "idle_power", "cpu_power_coeff", "gpu_power_coeff", "mem_power_coeff",
                          "concurrency_power_coeff", "bottleneck_ratio", "concurrency_saturation",
                          "noise_stddev_fraction", "seed", "failure_predicate"});
  SyntheticSurfaceParams p;
  auto num = [&](std::string_view key, double& out) {
    detail::optional_field(j, "", key, [&](const json& v, const std::string& f) { out = detail::as_number(v, f); });
  };
  num("peak_throughput", p.peak_throughput);
  num("idle_power", p.idle_power);
  num("cpu_power_coeff", p.cpu_power_coeff);
  num("gpu_power_coeff", p.gpu_power_coeff);
  num("mem_power_coeff", p.mem_power_coeff);
  num("concurrency_power_coeff", p.concurrency_power_coeff);
  num("bottleneck_ratio", p.bottleneck_ratio);
  num("concurrency_saturation", p.concurrency_saturation);
  num("noise_stddev_fraction", p.noise_stddev_fraction);
  detail::optional_field(j, "", "seed", [&](const json& v, const std::string& f) {
    const auto s = detail::as_integer(v, f);
    if (s < 0) throw SchemaError(f, "must be >= 0");
    p.seed = static_cast<std::uint64_t>(s);
  });
  detail::optional_field(j, "", "failure_predicate",
                         [&](const json& v, const std::string& f) { p.failure_predicate = detail::as_bool(v, f); });
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("synthetic params", e.what());
  }
  return p;
}

inline SyntheticSurfaceParams load_synthetic_params(const std::string& path) {
  return synthetic_params_from_json(detail::parse_json_text(read_file(path), path));
}

// --------------------------------------------------------------------------
// Scenario
//
// {
//   "device_spec": "builtin:xavier_nx" | "<path>",     (optional for table backends)
//   "backend": "table:<path>" | "synthetic" | "synthetic:<params-file>",
//   "synthetic_params": {...},                         (optional inline params)
//   "constraints": {"throughput_target_fps": 30, "power_budget_mw": 6500,
//                   "power_floor_mw": 0, "window_size": 5, "iteration_budget": 10},
//   "init_policy": "mid_max" | "random_pair" | {"explicit": [cfg, cfg]},
//   "heuristic": "cores" | "freq" | "both" | "off",
//   "protocol": {"warmup_seconds": 2, "readings": 3},
//   "seed": 0
// }
//
// Relative paths resolve against the scenario file's directory.

struct BackendRef {
  enum class Kind : std::uint8_t { table, synthetic, adapter };
  Kind kind = Kind::synthetic;
  std::string path;  // profile CSV or params file; empty means built-in params
};

inline BackendRef parse_backend_ref(const std::string& s, const std::string& field = "backend") {
  if (s.rfind("table:", 0) == 0 && s.size() > 6) return {BackendRef::Kind::table, s.substr(6)};
  if (s == "synthetic") return {BackendRef::Kind::synthetic, {}};
  if (s.rfind("synthetic:", 0) == 0 && s.size() > 10) return {BackendRef::Kind::synthetic, s.substr(10)};
  if (s == "adapter") return {BackendRef::Kind::adapter, {}};
  throw SchemaError(field, "expected table:<path>, synthetic[:<params-file>] or adapter, got '" + s + "'");
}

struct Scenario {
  std::optional<std::string> device_spec;
  BackendRef backend;
  std::optional<SyntheticSurfaceParams> synthetic_params;
  ScenarioConstraints constraints;
  InitPolicy init;
  HeuristicMode heuristic = HeuristicMode::cores;
  MeasurementProtocol protocol;
  std::uint64_t seed = 0;
  std::string hash;  // of the source bytes
};

inline Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  detail::require_object(j, "scenario");
  detail::reject_unknown(j, "", {"device_spec", "backend", "synthetic_params", "constraints", "init_policy",
                                 "heuristic", "protocol", "seed"});
  Scenario s;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? (base_dir / path).string() : p;
  };

  detail::optional_field(j, "", "device_spec", [&](const json& v, const std::string& f) {
    auto ref = detail::as_string(v, f);
    s.device_spec = ref.rfind("builtin:", 0) == 0 ? ref : resolve(ref);
  });
  s.backend = parse_backend_ref(detail::as_string(detail::require(j, "", "backend"), "backend"));
  if (!s.backend.path.empty()) s.backend.path = resolve(s.backend.path);
  detail::optional_field(j, "", "synthetic_params", [&](const json& v, const std::string& f) {
    try {
      s.synthetic_params = synthetic_params_from_json(v);
    } catch (const SchemaError& e) {
      throw SchemaError(f + "." + e.field(), e.what());
    }
  });

  const auto& c = detail::require(j, "", "constraints");
  detail::require_object(c, "constraints");
  detail::reject_unknown(c, "constraints", {"throughput_target_fps", "power_budget_mw", "power_floor_mw",
                                            "window_size", "iteration_budget"});
  s.constraints.throughput_target_fps =
      detail::as_number(detail::require(c, "constraints", "throughput_target_fps"), "constraints.throughput_target_fps");
  s.constraints.power_budget_mw =
      detail::as_number(detail::require(c, "constraints", "power_budget_mw"), "constraints.power_budget_mw");
  detail::optional_field(c, "constraints", "power_floor_mw", [&](const json& v, const std::string& f) {
    s.constraints.power_floor_mw = detail::as_number(v, f);
  });
  auto count = [&](std::string_view key, std::size_t& out) {
    detail::optional_field(c, "constraints", key, [&](const json& v, const std::string& f) {
      const auto n = detail::as_integer(v, f);
      if (n < 0) throw SchemaError(f, "must be >= 0");
      out = static_cast<std::size_t>(n);
    });
  };
  count("window_size", s.constraints.window_size);
  count("iteration_budget", s.constraints.iteration_budget);
  try {
    s.constraints.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("constraints", e.what());
  }

  detail::optional_field(j, "", "init_policy", [&](const json& v, const std::string& f) {
    if (v.is_string()) {
      const auto name = v.get<std::string>();
      if (name == "mid_max") {
        s.init = InitPolicy::mid_max();
      } else if (name == "random_pair") {
        s.init = InitPolicy::random_pair();
      } else {
        throw SchemaError(f, "expected mid_max, random_pair or {\"explicit\": [a, b]}");
      }
      return;
    }
    detail::require_object(v, f);
    detail::reject_unknown(v, f, {"explicit"});
    const auto& pair = detail::require(v, f, "explicit");
    if (!pair.is_array() || pair.size() != 2) throw SchemaError(f + ".explicit", "expected two configurations");
    s.init = InitPolicy::explicit_pair(configuration_from_json(pair[0], f + ".explicit[0]"),
                                       configuration_from_json(pair[1], f + ".explicit[1]"));
  });
  detail::optional_field(j, "", "heuristic", [&](const json& v, const std::string& f) {
    auto m = parse_heuristic(detail::as_string(v, f));
    if (!m) throw SchemaError(f, "expected cores, freq, both or off");
    s.heuristic = *m;
  });
  detail::optional_field(j, "", "protocol", [&](const json& v, const std::string& f) {
    detail::require_object(v, f);
    detail::reject_unknown(v, f, {"warmup_seconds", "readings", "realtime"});
    detail::optional_field(v, f, "warmup_seconds", [&](const json& x, const std::string& g) {
      s.protocol.warmup_seconds = static_cast<int>(detail::as_integer(x, g));
    });
    detail::optional_field(v, f, "readings", [&](const json& x, const std::string& g) {
      s.protocol.readings = static_cast<int>(detail::as_integer(x, g));
    });
    detail::optional_field(v, f, "realtime",
                           [&](const json& x, const std::string& g) { s.protocol.realtime = detail::as_bool(x, g); });
    try {
      s.protocol.validate();
    } catch (const std::invalid_argument& e) {
      throw SchemaError(f, e.what());
    }
  });
  detail::optional_field(j, "", "seed", [&](const json& v, const std::string& f) {
    const auto n = detail::as_integer(v, f);
    if (n < 0) throw SchemaError(f, "must be >= 0");
    s.seed = static_cast<std::uint64_t>(n);
  });
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  const auto text = read_file(path);
  auto s = scenario_from_json(detail::parse_json_text(text, path), std::filesystem::path(path).parent_path());
  s.hash = hex64(fnv1a64(text));
  return s;
}

// --------------------------------------------------------------------------
// Results

inline json to_json(const CorrelationWeights& w) {
  json alpha = json::object();
  json beta = json::object();
  json gamma = json::object();
  const auto g = w.gamma();
  for (Dimension d : kAllDimensions) {
    const auto key = std::string(to_string(d));
    alpha[key] = w.alpha[index_of(d)];
    beta[key] = w.beta[index_of(d)];
    gamma[key] = g[index_of(d)];
  }
  return json{{"alpha", alpha}, {"beta", beta}, {"gamma", gamma}};
}

inline json to_json(const TraceEntry& e) {
  json j{{"iteration", e.iteration},
         {"phase", std::string(to_string(e.phase))},
         {"config", to_json(e.config)},
         {"reward", e.reward},
         {"aside", e.aside},
         {"descending", e.descending},
         {"heuristic_applied", e.heuristic_applied},
         {"collision_steps", e.collision_steps},
         {"prohibited_size", e.prohibited_size}};
  if (const auto* s = std::get_if<MeasurementSample>(&e.measurement)) {
    j["status"] = "ok";
    j["throughput_fps"] = s->throughput_fps;
    j["power_mw"] = s->power_mw;
    j["sample_count"] = s->sample_count;
  } else {
    j["status"] = std::get<HardwareFailure>(e.measurement).reason;
  }
  j["best_reward"] = e.best_reward ? json(*e.best_reward) : json(nullptr);
  j["proposed"] = e.proposed ? to_json(*e.proposed) : json(nullptr);
  j["weights"] = e.weights ? to_json(*e.weights) : json(nullptr);
  return j;
}

inline json to_json(const ScenarioConstraints& c) {
  return json{{"throughput_target_fps", c.throughput_target_fps},
              {"power_budget_mw", c.power_budget_mw},
              {"power_floor_mw", c.power_floor_mw},
              {"window_size", c.window_size},
              {"iteration_budget", c.iteration_budget}};
}

inline json to_json(const TuningResult& r) {
  json j{{"method", r.method}, {"feasible", r.feasible}, {"iterations_used", r.iterations_used}};
  if (r.best_sample) {
    j["best"] = json{{"config", to_json(r.best_sample->config)},
                     {"throughput_fps", r.best_sample->throughput_fps},
                     {"power_mw", r.best_sample->power_mw},
                     {"efficiency", r.efficiency},
                     {"reward", r.reward}};
  } else {
    j["best"] = nullptr;
  }
  json trace = json::array();
  for (const auto& e : r.trace) trace.push_back(to_json(e));
  j["trace"] = std::move(trace);
  return j;
}

}  // namespace coral
