#pragma once

// Commands behind the CLI: profile a grid, tune one scenario, compare
// methods on a scenario, and extract the power/throughput trade-off.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "coral/baselines.hpp"
#include "coral/io.hpp"
#include "coral/optimizer.hpp"
#include "coral/profile.hpp"

namespace coral {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int error = 1;
inline constexpr int infeasible = 2;
}  // namespace exit_code

// --------------------------------------------------------------------------
// Backends from references

/// Builds a fresh backend on each call so every method starts from the same
/// state (in particular the same synthetic noise stream).
using BackendFactory = std::function<std::unique_ptr<DeviceBackend>()>;

/// `spec` is required for synthetic and adapter backends. For table backends
/// it is optional; without it the spec is inferred from the table.
inline BackendFactory backend_factory(const BackendRef& ref, const std::optional<DeviceSpec>& spec,
                                      std::optional<SyntheticSurfaceParams> params = std::nullopt) {
  switch (ref.kind) {
    case BackendRef::Kind::table: {
      auto table = std::make_shared<const ProfileTable>(load_profile(ref.path));
      if (table->records.empty()) throw ProfileError(1, "profile '" + ref.path + "' has no rows");
      if (spec) {
        auto s = *spec;
        return [table, s] { return std::make_unique<TableBackend>(*table, s); };
      }
      return [table] { return std::make_unique<TableBackend>(*table); };
    }
    case BackendRef::Kind::synthetic: {
      if (!spec) throw SchemaError("device_spec", "required for a synthetic backend");
      if (!ref.path.empty()) params = load_synthetic_params(ref.path);
      const auto p = params.value_or(SyntheticSurfaceParams{});
      p.validate();
      auto s = *spec;
      return [s, p] { return std::make_unique<SyntheticBackend>(s, p); };
    }
    case BackendRef::Kind::adapter: {
      if (!spec) throw SchemaError("device_spec", "required for a hardware adapter backend");
      auto s = *spec;
      return [s] { return std::make_unique<HardwareAdapterBackend>(s); };
    }
  }
  throw std::logic_error("unknown backend kind");
}

/// Scenario with its device spec and backend resolved.
struct ResolvedScenario {
  Scenario scenario;
  DeviceSpec spec;
  BackendFactory make_backend;
  std::string spec_hash;
};

inline ResolvedScenario resolve(Scenario scenario) {
  std::optional<DeviceSpec> spec;
  if (scenario.device_spec) spec = load_device_spec(*scenario.device_spec);
  auto factory = backend_factory(scenario.backend, spec, scenario.synthetic_params);
  auto probe = factory();
  DeviceSpec resolved_spec = probe->spec();
  auto hash = spec_hash(resolved_spec);
  return {std::move(scenario), std::move(resolved_spec), std::move(factory), std::move(hash)};
}

// --------------------------------------------------------------------------
// profile

/// Measures every grid configuration. Returns the table; write it with dump_profile.
inline ProfileTable cmd_profile(const DeviceSpec& spec, const BackendRef& backend,
                                const MeasurementProtocol& protocol = {},
                                std::optional<std::uint64_t> seed = std::nullopt) {
  if (backend.kind == BackendRef::Kind::table) {
    throw SchemaError("backend", "profile needs a synthetic or adapter backend");
  }
  std::optional<SyntheticSurfaceParams> params;
  if (backend.kind == BackendRef::Kind::synthetic) {
    params = backend.path.empty() ? SyntheticSurfaceParams{} : load_synthetic_params(backend.path);
    if (seed) params->seed = *seed;
  }
  BackendRef ref = backend;
  ref.path.clear();
  auto b = backend_factory(ref, spec, params)();
  return profile_backend(*b, protocol);
}

// --------------------------------------------------------------------------
// tune

struct RunHeader {
  std::uint64_t seed = 0;
  std::string spec_hash;
  std::string scenario_hash;
  std::string device;
};

inline RunHeader header_of(const ResolvedScenario& rs, std::uint64_t seed) {
  return {seed, rs.spec_hash, rs.scenario.hash, rs.spec.name()};
}

inline json to_json(const RunHeader& h) {
  return json{{"seed", h.seed}, {"spec_hash", h.spec_hash}, {"scenario_hash", h.scenario_hash},
              {"device", h.device}};
}

struct TuneOutcome {
  RunHeader header;
  TuningResult result;
};

inline TuneOutcome cmd_tune(const ResolvedScenario& rs, std::optional<std::uint64_t> seed_override = std::nullopt) {
  const auto seed = seed_override.value_or(rs.scenario.seed);
  RunOptions opts;
  opts.init = rs.scenario.init;
  opts.heuristic = rs.scenario.heuristic;
  opts.seed = seed;
  opts.protocol = rs.scenario.protocol;
  auto backend = rs.make_backend();
  return {header_of(rs, seed), run(*backend, rs.scenario.constraints, opts)};
}

inline json tune_report(const TuneOutcome& t, const ResolvedScenario& rs) {
  json j = to_json(t.header);
  j["constraints"] = to_json(rs.scenario.constraints);
  j["heuristic"] = std::string(to_string(rs.scenario.heuristic));
  j["result"] = to_json(t.result);
  return j;
}

// --------------------------------------------------------------------------
// compare

struct MethodSpec {
  enum class Kind : std::uint8_t { coral, oracle, random, max_power, default_mode };
  Kind kind = Kind::coral;
  std::size_t trials = 10;  // random only

  [[nodiscard]] std::string name() const {
    switch (kind) {
      case Kind::coral: return "coral";
      case Kind::oracle: return "oracle";
      case Kind::random: return "random" + std::to_string(trials);
      case Kind::max_power: return "max_power";
      case Kind::default_mode: return "default";
    }
    return "?";
  }
};

/// Comma-separated: coral, oracle, random<N> (random alone means random10),
/// max_power, default.
inline std::vector<MethodSpec> parse_methods(const std::string& list) {
  std::vector<MethodSpec> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    MethodSpec m;
    if (item == "coral") {
      m.kind = MethodSpec::Kind::coral;
    } else if (item == "oracle") {
      m.kind = MethodSpec::Kind::oracle;
    } else if (item == "max_power") {
      m.kind = MethodSpec::Kind::max_power;
    } else if (item == "default") {
      m.kind = MethodSpec::Kind::default_mode;
    } else if (item.rfind("random", 0) == 0) {
      m.kind = MethodSpec::Kind::random;
      const auto digits = item.substr(6);
      if (!digits.empty()) {
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), m.trials);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || m.trials == 0) {
          throw SchemaError("methods", "bad random trial count in '" + item + "'");
        }
      }
    } else {
      throw SchemaError("methods", "unknown method '" + item + "'");
    }
    out.push_back(m);
  }
  if (out.empty()) throw SchemaError("methods", "no methods given");
  return out;
}

struct ComparisonRow {
  std::string method;
  TuningResult result;
  std::optional<std::string> failure;  // preset that failed on hardware
  std::optional<double> pct_oracle_throughput;
  std::optional<double> pct_oracle_efficiency;
};

struct ComparisonReport {
  RunHeader header;
  ScenarioConstraints constraints;
  bool has_oracle = false;
  std::vector<ComparisonRow> rows;
};

inline ComparisonReport cmd_compare(const ResolvedScenario& rs, const std::vector<MethodSpec>& methods,
                                    std::optional<std::uint64_t> seed_override = std::nullopt) {
  const auto seed = seed_override.value_or(rs.scenario.seed);
  const auto& constraints = rs.scenario.constraints;
  const auto& protocol = rs.scenario.protocol;

  ComparisonReport report;
  report.header = header_of(rs, seed);
  report.constraints = constraints;
  for (const auto& m : methods) {
    auto backend = rs.make_backend();
    ComparisonRow row;
    row.method = m.name();
    switch (m.kind) {
      case MethodSpec::Kind::coral: {
        RunOptions opts;
        opts.init = rs.scenario.init;
        opts.heuristic = rs.scenario.heuristic;
        opts.seed = seed;
        opts.protocol = protocol;
        row.result = run(*backend, constraints, opts);
        break;
      }
      case MethodSpec::Kind::oracle:
        row.result = oracle_search(*backend, constraints, protocol);
        report.has_oracle = true;
        break;
      case MethodSpec::Kind::random:
        row.result = random_search(*backend, constraints, m.trials, seed, protocol);
        break;
      case MethodSpec::Kind::max_power:
      case MethodSpec::Kind::default_mode: {
        const auto preset = m.kind == MethodSpec::Kind::max_power ? max_power_preset(rs.spec) : default_preset(rs.spec);
        try {
          row.result = preset_eval(*backend, preset, constraints, protocol);
        } catch (const BaselineError& e) {
          row.result.method = preset.name();
          row.result.iterations_used = 1;
          row.failure = e.what();
        }
        break;
      }
    }
    report.rows.push_back(std::move(row));
  }

  if (report.has_oracle) {
    const auto& oracle =
        std::find_if(report.rows.begin(), report.rows.end(), [](const auto& r) { return r.method == "oracle"; })
            ->result;
    for (auto& row : report.rows) {
      if (!row.result.best_sample) continue;
      const auto& s = *row.result.best_sample;
      const auto& o = *oracle.best_sample;
      row.pct_oracle_throughput = o.throughput_fps > 0.0 ? 100.0 * s.throughput_fps / o.throughput_fps : 0.0;
      row.pct_oracle_efficiency = o.efficiency() > 0.0 ? 100.0 * s.efficiency() / o.efficiency() : 0.0;
    }
  }
  return report;
}

inline void write_report_csv(std::ostream& out, const ComparisonReport& r) {
  out << "# seed=" << r.header.seed << " spec_hash=" << r.header.spec_hash
      << " scenario_hash=" << r.header.scenario_hash << " device=" << r.header.device << '\n';
  out << "# throughput_target_fps=" << format_double(r.constraints.throughput_target_fps)
      << " power_budget_mw=" << format_double(r.constraints.power_budget_mw)
      << " iteration_budget=" << r.constraints.iteration_budget << '\n';
  out << "method,cpu_cores,cpu_freq_mhz,gpu_freq_mhz,mem_freq_mhz,concurrency,throughput_fps,power_mw,"
         "efficiency_fps_per_mw,reward,feasible,evaluations";
  if (r.has_oracle) out << ",percent_of_oracle_throughput,percent_of_oracle_efficiency";
  out << '\n';
  for (const auto& row : r.rows) {
    out << row.method << ',';
    if (const auto& s = row.result.best_sample) {
      const auto& c = s->config;
      out << c.cpu_cores << ',' << c.cpu_freq << ',' << c.gpu_freq << ',' << c.mem_freq << ',' << c.concurrency
          << ',' << format_double(s->throughput_fps) << ',' << format_double(s->power_mw) << ','
          << format_double(s->efficiency()) << ',' << format_double(row.result.reward) << ',';
    } else {
      out << ",,,,,,,,,";
    }
    out << (row.result.feasible ? 1 : 0) << ',' << row.result.iterations_used;
    if (r.has_oracle) {
      out << ',' << (row.pct_oracle_throughput ? format_double(*row.pct_oracle_throughput) : "") << ','
          << (row.pct_oracle_efficiency ? format_double(*row.pct_oracle_efficiency) : "");
    }
    out << '\n';
  }
}

inline std::string report_csv(const ComparisonReport& r) {
  std::ostringstream os;
  write_report_csv(os, r);
  return os.str();
}

inline std::string format_report_table(const ComparisonReport& r) {
  std::ostringstream os;
  os << r.header.device << ": target " << r.constraints.throughput_target_fps << " fps, budget "
     << r.constraints.power_budget_mw << " mW, seed " << r.header.seed << '\n';
  os << std::left << std::setw(11) << "method" << std::setw(28) << "config (cores/cpu/gpu/mem/conc)" << std::right
     << std::setw(9) << "fps" << std::setw(10) << "mW" << std::setw(11) << "fps/W" << std::setw(10) << "feasible"
     << std::setw(7) << "evals";
  if (r.has_oracle) os << std::setw(9) << "%tput" << std::setw(9) << "%eff";
  os << '\n' << std::fixed;
  for (const auto& row : r.rows) {
    os << std::left << std::setw(11) << row.method;
    if (const auto& s = row.result.best_sample) {
      const auto& c = s->config;
      std::ostringstream cfg;
      cfg << c.cpu_cores << '/' << c.cpu_freq << '/' << c.gpu_freq << '/' << c.mem_freq << '/' << c.concurrency;
      os << std::setw(28) << cfg.str() << std::right << std::setprecision(2) << std::setw(9) << s->throughput_fps
         << std::setprecision(0) << std::setw(10) << s->power_mw << std::setprecision(3) << std::setw(11)
         << 1000.0 * s->efficiency();
    } else {
      os << std::setw(28) << (row.failure ? "hardware failure" : "none") << std::right << std::setw(9) << "-"
         << std::setw(10) << "-" << std::setw(11) << "-";
    }
    os << std::setw(10) << (row.result.feasible ? "yes" : "no") << std::setw(7) << row.result.iterations_used;
    if (r.has_oracle) {
      os << std::setprecision(1);
      if (row.pct_oracle_throughput) {
        os << std::setw(9) << *row.pct_oracle_throughput << std::setw(9) << *row.pct_oracle_efficiency;
      } else {
        os << std::setw(9) << "-" << std::setw(9) << "-";
      }
    }
    os << '\n';
  }
  return os.str();
}

// --------------------------------------------------------------------------
// tradeoff

struct TradeoffPoint {
  double power_mw = 0.0;
  double throughput_fps = 0.0;
};

/// A point is on the frontier unless another has strictly higher throughput
/// and strictly lower power. Sort by power, then sweep groups of equal power
/// against the best throughput seen at strictly lower power.
inline std::vector<bool> pareto_flags(const std::vector<TradeoffPoint>& pts) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pts[a].power_mw < pts[b].power_mw; });
  std::vector<bool> flags(pts.size(), false);
  double best_below = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double group_best = best_below;
    while (j < order.size() && pts[order[j]].power_mw == pts[order[i]].power_mw) {
      const auto& p = pts[order[j]];
      flags[order[j]] = !(best_below > p.throughput_fps);
      group_best = std::max(group_best, p.throughput_fps);
      ++j;
    }
    best_below = group_best;
    i = j;
  }
  return flags;
}

struct TradeoffRow {
  Configuration config;
  double power_mw = 0.0;
  double throughput_fps = 0.0;
  bool pareto = false;
};

/// Scatter rows for every valid profile row, in profile order.
inline std::vector<TradeoffRow> cmd_tradeoff(const ProfileTable& table) {
  std::vector<TradeoffRow> rows;
  for (const auto& [cfg, rec] : table.records) {
    if (rec.valid) rows.push_back({cfg, rec.power_mw, rec.throughput_fps, false});
  }
  if (rows.empty()) throw ProfileError(1, "profile has no valid rows");
  std::vector<TradeoffPoint> pts;
  pts.reserve(rows.size());
  for (const auto& r : rows) pts.push_back({r.power_mw, r.throughput_fps});
  const auto flags = pareto_flags(pts);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].pareto = flags[i];
  return rows;
}

inline void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffRow>& rows, const std::string& source_hash) {
  out << "# source_hash=" << source_hash << '\n';
  out << "power_mw,throughput_fps,cpu_cores,cpu_freq_mhz,gpu_freq_mhz,mem_freq_mhz,concurrency,"
         "efficiency_fps_per_mw,pareto\n";
  for (const auto& r : rows) {
    const auto& c = r.config;
    out << format_double(r.power_mw) << ',' << format_double(r.throughput_fps) << ',' << c.cpu_cores << ','
        << c.cpu_freq << ',' << c.gpu_freq << ',' << c.mem_freq << ',' << c.concurrency << ','
        << format_double(r.throughput_fps / r.power_mw) << ',' << (r.pareto ? 1 : 0) << '\n';
  }
}

}  // namespace coral
