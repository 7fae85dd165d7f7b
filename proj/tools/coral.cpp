// coral: profile, tune, compare and trade-off commands.
//
//   coral profile  --spec builtin:xavier_nx --backend synthetic:params.json --out grid.csv
//   coral tune     --scenario scenario.json --out trace.json
//   coral compare  --scenario scenario.json --methods coral,oracle,random10 --out report.csv
//   coral tradeoff --backend table:grid.csv --out tradeoff.csv
//
// Exit status: 0 ok (feasible result, or file written), 2 ran but infeasible, 1 error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "coral/harness.hpp"

namespace {

struct Options {
  std::string spec;
  std::string scenario;
  std::string backend;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string methods = "coral,oracle,random10,max_power,default";
  bool realtime = false;
};

void emit(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content;
  } else {
    coral::write_file(out, content);
  }
}

coral::ResolvedScenario load(const Options& o) {
  auto s = coral::load_scenario(o.scenario);
  if (!o.spec.empty()) s.device_spec = o.spec;
  if (!o.backend.empty()) s.backend = coral::parse_backend_ref(o.backend, "--backend");
  if (o.realtime) s.protocol.realtime = true;
  return coral::resolve(std::move(s));
}

int run_profile(const Options& o) {
  const auto spec = coral::load_device_spec(o.spec);
  const auto ref = coral::parse_backend_ref(o.backend.empty() ? "synthetic" : o.backend, "--backend");
  coral::MeasurementProtocol protocol;
  protocol.realtime = o.realtime;
  const auto table = coral::cmd_profile(spec, ref, protocol, o.seed);
  emit(o.out, coral::profile_to_string(table));
  std::cerr << "profiled " << table.records.size() << " configurations of " << spec.name() << '\n';
  return coral::exit_code::ok;
}

int run_tune(const Options& o) {
  const auto rs = load(o);
  const auto t = coral::cmd_tune(rs, o.seed);
  emit(o.out, coral::tune_report(t, rs).dump(2) + "\n");
  const auto& r = t.result;
  if (r.best_sample) {
    std::cerr << (r.feasible ? "feasible" : "infeasible") << ": " << coral::to_string(r.best_sample->config)
              << " " << r.best_sample->throughput_fps << " fps, " << r.best_sample->power_mw << " mW\n";
  } else {
    std::cerr << "infeasible: no configuration could be measured\n";
  }
  return r.feasible ? coral::exit_code::ok : coral::exit_code::infeasible;
}

int run_compare(const Options& o) {
  const auto rs = load(o);
  const auto report = coral::cmd_compare(rs, coral::parse_methods(o.methods), o.seed);
  std::cout << coral::format_report_table(report);
  if (!o.out.empty()) coral::write_file(o.out, coral::report_csv(report));
  return coral::exit_code::ok;
}

int run_tradeoff(const Options& o, const std::string& positional) {
  std::string path = positional;
  if (path.empty()) {
    if (o.backend.empty()) throw coral::SchemaError("--backend", "tradeoff needs table:<profile.csv>");
    const auto ref = coral::parse_backend_ref(o.backend, "--backend");
    if (ref.kind != coral::BackendRef::Kind::table) {
      throw coral::SchemaError("--backend", "tradeoff needs table:<profile.csv>");
    }
    path = ref.path;
  }
  const auto text = coral::read_file(path);
  std::istringstream in(text);
  const auto rows = coral::cmd_tradeoff(coral::parse_profile(in));
  std::ostringstream os;
  coral::write_tradeoff_csv(os, rows, coral::hex64(coral::fnv1a64(text)));
  emit(o.out, os.str());
  return coral::exit_code::ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained throughput/power auto-tuner for edge inference devices"};
  app.require_subcommand(1);
  Options o;
  std::string profile_path;

  auto seed_opt = [&](CLI::App* cmd) {
    cmd->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { o.seed = s; }, "Run seed");
  };

  auto* profile = app.add_subcommand("profile", "Measure every configuration of a device grid");
  profile->add_option("--spec", o.spec, "Device spec file or builtin:<name>")->required();
  profile->add_option("--backend", o.backend, "synthetic[:<params-file>] or adapter")->default_str("synthetic");
  profile->add_option("--out", o.out, "Profile CSV (stdout when omitted)");
  profile->add_flag("--realtime", o.realtime, "Pace readings at one per second");
  seed_opt(profile);

  auto* tune = app.add_subcommand("tune", "Run the online search on a scenario");
  tune->add_option("--scenario", o.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  tune->add_option("--spec", o.spec, "Override the scenario's device spec");
  tune->add_option("--backend", o.backend, "Override the scenario's backend");
  tune->add_option("--out", o.out, "Result JSON (stdout when omitted)");
  tune->add_flag("--realtime", o.realtime, "Pace readings at one per second");
  seed_opt(tune);

  auto* compare = app.add_subcommand("compare", "Run several methods on one scenario");
  compare->add_option("--scenario", o.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  compare->add_option("--spec", o.spec, "Override the scenario's device spec");
  compare->add_option("--backend", o.backend, "Override the scenario's backend");
  compare->add_option("--methods", o.methods, "coral,oracle,random<N>,max_power,default")->capture_default_str();
  compare->add_option("--out", o.out, "Report CSV");
  compare->add_flag("--realtime", o.realtime, "Pace readings at one per second");
  seed_opt(compare);

  auto* tradeoff = app.add_subcommand("tradeoff", "Power/throughput scatter with Pareto flags");
  tradeoff->add_option("profile", profile_path, "Profile CSV");
  tradeoff->add_option("--backend", o.backend, "table:<profile.csv>");
  tradeoff->add_option("--out", o.out, "Trade-off CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : coral::exit_code::error;
  }

  try {
    if (*profile) return run_profile(o);
    if (*tune) return run_tune(o);
    if (*compare) return run_compare(o);
    if (*tradeoff) return run_tradeoff(o, profile_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return coral::exit_code::error;
  }
  return coral::exit_code::error;
}
