// dsekit command line: simulate truth trajectories, run estimation, compare
// filters across scenario batches, and generate synthetic plants. Exit codes:
// 0 success, 2 input error, 3 runtime failure.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsekit/errors.hpp"
#include "dsekit/harness.hpp"
#include "dsekit/io.hpp"

namespace fs = std::filesystem;
using dsekit::ConfigError;
namespace filters = dsekit::filters;
namespace harness = dsekit::harness;
namespace io = dsekit::io;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

std::string join_path(const std::string& dir, const std::string& leaf) {
  return (fs::path(dir) / leaf).string();
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError(dir + ": cannot create output directory (" + ec.message() + ")");
}

filters::FilterKind parse_filter_or_throw(const std::string& name) {
  filters::FilterKind kind;
  if (!filters::parse_filter_kind(name, kind))
    throw ConfigError("--filter: unknown filter '" + name +
                      "' (expected ekf, ukf_classic, ukf_schol, ukf_kappa, ukf_modified, "
                      "ukf_deltaq, ukf_gps, or sr_ukf)");
  return kind;
}

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

int sample_stride(const harness::ScenarioConfig& sc) {
  return int(std::lround(sc.sim_rate / sc.meas_rate));
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string system_file, scenario_file, out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_simulate(const SimulateArgs& a) {
  const harness::SystemDef sys = io::load_system(a.system_file);
  harness::ScenarioConfig sc = io::load_scenario(a.scenario_file, sys);
  if (a.seed_set) sc.seed = a.seed;
  ensure_out_dir(a.out_dir);

  const auto truth = harness::simulate_truth(sc);
  const auto frames = harness::synthesize_measurements(truth, sc);

  const std::string truth_path = join_path(a.out_dir, "truth.csv");
  const std::string meas_path = join_path(a.out_dir, "measurements.csv");
  const std::string manifest_path = join_path(a.out_dir, "manifest.json");
  io::write_truth_csv(truth_path, truth, sys.machines, sc.sim_rate);
  io::write_measurement_csv(meas_path, frames, sc.pmu_set, sc.meas_rate);

  io::json config;
  config["command"] = "simulate";
  config["system"] = io::system_to_json(sys);
  config["scenario"] = io::scenario_to_json(sc);
  io::json manifest = io::make_manifest("simulate", io::config_hash_hex(config), sc.seed,
                                        {truth_path, meas_path});
  manifest["inputs"] = io::json::array({a.system_file, a.scenario_file});
  io::save_json(manifest_path, manifest);

  std::cout << "wrote " << truth_path << " (" << truth.size() << " samples)\n"
            << "wrote " << meas_path << " (" << frames.size() << " frames)\n"
            << "wrote " << manifest_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string system_file, scenario_file, out_dir, filter_name;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_estimate(const EstimateArgs& a) {
  const filters::FilterKind kind = parse_filter_or_throw(a.filter_name);
  const harness::SystemDef sys = io::load_system(a.system_file);
  harness::ScenarioConfig sc = io::load_scenario(a.scenario_file, sys);
  if (a.seed_set) sc.seed = a.seed;
  ensure_out_dir(a.out_dir);

  const auto truth = harness::simulate_truth(sc);
  const auto frames = harness::synthesize_measurements(truth, sc);
  const harness::EstimationRun run = harness::run_dse(sc, kind, truth, frames);

  const std::string est_path = join_path(a.out_dir, "estimates.csv");
  const std::string plot_path = join_path(a.out_dir, "plot.csv");
  const std::string log_path = join_path(a.out_dir, "diagnostics.log");
  const std::string report_path = join_path(a.out_dir, "report.json");
  const std::string manifest_path = join_path(a.out_dir, "manifest.json");

  const int stride = sample_stride(sc);
  io::write_estimate_csv(est_path, run.means, truth, stride, sys.machines, sc.meas_rate);
  io::write_plot_csv(plot_path, run.means, truth, stride, sys.machines, sc.meas_rate);
  io::write_diagnostics_log(log_path, run);
  io::save_json(report_path, io::run_report(run, sc));

  io::json config;
  config["command"] = "estimate";
  config["filter"] = a.filter_name;
  config["system"] = io::system_to_json(sys);
  config["scenario"] = io::scenario_to_json(sc);
  io::json manifest = io::make_manifest("estimate", io::config_hash_hex(config), sc.seed,
                                        {est_path, plot_path, log_path, report_path});
  manifest["inputs"] = io::json::array({a.system_file, a.scenario_file});
  manifest["filter"] = a.filter_name;
  io::save_json(manifest_path, manifest);

  std::cout << "filter " << filters::filter_kind_name(run.kind) << ": status "
            << io::run_status_name(run.status);
  if (run.status != filters::RunStatus::completed)
    std::cout << " at step " << run.failure_step << " (" << run.failure_reason << ")";
  std::cout << "\nwrote " << est_path << "\nwrote " << plot_path << "\nwrote " << log_path
            << "\nwrote " << report_path << "\nwrote " << manifest_path << "\n";
  return run.status == filters::RunStatus::completed ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string system_file, scenarios_glob, out_dir, filters_list;
};

int run_compare(const CompareArgs& a) {
  const std::vector<std::string> files = io::expand_glob(a.scenarios_glob);
  if (files.empty())
    throw ConfigError("scenarios: no file matches '" + a.scenarios_glob + "'");

  std::vector<filters::FilterKind> kinds;
  for (const std::string& name : split_csv_list(a.filters_list))
    kinds.push_back(parse_filter_or_throw(name));
  if (kinds.empty()) throw ConfigError("--filters: expected at least one filter name");

  const harness::SystemDef sys = io::load_system(a.system_file);
  std::vector<harness::ScenarioConfig> scenarios;
  for (const std::string& f : files) {
    harness::ScenarioConfig sc = io::load_scenario(f, sys);
    if (sc.name.empty()) sc.name = fs::path(f).stem().string();
    scenarios.push_back(std::move(sc));
  }
  ensure_out_dir(a.out_dir);

  const harness::ComparisonSummary summary = harness::batch_compare(scenarios, kinds);

  const std::string csv_path = join_path(a.out_dir, "summary.csv");
  const std::string json_path = join_path(a.out_dir, "summary.json");
  const std::string manifest_path = join_path(a.out_dir, "manifest.json");
  io::write_summary_csv(csv_path, summary);
  io::save_json(json_path, io::summary_to_json(summary, summary.scenario_count));

  io::json config;
  config["command"] = "compare";
  config["system"] = io::system_to_json(sys);
  io::json scens = io::json::array();
  for (const auto& sc : scenarios) scens.push_back(io::scenario_to_json(sc));
  config["scenarios"] = scens;
  io::json fnames = io::json::array();
  for (auto k : kinds) fnames.push_back(filters::filter_kind_name(k));
  config["filters"] = fnames;
  io::json manifest =
      io::make_manifest("compare", io::config_hash_hex(config), 0, {csv_path, json_path});
  io::json inputs = io::json::array();
  inputs.push_back(a.system_file);
  for (const auto& f : files) inputs.push_back(f);
  manifest["inputs"] = inputs;
  manifest["filters"] = fnames;
  io::save_json(manifest_path, manifest);

  int total_completed = 0;
  for (const auto& row : summary.rows) total_completed += row.completed;
  std::cout << "compared " << kinds.size() << " filters over " << scenarios.size()
            << " scenarios\nwrote " << csv_path << "\nwrote " << json_path << "\nwrote "
            << manifest_path << "\n";
  if (total_completed == 0) {
    std::cerr << "runtime error: every run ended in a failure\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  int machines = 3;
  int order4 = 0;
  std::uint64_t seed = 0;
  std::string out_dir, out_file;
};

int run_gen(const GenArgs& a) {
  if (a.machines < 2) throw ConfigError("--machines: need at least 2 machines");
  if (a.order4 < 0 || a.order4 > a.machines)
    throw ConfigError("--order4: must lie in 0..machines");
  const harness::SystemDef sys = harness::gen_synthetic_system(a.machines, a.order4, a.seed);
  ensure_out_dir(a.out_dir);
  const std::string out_file =
      a.out_file.empty() ? join_path(a.out_dir, "synthetic_system.json") : a.out_file;
  io::save_system(out_file, sys);

  io::json config;
  config["command"] = "gen";
  config["machines"] = a.machines;
  config["order4"] = a.order4;
  config["seed"] = a.seed;
  io::json manifest = io::make_manifest("gen", io::config_hash_hex(config), a.seed, {out_file});
  io::save_json(join_path(a.out_dir, "manifest.json"), manifest);

  std::cout << "wrote " << out_file << " (" << sys.n() << " states, " << sys.g()
            << " machines)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsekit — multi-machine dynamic state estimation workbench"};
  app.set_version_flag("--version", std::string("dsekit ") + io::tool_version());
  app.require_subcommand(1);

  std::string default_out = ".";
  if (const char* env = std::getenv("DSEKIT_OUT_DIR")) default_out = env;

  SimulateArgs sim;
  sim.out_dir = default_out;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Integrate a disturbance scenario and synthesize instrument frames");
  sim_cmd->add_option("system", sim.system_file, "Plant description JSON")->required();
  sim_cmd->add_option("scenario", sim.scenario_file, "Scenario JSON")->required();
  sim_cmd->add_option("-o,--out", sim.out_dir, "Output directory (default: $DSEKIT_OUT_DIR or .)");
  auto* sim_seed = sim_cmd->add_option("--seed", sim.seed, "Override the scenario seed");

  EstimateArgs est;
  est.out_dir = default_out;
  auto* est_cmd =
      app.add_subcommand("estimate", "Run one filter over a scenario and score it against truth");
  est_cmd->add_option("system", est.system_file, "Plant description JSON")->required();
  est_cmd->add_option("scenario", est.scenario_file, "Scenario JSON")->required();
  est_cmd->add_option("-f,--filter", est.filter_name,
                      "Filter kind: ekf, ukf_classic, ukf_schol, ukf_kappa, ukf_modified, "
                      "ukf_deltaq, ukf_gps, sr_ukf")
      ->required();
  est_cmd->add_option("-o,--out", est.out_dir, "Output directory (default: $DSEKIT_OUT_DIR or .)");
  auto* est_seed = est_cmd->add_option("--seed", est.seed, "Override the scenario seed");

  CompareArgs cmp;
  cmp.out_dir = default_out;
  cmp.filters_list = "ekf,ukf_schol,ukf_kappa,ukf_modified,ukf_deltaq,ukf_gps,sr_ukf";
  auto* cmp_cmd = app.add_subcommand(
      "compare", "Run a filter roster over a scenario batch and tabulate error indices");
  cmp_cmd->add_option("system", cmp.system_file, "Plant description JSON")->required();
  cmp_cmd->add_option("scenarios", cmp.scenarios_glob,
                      "Scenario file or glob pattern, e.g. 'data/scenarios/*.json'")
      ->required();
  cmp_cmd->add_option("-f,--filters", cmp.filters_list, "Comma-separated filter kinds");
  cmp_cmd->add_option("-o,--out", cmp.out_dir, "Output directory (default: $DSEKIT_OUT_DIR or .)");

  GenArgs gen;
  gen.out_dir = default_out;
  auto* gen_cmd =
      app.add_subcommand("gen", "Generate a random synthetic plant with a verified rest state");
  gen_cmd->add_option("-g,--machines", gen.machines, "Machine count")->required();
  gen_cmd->add_option("-4,--order4", gen.order4, "How many machines carry EMF dynamics");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("-o,--out", gen.out_dir, "Output directory (default: $DSEKIT_OUT_DIR or .)");
  gen_cmd->add_option("--out-file", gen.out_file, "Plant JSON path (default: <out>/synthetic_system.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  sim.seed_set = sim_seed->count() > 0;
  est.seed_set = est_seed->count() > 0;

  try {
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (est_cmd->parsed()) return run_estimate(est);
    if (cmp_cmd->parsed()) return run_compare(cmp);
    if (gen_cmd->parsed()) return run_gen(gen);
  } catch (const ConfigError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const dsekit::DimensionError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInput;
}
