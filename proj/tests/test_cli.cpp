#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// End-to-end checks of the command-line tool as a black box: every case
// shells out to the real binary, then inspects exit codes and the files it
// wrote. DSEKIT_CLI_PATH and DSEKIT_DATA_DIR are injected by the build.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dsekit/io.hpp"

namespace fs = std::filesystem;
using dsekit::io::json;

namespace {

const std::string kCli = DSEKIT_CLI_PATH;
const std::string kData = DSEKIT_DATA_DIR;

std::string data_file(const std::string& rel) { return kData + "/" + rel; }

// Scratch directory under the test's working directory, wiped per use.
fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::path("cli_scratch") / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

struct CliResult {
  int code = -1;
  std::string output;  // stdout + stderr combined
};

CliResult run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path cap = scratch / "cli_output.txt";
  const std::string cmd = kCli + " " + args + " > " + cap.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(cap);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long line_count(const fs::path& p) {
  const std::string text = read_all(p);
  long n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  return line;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// The large-plant stress scenario: strong angle and speed kicks across the
// fleet, sparse observability, and process noise derived at full step size.
void write_stress_scenario(const fs::path& path, int machines) {
  std::vector<double> ds(machines, 0.0), ws(machines, 0.0);
  for (int i = 0; i < machines; i += 4) ds[i] = ((i / 4) % 2 == 0) ? 0.3 : -0.3;
  for (int i = 3; i < machines; i += 7) ws[i] = ((i / 7) % 2 == 0) ? 1.5 : -1.5;
  json sc;
  sc["name"] = "stress";
  sc["disturbance"] = {{"kind", "state_perturbation"}, {"delta_shift", ds}, {"omega_shift", ws}};
  sc["pmu_set"] = json::array({1, 11, 21, 31, 41});
  sc["q_fraction"] = 1.0;
  sc["seed"] = 77;
  dsekit::io::save_json(path.string(), sc);
}

}  // namespace

TEST_CASE("--version prints the tool name and exits cleanly") {
  fs::path d = fresh_dir("version");
  CliResult r = run_cli("--version", d);
  CHECK(r.code == 0);
  CHECK(contains(r.output, "dsekit"));
}

TEST_CASE("simulate writes the truth and measurement tables and a manifest") {
  fs::path d = fresh_dir("simulate");
  CliResult r = run_cli("simulate " + data_file("wscc3.json") + " " +
                            data_file("scenarios/kick_m1_small.json") + " -o " + d.string(),
                        d);
  REQUIRE(r.code == 0);

  // 10 s at 120 Hz: sample 0 plus 1200 steps; measurements at 60 Hz skip t=0.
  CHECK(line_count(d / "truth.csv") == 1202);
  CHECK(line_count(d / "measurements.csv") == 601);
  CHECK(first_line(d / "truth.csv") == "t,delta_1,delta_2,delta_3,omega_1,omega_2,omega_3");
  CHECK(first_line(d / "measurements.csv") == "t,e_R_3,e_I_3,i_R_3,i_I_3");

  json m = dsekit::io::load_json((d / "manifest.json").string());
  CHECK(m.at("tool") == "dsekit");
  CHECK(m.at("command") == "simulate");
  CHECK(m.at("config_hash").get<std::string>().size() == 16);
  CHECK(m.at("outputs").size() == 2);
  CHECK(m.contains("created_utc"));
  CHECK(m.contains("version"));
}

TEST_CASE("simulation is reproducible for a fixed seed and the truth is noise-free") {
  fs::path a = fresh_dir("repro_a"), b = fresh_dir("repro_b"), c = fresh_dir("repro_c");
  const std::string base =
      "simulate " + data_file("wscc3.json") + " " + data_file("scenarios/kick_m2_small.json");
  REQUIRE(run_cli(base + " --seed 5 -o " + a.string(), a).code == 0);
  REQUIRE(run_cli(base + " --seed 5 -o " + b.string(), b).code == 0);
  REQUIRE(run_cli(base + " --seed 6 -o " + c.string(), c).code == 0);

  // Same seed: byte-identical files. Different seed: same deterministic
  // truth, different measurement noise.
  CHECK(read_all(a / "truth.csv") == read_all(b / "truth.csv"));
  CHECK(read_all(a / "measurements.csv") == read_all(b / "measurements.csv"));
  CHECK(read_all(a / "truth.csv") == read_all(c / "truth.csv"));
  CHECK(read_all(a / "measurements.csv") != read_all(c / "measurements.csv"));
}

TEST_CASE("estimate writes tables, a report, and a diagnostics log") {
  fs::path d = fresh_dir("estimate");
  CliResult r = run_cli("estimate " + data_file("wscc3.json") + " " +
                            data_file("scenarios/kick_m1_small.json") + " -f sr_ukf -o " +
                            d.string(),
                        d);
  REQUIRE(r.code == 0);

  // Long table: one row per state per belief (initial belief + 600 frames).
  CHECK(line_count(d / "estimates.csv") == 1 + 601 * 6);
  CHECK(first_line(d / "estimates.csv") == "t,state,truth,estimate");
  // Wide table: one row per belief.
  CHECK(line_count(d / "plot.csv") == 1 + 601);
  CHECK(line_count(d / "diagnostics.log") >= 1);

  json rep = dsekit::io::load_json((d / "report.json").string());
  CHECK(rep.at("filter") == "sr_ukf");
  CHECK(rep.at("status") == "completed");
  CHECK(rep.at("frames_processed") == 600);
  CHECK(rep.at("e_delta").get<double>() < 0.15);
  CHECK(rep.at("e_omega").get<double>() < 1.5);
  CHECK(rep.at("wall_seconds").get<double>() > 0.0);
  CHECK(rep.at("psd_failure_steps") == 0);
  // A second-order plant has no EMF states, so no EMF error indices.
  CHECK(!rep.contains("e_eq"));
  CHECK(!rep.contains("e_ed"));
  CHECK(!rep.contains("failure_step"));

  json m = dsekit::io::load_json((d / "manifest.json").string());
  CHECK(m.at("command") == "estimate");
  CHECK(m.at("filter") == "sr_ukf");
  CHECK(m.at("outputs").size() == 4);
}

TEST_CASE("a fourth-order plant reports all four error indices") {
  fs::path d = fresh_dir("order4");
  REQUIRE(run_cli("gen -g 3 -4 3 --seed 1 -o " + d.string(), d).code == 0);
  dsekit::io::write_text_file(
      (d / "mini.json").string(),
      "{\"disturbance\": {\"kind\": \"none\"}, \"pmu_set\": [1, 2, 3], "
      "\"horizon\": 1.0, \"seed\": 5}\n");

  CliResult r = run_cli("estimate " + (d / "synthetic_system.json").string() + " " +
                            (d / "mini.json").string() + " -f ekf -o " + d.string(),
                        d);
  REQUIRE(r.code == 0);
  json rep = dsekit::io::load_json((d / "report.json").string());
  CHECK(rep.at("status") == "completed");
  CHECK(rep.at("frames_processed") == 60);
  CHECK(rep.at("e_delta").is_number());
  CHECK(rep.at("e_omega").is_number());
  CHECK(rep.at("e_eq").is_number());
  CHECK(rep.at("e_ed").is_number());
}

TEST_CASE("the unstabilized baseline halts on a large synthetic and the report says where") {
  fs::path d = fresh_dir("halt150");
  CliResult gen = run_cli("gen -g 50 -4 25 --seed 3 -o " + d.string(), d);
  REQUIRE(gen.code == 0);
  CHECK(contains(gen.output, "150 states"));
  write_stress_scenario(d / "stress.json", 50);

  CliResult r = run_cli("estimate " + (d / "synthetic_system.json").string() + " " +
                            (d / "stress.json").string() + " -f ukf_classic -o " + d.string(),
                        d);
  CHECK(r.code == 3);

  json rep = dsekit::io::load_json((d / "report.json").string());
  CHECK(rep.at("filter") == "ukf_classic");
  CHECK(rep.at("status") == "halted");
  CHECK(rep.at("failure_step").get<int>() >= 1);
  CHECK(!rep.at("failure_reason").get<std::string>().empty());
  CHECK(rep.at("frames_processed").get<int>() < 600);
  // No completed horizon, no error indices — explicit nulls, not garbage.
  CHECK(rep.at("e_delta").is_null());
}

TEST_CASE("bad inputs exit with the input-error code and name the offending field") {
  fs::path d = fresh_dir("badinput");

  // A required machine parameter removed from an otherwise valid plant file.
  json sys = dsekit::io::load_json(data_file("wscc3.json"));
  sys["machines"][0].erase("h");
  dsekit::io::save_json((d / "broken_system.json").string(), sys);
  CliResult broken = run_cli("estimate " + (d / "broken_system.json").string() + " " +
                                 data_file("scenarios/kick_m1_small.json") + " -f ekf -o " +
                                 d.string(),
                             d);
  CHECK(broken.code == 2);
  CHECK(contains(broken.output, "machines[0]"));
  CHECK(contains(broken.output, "missing required field"));

  // Unknown filter name: the message lists what would have been accepted.
  CliResult unk = run_cli("estimate " + data_file("wscc3.json") + " " +
                              data_file("scenarios/kick_m1_small.json") + " -f bogus -o " +
                              d.string(),
                          d);
  CHECK(unk.code == 2);
  CHECK(contains(unk.output, "ukf_schol"));

  // A measurement set pointing at a machine the plant does not have.
  dsekit::io::write_text_file((d / "bad_pmu.json").string(),
                              "{\"disturbance\": {\"kind\": \"none\"}, \"pmu_set\": [4]}\n");
  CliResult pmu = run_cli("estimate " + data_file("wscc3.json") + " " +
                              (d / "bad_pmu.json").string() + " -f ekf -o " + d.string(),
                          d);
  CHECK(pmu.code == 2);
  CHECK(contains(pmu.output, "pmu_set"));

  // A scenario glob that matches nothing.
  CliResult glob = run_cli("compare " + data_file("wscc3.json") + " '" + d.string() +
                               "/no_such/*.json' -o " + d.string(),
                           d);
  CHECK(glob.code == 2);
}

TEST_CASE("compare aggregates the bundled scenario suite") {
  fs::path d = fresh_dir("compare");
  CliResult r = run_cli("compare " + data_file("wscc3.json") + " '" +
                            data_file("scenarios/*.json") + "' -o " + d.string(),
                        d);
  REQUIRE(r.code == 0);

  // Default roster: seven filters, one summary row each.
  CHECK(line_count(d / "summary.csv") == 1 + 7);
  CHECK(contains(first_line(d / "summary.csv"), "filter"));

  json s = dsekit::io::load_json((d / "summary.json").string());
  CHECK(s.at("scenario_count") == 12);
  REQUIRE(s.at("filters").size() == 7);
  for (const auto& row : s.at("filters")) {
    INFO("filter " << row.at("filter").get<std::string>());
    CHECK(row.at("completed") == 12);
    CHECK(row.at("failures") == 0);
    CHECK(row.at("mean_e_delta").get<double>() <= 0.15);
    CHECK(row.at("mean_e_omega").get<double>() <= 1.5);
  }
}

TEST_CASE("compare on a single scenario yields zero spread") {
  fs::path d = fresh_dir("compare_one");
  CliResult r = run_cli("compare " + data_file("wscc3.json") + " " +
                            data_file("scenarios/kick_m1_small.json") + " -f ekf,sr_ukf -o " +
                            d.string(),
                        d);
  REQUIRE(r.code == 0);
  json s = dsekit::io::load_json((d / "summary.json").string());
  CHECK(s.at("scenario_count") == 1);
  REQUIRE(s.at("filters").size() == 2);
  for (const auto& row : s.at("filters")) {
    CHECK(row.at("completed") == 1);
    CHECK(row.at("std_e_delta").get<double>() == 0.0);
    CHECK(row.at("std_e_omega").get<double>() == 0.0);
  }
}

TEST_CASE("gen validates its arguments") {
  fs::path d = fresh_dir("genbad");
  CliResult one = run_cli("gen -g 1 -o " + d.string(), d);
  CHECK(one.code == 2);
  CHECK(contains(one.output, "--machines"));
  CliResult extra = run_cli("gen -g 3 -4 5 -o " + d.string(), d);
  CHECK(extra.code == 2);
  CHECK(contains(extra.output, "--order4"));
}
