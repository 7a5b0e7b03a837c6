#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsekit/harness.hpp"

// File formats and reports: JSON plant/scenario descriptions, CSV series
// with round-trip float formatting, run reports, comparison tables, config
// hashing, and run manifests. All loaders throw ConfigError with the
// offending field named.
namespace dsekit::io {

using json = nlohmann::json;

const char* tool_version();

// ---------------------------------------------------------------------------
// Number and text formatting

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Serialized with sorted keys and a trailing newline.
void save_json(const std::string& path, const json& j);
json load_json(const std::string& path);

// ---------------------------------------------------------------------------
// Plant description files
//
// {
//   "s_b": 100.0, "omega0": 376.99...,
//   "machines": [ {"order":2, "h":..., "k_d":..., "x_d":..., "x_q":...,
//                  "xp_d":..., "xp_q":..., "tp_d0":..., "tp_q0":...,
//                  "s_n":..., "eq_p_fixed":..., "ed_p_fixed":...}, ... ],
//   "ybar_real": [[...]...], "ybar_imag": [[...]...],
//   "equilibrium": {"delta": [...], "eq_p": [...], "ed_p": [...]}
// }
//
// The rest state runs at rated speed, so no speed array is stored; the EMF
// arrays hold one entry per fourth-order machine, ascending.

harness::SystemDef system_from_json(const json& j);
json system_to_json(const harness::SystemDef& sys);
harness::SystemDef load_system(const std::string& path);
void save_system(const std::string& path, const harness::SystemDef& sys);

// ---------------------------------------------------------------------------
// Scenario files
//
// {
//   "name": "kick-m1",
//   "disturbance": {"kind": "state_perturbation",
//                   "delta_shift": [...], "omega_shift": [...],
//                   "eq_p_shift": [...], "ed_p_shift": [...]},
//   -- or -- {"kind": "two_stage_ybar", "ybar_real": [[...]...],
//             "ybar_imag": [[...]...], "t_switch": 0.5},
//   -- or -- {"kind": "none"},
//   "pmu_set": [3],                      // machine numbers, 1-based
//   "sim_rate": 120, "meas_rate": 60, "horizon": 10,
//   "meas_noise_var": 1e-4, "q_fraction": 0.1, "q_floor": 1e-8,
//   "seed": 7, "filter_substeps": 1, "process_noise_std": 0
// }
//
// Shift arrays are optional and default to zero; each covers one state
// family across machines (EMF families: fourth-order machines only).

harness::ScenarioConfig scenario_from_json(const json& j, const harness::SystemDef& sys);
json scenario_to_json(const harness::ScenarioConfig& sc);
harness::ScenarioConfig load_scenario(const std::string& path, const harness::SystemDef& sys);
void save_scenario(const std::string& path, const harness::ScenarioConfig& sc);

// ---------------------------------------------------------------------------
// CSV series
//
// Column names: delta_i / omega_i for machine i (1-based), eq_p_i / ed_p_i
// only for fourth-order machines. Measurement channels: e_R_i, e_I_i,
// i_R_i, i_I_i per instrumented machine, stacked family-major to match the
// measurement map. All values use round-trip formatting.

std::vector<std::string> state_names(const std::vector<ps::MachineParams>& machines);
std::vector<std::string> measurement_names(const std::vector<int>& pmu_set);

// Header "t,<state names>"; one row per truth sample, t = k / sim_rate.
void write_truth_csv(const std::string& path, const std::vector<Eigen::VectorXd>& truth,
                     const std::vector<ps::MachineParams>& machines, double sim_rate);

// Header "t,<channel names>"; one row per frame, t = k / meas_rate, k >= 1.
void write_measurement_csv(const std::string& path, const std::vector<Eigen::VectorXd>& frames,
                           const std::vector<int>& pmu_set, double meas_rate);

// Long form, header "t,state,truth,estimate"; frame k at t = k / meas_rate,
// truth aligned via the sim-to-frame stride. Row 0 is the initial belief.
void write_estimate_csv(const std::string& path, const std::vector<Eigen::VectorXd>& means,
                        const std::vector<Eigen::VectorXd>& truth, int stride,
                        const std::vector<ps::MachineParams>& machines, double meas_rate);

// Plot-ready wide form restricted to the angle and speed families:
// "t,delta_1_true,delta_1_est,...,omega_g_true,omega_g_est".
void write_plot_csv(const std::string& path, const std::vector<Eigen::VectorXd>& means,
                    const std::vector<Eigen::VectorXd>& truth, int stride,
                    const std::vector<ps::MachineParams>& machines, double meas_rate);

// One aggregate row per filter.
void write_summary_csv(const std::string& path, const harness::ComparisonSummary& summary);

// ---------------------------------------------------------------------------
// Reports

const char* run_status_name(filters::RunStatus status);

// Single-run report: status, error indices (EMF indices only when the
// plant has fourth-order machines; non-finite values become null), wall
// time, projection-repair accounting, failure info for early endings.
json run_report(const harness::EstimationRun& run, const harness::ScenarioConfig& sc);

json summary_to_json(const harness::ComparisonSummary& summary, int scenario_count);

// Per-step text log of numerical events plus a one-line summary.
void write_diagnostics_log(const std::string& path, const harness::EstimationRun& run);

// ---------------------------------------------------------------------------
// Hashing and manifests

std::uint64_t fnv1a64(const std::string& bytes);

// Hash of the sorted-key serialization: key order in the source file never
// changes the hash.
std::string config_hash_hex(const json& config);

// Tool version, config hash, seed, UTC timestamp, and produced files.
json make_manifest(const std::string& command, const std::string& config_hash,
                   std::uint64_t seed, const std::vector<std::string>& outputs);

// Paths matching a pattern with '*' / '?' wildcards in the final component;
// a pattern without wildcards names one file. Sorted, existing files only.
std::vector<std::string> expand_glob(const std::string& pattern);

}  // namespace dsekit::io
