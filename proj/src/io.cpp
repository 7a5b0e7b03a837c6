#include "dsekit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dsekit/errors.hpp"

namespace dsekit::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Formatting primitives

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  out.write(content.data(), std::streamsize(content.size()));
  if (!out) throw ConfigError(path + ": write failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void save_json(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

json load_json(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Field extraction with named diagnostics

namespace {

const json& need(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(ctx + "." + key + ": missing required field");
  return *it;
}

double as_num(const json& j, const std::string& ctx) {
  if (!j.is_number()) throw ConfigError(ctx + ": expected a number");
  return j.get<double>();
}

double need_num(const json& j, const char* key, const std::string& ctx) {
  return as_num(need(j, key, ctx), ctx + "." + key);
}

double opt_num(const json& j, const char* key, const std::string& ctx, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return as_num(j.at(key), ctx + "." + key);
}

int need_int(const json& j, const char* key, const std::string& ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_number_integer()) throw ConfigError(ctx + "." + key + ": expected an integer");
  return v.get<int>();
}

int opt_int(const json& j, const char* key, const std::string& ctx, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(ctx + "." + key + ": expected an integer");
  return v.get<int>();
}

std::uint64_t opt_seed(const json& j, const char* key, const std::string& ctx,
                       std::uint64_t fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<double>() < 0))
    throw ConfigError(ctx + "." + key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

Eigen::VectorXd as_vector(const json& j, const std::string& ctx, int expected) {
  if (!j.is_array()) throw ConfigError(ctx + ": expected an array of numbers");
  if (expected >= 0 && int(j.size()) != expected)
    throw ConfigError(ctx + ": expected " + std::to_string(expected) + " entries, got " +
                      std::to_string(j.size()));
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[Eigen::Index(i)] = as_num(j[i], ctx + "[" + std::to_string(i) + "]");
  return v;
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& ctx, int rows, int cols) {
  if (!j.is_array()) throw ConfigError(ctx + ": expected an array of rows");
  if (int(j.size()) != rows)
    throw ConfigError(ctx + ": expected " + std::to_string(rows) + " rows, got " +
                      std::to_string(j.size()));
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    m.row(i) = as_vector(j[std::size_t(i)], ctx + "[" + std::to_string(i) + "]", cols).transpose();
  return m;
}

Eigen::MatrixXcd ybar_from_json(const json& j, const std::string& ctx, int g) {
  const Eigen::MatrixXd re = as_matrix(need(j, "ybar_real", ctx), ctx + ".ybar_real", g, g);
  const Eigen::MatrixXd im = as_matrix(need(j, "ybar_imag", ctx), ctx + ".ybar_imag", g, g);
  Eigen::MatrixXcd y(g, g);
  y.real() = re;
  y.imag() = im;
  return y;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

// ---------------------------------------------------------------------------
// Plant description files

harness::SystemDef system_from_json(const json& j) {
  const std::string ctx = "system";
  harness::SystemDef sys;
  sys.net.s_b = opt_num(j, "s_b", ctx, 100.0);
  sys.net.omega0 = need_num(j, "omega0", ctx);
  if (sys.net.s_b <= 0.0) throw ConfigError(ctx + ".s_b: must be positive");
  if (sys.net.omega0 <= 0.0) throw ConfigError(ctx + ".omega0: must be positive");

  const json& marr = need(j, "machines", ctx);
  if (!marr.is_array() || marr.empty())
    throw ConfigError(ctx + ".machines: expected a non-empty array");
  for (std::size_t i = 0; i < marr.size(); ++i) {
    const std::string mc = ctx + ".machines[" + std::to_string(i) + "]";
    const json& mj = marr[i];
    ps::MachineParams m;
    m.order = need_int(mj, "order", mc);
    if (m.order != 2 && m.order != 4) throw ConfigError(mc + ".order: must be 2 or 4");
    m.h = need_num(mj, "h", mc);
    m.k_d = opt_num(mj, "k_d", mc, 0.0);
    m.x_d = need_num(mj, "x_d", mc);
    m.x_q = need_num(mj, "x_q", mc);
    m.xp_d = need_num(mj, "xp_d", mc);
    m.xp_q = need_num(mj, "xp_q", mc);
    m.s_n = opt_num(mj, "s_n", mc, 100.0);
    if (m.h <= 0.0) throw ConfigError(mc + ".h: must be positive");
    if (m.xp_d <= 0.0) throw ConfigError(mc + ".xp_d: must be positive");
    if (m.xp_q <= 0.0) throw ConfigError(mc + ".xp_q: must be positive");
    if (m.s_n <= 0.0) throw ConfigError(mc + ".s_n: must be positive");
    if (m.order == 4) {
      m.tp_d0 = need_num(mj, "tp_d0", mc);
      m.tp_q0 = need_num(mj, "tp_q0", mc);
      if (m.tp_d0 <= 0.0) throw ConfigError(mc + ".tp_d0: must be positive");
      if (m.tp_q0 <= 0.0) throw ConfigError(mc + ".tp_q0: must be positive");
      m.eq_p_fixed = opt_num(mj, "eq_p_fixed", mc, 0.0);
      m.ed_p_fixed = opt_num(mj, "ed_p_fixed", mc, 0.0);
    } else {
      m.tp_d0 = opt_num(mj, "tp_d0", mc, 1.0);
      m.tp_q0 = opt_num(mj, "tp_q0", mc, 1.0);
      m.eq_p_fixed = need_num(mj, "eq_p_fixed", mc);
      m.ed_p_fixed = opt_num(mj, "ed_p_fixed", mc, 0.0);
    }
    sys.machines.push_back(m);
  }

  const int g = int(sys.machines.size());
  sys.net.ybar = ybar_from_json(j, ctx, g);

  const int g4 = sys.g4();
  const json& eq = need(j, "equilibrium", ctx);
  sys.equilibrium.delta = as_vector(need(eq, "delta", ctx + ".equilibrium"),
                                    ctx + ".equilibrium.delta", g);
  sys.equilibrium.omega = Eigen::VectorXd::Constant(g, sys.net.omega0);
  if (g4 > 0) {
    sys.equilibrium.eq_p = as_vector(need(eq, "eq_p", ctx + ".equilibrium"),
                                     ctx + ".equilibrium.eq_p", g4);
    sys.equilibrium.ed_p = as_vector(need(eq, "ed_p", ctx + ".equilibrium"),
                                     ctx + ".equilibrium.ed_p", g4);
  } else {
    sys.equilibrium.eq_p.resize(0);
    sys.equilibrium.ed_p.resize(0);
  }
  return sys;
}

json system_to_json(const harness::SystemDef& sys) {
  json j;
  j["s_b"] = sys.net.s_b;
  j["omega0"] = sys.net.omega0;
  json marr = json::array();
  for (const auto& m : sys.machines) {
    json mj;
    mj["order"] = m.order;
    mj["h"] = m.h;
    mj["k_d"] = m.k_d;
    mj["x_d"] = m.x_d;
    mj["x_q"] = m.x_q;
    mj["xp_d"] = m.xp_d;
    mj["xp_q"] = m.xp_q;
    mj["tp_d0"] = m.tp_d0;
    mj["tp_q0"] = m.tp_q0;
    mj["s_n"] = m.s_n;
    mj["eq_p_fixed"] = m.eq_p_fixed;
    mj["ed_p_fixed"] = m.ed_p_fixed;
    marr.push_back(mj);
  }
  j["machines"] = marr;
  j["ybar_real"] = matrix_to_json(sys.net.ybar.real());
  j["ybar_imag"] = matrix_to_json(sys.net.ybar.imag());
  json eq;
  eq["delta"] = vector_to_json(sys.equilibrium.delta);
  eq["eq_p"] = vector_to_json(sys.equilibrium.eq_p);
  eq["ed_p"] = vector_to_json(sys.equilibrium.ed_p);
  j["equilibrium"] = eq;
  return j;
}

harness::SystemDef load_system(const std::string& path) {
  try {
    return system_from_json(load_json(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void save_system(const std::string& path, const harness::SystemDef& sys) {
  save_json(path, system_to_json(sys));
}

// ---------------------------------------------------------------------------
// Scenario files

harness::ScenarioConfig scenario_from_json(const json& j, const harness::SystemDef& sys) {
  const std::string ctx = "scenario";
  harness::ScenarioConfig sc;
  sc.system = sys;
  const int g = sys.g();
  const int g4 = sys.g4();
  const int n = sys.n();

  if (j.is_object() && j.contains("name")) {
    if (!j.at("name").is_string()) throw ConfigError(ctx + ".name: expected a string");
    sc.name = j.at("name").get<std::string>();
  }

  const json& pmu = need(j, "pmu_set", ctx);
  if (!pmu.is_array() || pmu.empty())
    throw ConfigError(ctx + ".pmu_set: expected a non-empty array of machine numbers");
  for (std::size_t i = 0; i < pmu.size(); ++i) {
    const std::string pc = ctx + ".pmu_set[" + std::to_string(i) + "]";
    if (!pmu[i].is_number_integer()) throw ConfigError(pc + ": expected an integer");
    const int machine = pmu[i].get<int>();
    if (machine < 1 || machine > g)
      throw ConfigError(pc + ": machine number " + std::to_string(machine) +
                        " outside 1.." + std::to_string(g));
    sc.pmu_set.push_back(machine - 1);
  }
  std::sort(sc.pmu_set.begin(), sc.pmu_set.end());
  sc.pmu_set.erase(std::unique(sc.pmu_set.begin(), sc.pmu_set.end()), sc.pmu_set.end());

  const json& dj = need(j, "disturbance", ctx);
  const std::string dc = ctx + ".disturbance";
  const json& kindj = need(dj, "kind", dc);
  if (!kindj.is_string()) throw ConfigError(dc + ".kind: expected a string");
  const std::string kind = kindj.get<std::string>();
  if (kind == "none") {
    sc.disturbance.kind = harness::DisturbanceKind::none;
  } else if (kind == "state_perturbation") {
    sc.disturbance.kind = harness::DisturbanceKind::state_perturbation;
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(n);
    if (dj.contains("delta_shift"))
      shift.segment(0, g) = as_vector(dj.at("delta_shift"), dc + ".delta_shift", g);
    if (dj.contains("omega_shift"))
      shift.segment(g, g) = as_vector(dj.at("omega_shift"), dc + ".omega_shift", g);
    if (dj.contains("eq_p_shift")) {
      if (g4 == 0) throw ConfigError(dc + ".eq_p_shift: plant has no fourth-order machines");
      shift.segment(2 * g, g4) = as_vector(dj.at("eq_p_shift"), dc + ".eq_p_shift", g4);
    }
    if (dj.contains("ed_p_shift")) {
      if (g4 == 0) throw ConfigError(dc + ".ed_p_shift: plant has no fourth-order machines");
      shift.segment(2 * g + g4, g4) = as_vector(dj.at("ed_p_shift"), dc + ".ed_p_shift", g4);
    }
    sc.disturbance.state_shift = shift;
  } else if (kind == "two_stage_ybar") {
    sc.disturbance.kind = harness::DisturbanceKind::two_stage_ybar;
    sc.disturbance.ybar_during = ybar_from_json(dj, dc, g);
    sc.disturbance.t_switch = need_num(dj, "t_switch", dc);
    if (sc.disturbance.t_switch <= 0.0) throw ConfigError(dc + ".t_switch: must be positive");
  } else {
    throw ConfigError(dc + ".kind: unknown kind '" + kind +
                      "' (expected none, state_perturbation, or two_stage_ybar)");
  }

  sc.sim_rate = opt_num(j, "sim_rate", ctx, sc.sim_rate);
  sc.meas_rate = opt_num(j, "meas_rate", ctx, sc.meas_rate);
  sc.horizon = opt_num(j, "horizon", ctx, sc.horizon);
  sc.meas_noise_var = opt_num(j, "meas_noise_var", ctx, sc.meas_noise_var);
  sc.q_fraction = opt_num(j, "q_fraction", ctx, sc.q_fraction);
  sc.q_floor = opt_num(j, "q_floor", ctx, sc.q_floor);
  sc.seed = opt_seed(j, "seed", ctx, sc.seed);
  sc.filter_substeps = opt_int(j, "filter_substeps", ctx, sc.filter_substeps);
  sc.process_noise_std = opt_num(j, "process_noise_std", ctx, sc.process_noise_std);

  harness::validate_scenario(sc);
  return sc;
}

json scenario_to_json(const harness::ScenarioConfig& sc) {
  const int g = sc.system.g();
  const int g4 = sc.system.g4();
  json j;
  if (!sc.name.empty()) j["name"] = sc.name;
  json dj;
  switch (sc.disturbance.kind) {
    case harness::DisturbanceKind::none:
      dj["kind"] = "none";
      break;
    case harness::DisturbanceKind::state_perturbation: {
      dj["kind"] = "state_perturbation";
      const Eigen::VectorXd& s = sc.disturbance.state_shift;
      dj["delta_shift"] = vector_to_json(s.segment(0, g));
      dj["omega_shift"] = vector_to_json(s.segment(g, g));
      if (g4 > 0) {
        dj["eq_p_shift"] = vector_to_json(s.segment(2 * g, g4));
        dj["ed_p_shift"] = vector_to_json(s.segment(2 * g + g4, g4));
      }
      break;
    }
    case harness::DisturbanceKind::two_stage_ybar:
      dj["kind"] = "two_stage_ybar";
      dj["ybar_real"] = matrix_to_json(sc.disturbance.ybar_during.real());
      dj["ybar_imag"] = matrix_to_json(sc.disturbance.ybar_during.imag());
      dj["t_switch"] = sc.disturbance.t_switch;
      break;
  }
  j["disturbance"] = dj;
  json pmu = json::array();
  for (int m : sc.pmu_set) pmu.push_back(m + 1);
  j["pmu_set"] = pmu;
  j["sim_rate"] = sc.sim_rate;
  j["meas_rate"] = sc.meas_rate;
  j["horizon"] = sc.horizon;
  j["meas_noise_var"] = sc.meas_noise_var;
  j["q_fraction"] = sc.q_fraction;
  j["q_floor"] = sc.q_floor;
  j["seed"] = sc.seed;
  j["filter_substeps"] = sc.filter_substeps;
  j["process_noise_std"] = sc.process_noise_std;
  return j;
}

harness::ScenarioConfig load_scenario(const std::string& path, const harness::SystemDef& sys) {
  try {
    return scenario_from_json(load_json(path), sys);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void save_scenario(const std::string& path, const harness::ScenarioConfig& sc) {
  save_json(path, scenario_to_json(sc));
}

// ---------------------------------------------------------------------------
// CSV series

std::vector<std::string> state_names(const std::vector<ps::MachineParams>& machines) {
  std::vector<std::string> names;
  const int g = int(machines.size());
  for (int i = 0; i < g; ++i) names.push_back("delta_" + std::to_string(i + 1));
  for (int i = 0; i < g; ++i) names.push_back("omega_" + std::to_string(i + 1));
  const auto o4 = ps::order4_indices(machines);
  for (int i : o4) names.push_back("eq_p_" + std::to_string(i + 1));
  for (int i : o4) names.push_back("ed_p_" + std::to_string(i + 1));
  return names;
}

std::vector<std::string> measurement_names(const std::vector<int>& pmu_set) {
  std::vector<std::string> names;
  for (const char* family : {"e_R_", "e_I_", "i_R_", "i_I_"})
    for (int m : pmu_set) names.push_back(family + std::to_string(m + 1));
  return names;
}

namespace {

std::string csv_header(const std::vector<std::string>& names) {
  std::string line = "t";
  for (const auto& n : names) line += "," + n;
  line += "\n";
  return line;
}

void append_series_row(std::string& out, double t, const Eigen::VectorXd& v) {
  out += format_double(t);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += ',';
    out += format_double(v[i]);
  }
  out += '\n';
}

}  // namespace

void write_truth_csv(const std::string& path, const std::vector<Eigen::VectorXd>& truth,
                     const std::vector<ps::MachineParams>& machines, double sim_rate) {
  std::string out = csv_header(state_names(machines));
  for (std::size_t k = 0; k < truth.size(); ++k)
    append_series_row(out, double(k) / sim_rate, truth[k]);
  write_text_file(path, out);
}

void write_measurement_csv(const std::string& path, const std::vector<Eigen::VectorXd>& frames,
                           const std::vector<int>& pmu_set, double meas_rate) {
  std::string out = csv_header(measurement_names(pmu_set));
  for (std::size_t k = 0; k < frames.size(); ++k)
    append_series_row(out, double(k + 1) / meas_rate, frames[k]);
  write_text_file(path, out);
}

void write_estimate_csv(const std::string& path, const std::vector<Eigen::VectorXd>& means,
                        const std::vector<Eigen::VectorXd>& truth, int stride,
                        const std::vector<ps::MachineParams>& machines, double meas_rate) {
  const std::vector<std::string> names = state_names(machines);
  std::string out = "t,state,truth,estimate\n";
  for (std::size_t k = 0; k < means.size(); ++k) {
    const std::size_t truth_idx = k * std::size_t(stride);
    if (truth_idx >= truth.size()) break;
    const std::string t = format_double(double(k) / meas_rate);
    for (std::size_t j = 0; j < names.size(); ++j) {
      out += t;
      out += ',';
      out += names[j];
      out += ',';
      out += format_double(truth[truth_idx][Eigen::Index(j)]);
      out += ',';
      out += format_double(means[k][Eigen::Index(j)]);
      out += '\n';
    }
  }
  write_text_file(path, out);
}

void write_plot_csv(const std::string& path, const std::vector<Eigen::VectorXd>& means,
                    const std::vector<Eigen::VectorXd>& truth, int stride,
                    const std::vector<ps::MachineParams>& machines, double meas_rate) {
  const int g = int(machines.size());
  std::string out = "t";
  for (const char* family : {"delta_", "omega_"})
    for (int i = 0; i < g; ++i) {
      out += ",";
      out += family + std::to_string(i + 1) + "_true";
      out += ",";
      out += family + std::to_string(i + 1) + "_est";
    }
  out += '\n';
  for (std::size_t k = 0; k < means.size(); ++k) {
    const std::size_t truth_idx = k * std::size_t(stride);
    if (truth_idx >= truth.size()) break;
    out += format_double(double(k) / meas_rate);
    for (int j = 0; j < 2 * g; ++j) {
      out += ',';
      out += format_double(truth[truth_idx][j]);
      out += ',';
      out += format_double(means[k][j]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

void write_summary_csv(const std::string& path, const harness::ComparisonSummary& summary) {
  std::string out =
      "filter,completed,failures,mean_e_delta,std_e_delta,mean_e_omega,std_e_omega,"
      "mean_e_eq,std_e_eq,mean_e_ed,std_e_ed,mean_wall_seconds,nearpd_invocations,"
      "nearpd_steps\n";
  auto cell = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
  for (const auto& row : summary.rows) {
    out += filters::filter_kind_name(row.kind);
    out += ',' + std::to_string(row.completed);
    out += ',' + std::to_string(row.failures);
    out += ',' + cell(row.mean_e_delta) + ',' + cell(row.std_e_delta);
    out += ',' + cell(row.mean_e_omega) + ',' + cell(row.std_e_omega);
    out += ',' + cell(row.mean_e_eq) + ',' + cell(row.std_e_eq);
    out += ',' + cell(row.mean_e_ed) + ',' + cell(row.std_e_ed);
    out += ',' + cell(row.mean_wall_seconds);
    out += ',' + std::to_string(row.nearpd_invocations);
    out += ',' + std::to_string(row.nearpd_steps);
    out += '\n';
  }
  write_text_file(path, out);
}

// ---------------------------------------------------------------------------
// Reports

const char* run_status_name(filters::RunStatus status) {
  switch (status) {
    case filters::RunStatus::completed: return "completed";
    case filters::RunStatus::halted: return "halted";
    case filters::RunStatus::diverged: return "diverged";
  }
  return "unknown";
}

json run_report(const harness::EstimationRun& run, const harness::ScenarioConfig& sc) {
  json j;
  j["filter"] = filters::filter_kind_name(run.kind);
  j["status"] = run_status_name(run.status);
  j["frames_processed"] = int(run.means.size()) - 1;
  j["wall_seconds"] = num_or_null(run.wall_seconds);
  j["e_delta"] = num_or_null(run.e_delta);
  j["e_omega"] = num_or_null(run.e_omega);
  if (sc.system.g4() > 0) {
    j["e_eq"] = num_or_null(run.e_eq);
    j["e_ed"] = num_or_null(run.e_ed);
  }
  j["nearpd_invocations"] = run.nearpd_invocations;
  j["nearpd_steps"] = run.nearpd_steps;
  int psd_failures = 0;
  for (const auto& d : run.diagnostics) psd_failures += d.psd_failure ? 1 : 0;
  j["psd_failure_steps"] = psd_failures;
  if (run.status != filters::RunStatus::completed) {
    j["failure_step"] = run.failure_step;
    j["failure_reason"] = run.failure_reason;
  }
  return j;
}

json summary_to_json(const harness::ComparisonSummary& summary, int scenario_count) {
  json j;
  j["scenario_count"] = scenario_count;
  json rows = json::array();
  for (const auto& row : summary.rows) {
    json r;
    r["filter"] = filters::filter_kind_name(row.kind);
    r["completed"] = row.completed;
    r["failures"] = row.failures;
    r["mean_e_delta"] = num_or_null(row.mean_e_delta);
    r["std_e_delta"] = num_or_null(row.std_e_delta);
    r["mean_e_omega"] = num_or_null(row.mean_e_omega);
    r["std_e_omega"] = num_or_null(row.std_e_omega);
    r["mean_e_eq"] = num_or_null(row.mean_e_eq);
    r["std_e_eq"] = num_or_null(row.std_e_eq);
    r["mean_e_ed"] = num_or_null(row.mean_e_ed);
    r["std_e_ed"] = num_or_null(row.std_e_ed);
    r["mean_wall_seconds"] = num_or_null(row.mean_wall_seconds);
    r["nearpd_invocations"] = row.nearpd_invocations;
    r["nearpd_steps"] = row.nearpd_steps;
    rows.push_back(r);
  }
  j["filters"] = rows;
  return j;
}

void write_diagnostics_log(const std::string& path, const harness::EstimationRun& run) {
  int psd_failures = 0;
  for (const auto& d : run.diagnostics) psd_failures += d.psd_failure ? 1 : 0;
  std::string out = "run filter=";
  out += filters::filter_kind_name(run.kind);
  out += " status=";
  out += run_status_name(run.status);
  out += " steps=" + std::to_string(run.diagnostics.size());
  out += " psd_failures=" + std::to_string(psd_failures);
  out += " nearpd_invocations=" + std::to_string(run.nearpd_invocations);
  out += " nearpd_steps=" + std::to_string(run.nearpd_steps);
  if (run.status != filters::RunStatus::completed) {
    out += " failure_step=" + std::to_string(run.failure_step);
    out += " failure_reason=\"" + run.failure_reason + "\"";
  }
  out += '\n';
  auto phase_name = [](filters::Phase p) {
    return p == filters::Phase::prior ? "prior" : "predicted";
  };
  for (std::size_t k = 0; k < run.diagnostics.size(); ++k) {
    const auto& d = run.diagnostics[k];
    if (!d.psd_failure) continue;
    out += "step=" + std::to_string(k + 1);
    out += " phase=";
    out += phase_name(d.phase);
    out += " min_eig_before=" + format_double(d.min_eig_before);
    out += " repaired=";
    out += d.repaired ? "yes" : "no";
    out += '\n';
  }
  write_text_file(path, out);
}

// ---------------------------------------------------------------------------
// Hashing and manifests

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string config_hash_hex(const json& config) {
  const std::uint64_t h = fnv1a64(config.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

json make_manifest(const std::string& command, const std::string& config_hash,
                   std::uint64_t seed, const std::vector<std::string>& outputs) {
  json j;
  j["tool"] = "dsekit";
  j["version"] = tool_version();
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  j["created_utc"] = stamp;
  json outs = json::array();
  for (const auto& o : outputs) outs.push_back(o);
  j["outputs"] = outs;
  return j;
}

const char* tool_version() { return "0.1.0"; }

// ---------------------------------------------------------------------------
// Globbing

namespace {

bool wildcard_match(const char* pat, const char* text) {
  if (*pat == '\0') return *text == '\0';
  if (*pat == '*') {
    for (const char* t = text;; ++t) {
      if (wildcard_match(pat + 1, t)) return true;
      if (*t == '\0') return false;
    }
  }
  if (*text == '\0') return false;
  if (*pat == '?' || *pat == *text) return wildcard_match(pat + 1, text + 1);
  return false;
}

}  // namespace

std::vector<std::string> expand_glob(const std::string& pattern) {
  std::vector<std::string> out;
  if (pattern.find('*') == std::string::npos && pattern.find('?') == std::string::npos) {
    if (fs::exists(pattern)) out.push_back(pattern);
    return out;
  }
  const fs::path p(pattern);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  const std::string leaf = p.filename().string();
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (wildcard_match(leaf.c_str(), name.c_str())) out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace dsekit::io
