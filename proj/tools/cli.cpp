#include "cli.hpp"

#include "nodalfreq/analysis.hpp"
#include "nodalfreq/dynamics.hpp"
#include "nodalfreq/error.hpp"
#include "nodalfreq/metric.hpp"
#include "nodalfreq/network_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace nodalfreq::cli {

namespace fs = std::filesystem;
using Eigen::Index;
using Eigen::VectorXd;

namespace {

struct Tolerances {
  double homogeneity = 1e-6;
  double zero = 1e-9;
  double agreement = 1e-10;
  double rocof = 1e-8;
  double fd = 0.02;
  double sweep = 1e-9;
  double divergence = 1e6;
};

struct RunConfig {
  std::string command;
  std::string input;
  std::string out_dir;
  double dt = 1e-3;
  double t_end = 30.0;
  double onset = 0.0;
  std::size_t stride = 1;
  std::vector<std::string> disturb;
  std::string sweep_spec;
  bool modal = false;
  bool modes = false;
  std::vector<std::string> tol_overrides;
  Tolerances tol;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::pair<std::string, double> split_assignment(const std::string& text, const char* what) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw UsageError(fmt::format("{} expects NAME=VALUE, got '{}'", what, text));
  }
  const std::string value = text.substr(eq + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) throw UsageError(fmt::format("{}: '{}' is not a number", what, value));
  return {text.substr(0, eq), v};
}

void apply_tolerances(RunConfig& cfg) {
  const std::map<std::string, double*> slots{
      {"homogeneity", &cfg.tol.homogeneity}, {"zero", &cfg.tol.zero},   {"agreement", &cfg.tol.agreement},
      {"rocof", &cfg.tol.rocof},             {"fd", &cfg.tol.fd},       {"sweep", &cfg.tol.sweep},
      {"divergence", &cfg.tol.divergence},
  };
  for (const auto& item : cfg.tol_overrides) {
    const auto [name, value] = split_assignment(item, "--tol");
    const auto it = slots.find(name);
    if (it == slots.end()) throw UsageError("unknown tolerance '" + name + "'");
    *it->second = value;
  }
}

AnalysisOptions analysis_options(const Tolerances& tol) {
  AnalysisOptions o;
  o.spectral.homogeneity_tol = tol.homogeneity;
  o.spectral.zero_tol_rel = tol.zero;
  o.metric.agreement_tol = tol.agreement;
  return o;
}

std::string format_metric(double value) {
  if (std::isinf(value)) return "inf*";
  if (std::abs(value) >= 1e6) return fmt::format("{:.1e}*", value);
  return fmt::format("{:.1f}", value);
}

std::string full(double value) { return fmt::format("{:.17g}", value); }

// Files are assembled in memory and only written once every computation succeeded.
struct PendingFile {
  std::string name;
  std::string contents;
};

void write_files(const RunConfig& cfg, const std::vector<PendingFile>& files, std::ostream& out) {
  if (cfg.out_dir.empty()) return;
  fs::create_directories(cfg.out_dir);
  for (const auto& f : files) {
    const fs::path path = fs::path(cfg.out_dir) / f.name;
    std::ofstream stream(path, std::ios::binary);
    if (!stream) throw Error("cannot write " + path.string());
    stream << f.contents;
    fmt::print(out, "wrote {}\n", path.string());
  }
}

std::string metrics_csv(const MetricReport& report) {
  std::string s = "bus,c_ii,metric";
  const Index n = report.mode_count();
  for (Index k = 1; k <= n; ++k) s += fmt::format(",c_{}", k);
  for (Index k = 1; k <= n; ++k) s += fmt::format(",inv_c_{}", k);
  s += "\n";
  for (const auto& bus : report.buses) {
    s += bus.bus_id + "," + full(bus.c) + "," + full(bus.metric);
    for (const auto& m : bus.modes) s += "," + full(m.c);
    for (const auto& m : bus.modes) s += "," + full(m.inverse);
    s += "\n";
  }
  return s;
}

std::string modes_csv(const SpectralModes& modes, const std::vector<std::string>& generator_ids) {
  std::string s = "k,lambda";
  for (const auto& id : generator_ids) s += ",u_" + id;
  s += "\n";
  for (Index k = 0; k < modes.size(); ++k) {
    s += fmt::format("{},{}", k + 1, full(modes.eigenvalues(k)));
    for (Index i = 0; i < modes.size(); ++i) s += "," + full(modes.eigenvectors(i, k));
    s += "\n";
  }
  return s;
}

std::string trajectory_csv(const SimulationResult& result, const std::vector<std::string>& bus_ids) {
  std::string s = "t";
  for (const auto& id : bus_ids) s += ",bus_" + id;
  s += ",coi\n";
  for (std::size_t r = 0; r < result.sample_count(); ++r) {
    const auto row = static_cast<Index>(r);
    s += full(result.time[r]);
    for (Index j = 0; j < result.bus_frequency.cols(); ++j) s += "," + full(result.bus_frequency(row, j));
    s += "," + full(result.coi(row)) + "\n";
  }
  return s;
}

void print_metric_table(const MetricReport& report, std::ostream& out) {
  const Index n = report.mode_count();
  std::string header = fmt::format("{:<10}{:>12}", "bus", "1/c_ii");
  for (Index k = 1; k <= n; ++k) header += fmt::format("{:>12}", fmt::format("1/c_{},ii", k));
  fmt::print(out, "{}\n", header);
  for (const auto& bus : report.buses) {
    std::string line = fmt::format("{:<10}{:>12}", bus.bus_id, format_metric(bus.metric));
    for (const auto& m : bus.modes) line += fmt::format("{:>12}", format_metric(m.inverse));
    fmt::print(out, "{}\n", line);
  }
}

PowerNetwork load_validated(const RunConfig& cfg) {
  if (cfg.input.empty()) throw UsageError("--input is required");
  auto net = load_network(cfg.input);
  const auto report = validate_network(net);
  if (!report.ok) {
    std::string msg = "network validation failed:";
    for (const auto& f : report.findings) msg += "\n  " + f;
    throw NetworkError(msg);
  }
  return net;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.input.empty()) throw UsageError("--input is required");
  const auto net = load_network(cfg.input);
  const auto report = validate_network(net);
  fmt::print(out, "buses: {} generator, {} load/passive; branches: {}\n", net.generator_count(),
             net.network_bus_count(), net.branches().size());
  for (const auto& f : report.findings) fmt::print(out, "  FAIL {}\n", f);
  const auto homogeneity = check_homogeneity(net, cfg.tol.homogeneity);
  if (homogeneity.homogeneous) {
    fmt::print(out, "homogeneous: yes (T = {}, d = {}, k = {})\n", homogeneity.turbine_time,
               homogeneity.damping_ratio, homogeneity.droop_ratio);
  } else {
    fmt::print(out, "homogeneous: no\n");
    for (const auto& f : homogeneity.findings) fmt::print(out, "  note {}\n", f);
  }
  fmt::print(out, "validation: {}\n", report.ok ? "PASS" : "FAIL");
  return report.ok ? kOk : kValidationFailure;
}

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  const auto net = load_validated(cfg);
  const auto analysis = analyze(net, analysis_options(cfg.tol));
  print_metric_table(analysis.report, out);

  std::vector<PendingFile> files{{"metrics.csv", metrics_csv(analysis.report)}};
  if (cfg.modes) {
    fmt::print(out, "\n{:<6}{:>16}\n", "mode", "lambda");
    for (Index k = 0; k < analysis.modes.size(); ++k) {
      fmt::print(out, "{:<6}{:>16.6e}\n", k + 1, analysis.modes.eigenvalues(k));
    }
    files.push_back({"modes.csv", modes_csv(analysis.modes, net.generator_ids())});
  }
  write_files(cfg, files, out);
  return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto net = load_validated(cfg);
  std::map<std::string, double> steps;
  for (const auto& item : cfg.disturb) {
    const auto [bus, value] = split_assignment(item, "--disturb");
    steps[bus] += value;
  }
  const VectorXd p = disturbance_vector(net, steps);

  const auto parts = assemble_susceptance(net);
  const auto model = build_state_space(net, parts);
  SimulationOptions sim_opts;
  sim_opts.onset = cfg.onset;
  sim_opts.divergence_bound = cfg.tol.divergence;
  sim_opts.record_stride = cfg.stride;
  const auto result = simulate_step(model, p, cfg.t_end, cfg.dt, sim_opts);

  const bool homogeneous = check_homogeneity(net, cfg.tol.homogeneity).homogeneous;
  std::optional<Analysis> analysis;
  if (homogeneous) analysis = analyze(net, analysis_options(cfg.tol));
  if (cfg.modal && !analysis) throw HomogeneityError("--modal requires homogeneous generators");
  const VectorXd predicted = analysis ? predicted_initial_rocof(analysis->report, p)
                                      : VectorXd(direct_parameter_matrix(kron_reduce(parts), model.inertia) * p);

  const auto bus_ids = net.network_bus_ids();
  std::vector<Index> listed;
  for (Index j = 0; j < p.size(); ++j) {
    if (steps.count(bus_ids[static_cast<std::size_t>(j)])) listed.push_back(j);
  }
  if (listed.empty()) {
    for (Index j = 0; j < p.size(); ++j) listed.push_back(j);
  }

  std::string summary = "bus,step,predicted_rocof,measured_rocof,fd_rocof,status,fd_status\n";
  fmt::print(out, "{:<10}{:>12}{:>16}{:>16}{:>16}{:>8}{:>8}\n", "bus", "step", "predicted", "measured", "fd",
             "status", "fd");
  for (const Index j : listed) {
    const double pred = predicted(j);
    const double meas = result.initial_rocof(j);
    const double fd = result.initial_rocof_fd(j);
    const double scale = std::max(std::abs(pred), 1e-300);
    const bool ok = std::abs(meas - pred) <= cfg.tol.rocof * scale || (pred == 0.0 && meas == 0.0);
    const bool fd_ok = std::abs(fd - pred) <= cfg.tol.fd * scale || (pred == 0.0 && fd == 0.0);
    const auto& id = bus_ids[static_cast<std::size_t>(j)];
    summary += fmt::format("{},{},{},{},{},{},{}\n", id, full(p(j)), full(pred), full(meas), full(fd),
                           ok ? "PASS" : "FAIL", fd_ok ? "PASS" : "FAIL");
    fmt::print(out, "{:<10}{:>12.4g}{:>16.6e}{:>16.6e}{:>16.6e}{:>8}{:>8}\n", id, p(j), pred, meas, fd,
               ok ? "PASS" : "FAIL", fd_ok ? "PASS" : "FAIL");
  }
  double response_sum = 0.0;
  for (const auto& g : net.generators()) response_sum += g.damping + g.droop;
  const double expected_ss = response_sum > 0.0 ? p.sum() / response_sum : std::nan("");
  summary += fmt::format("steady_state_deviation,{},expected,{}\n", full(result.steady_state_deviation),
                         full(expected_ss));
  fmt::print(out, "steady-state deviation: {:.6e} p.u. (sum P / (D_sum + K_sum) = {:.6e})\n",
             result.steady_state_deviation, expected_ss);

  std::vector<PendingFile> files{{"trajectory.csv", trajectory_csv(result, bus_ids)}};
  if (cfg.modal) {
    const auto modal = simulate_modal(analysis->modes, analysis->report, p, cfg.t_end, cfg.dt, sim_opts);
    const double diff = (modal.result.bus_frequency - result.bus_frequency).cwiseAbs().maxCoeff();
    summary += fmt::format("modal_max_difference,{}\n", full(diff));
    fmt::print(out, "max |modal - state-space| = {:.3e} p.u.\n", diff);
    files.push_back({"trajectory_modal.csv", trajectory_csv(modal.result, bus_ids)});
  }
  files.push_back({"summary.csv", summary});
  write_files(cfg, files, out);
  return kOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  if (cfg.sweep_spec.empty()) throw UsageError("--sweep J1,J2[,N] is required");
  std::vector<double> values;
  std::stringstream ss(cfg.sweep_spec);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      values.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw UsageError("--sweep: '" + part + "' is not a number");
    }
  }
  if (values.size() < 2 || values.size() > 3) throw UsageError("--sweep expects J1,J2[,N]");
  const std::size_t points = values.size() == 3 ? static_cast<std::size_t>(values[2]) : 301;
  if (values.size() == 3 && (values[2] < 2 || values[2] != std::floor(values[2]))) {
    throw UsageError("--sweep: N must be an integer >= 2");
  }
  if (!(values[0] > 0.0 && values[1] > 0.0)) throw NetworkError("--sweep: inertias must be positive");

  const auto table = position_sweep(values[0], values[1], points, cfg.tol.sweep);
  std::string csv = "x,inv_c33,inv_c1_33,inv_c2_33,pipeline_inv_c33,pipeline_inv_c1_33,pipeline_inv_c2_33,flagged\n";
  for (const auto& row : table.rows) {
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", full(row.x), full(row.oracle.inv_c33), full(row.oracle.inv_c1_33),
                       full(row.oracle.inv_c2_33), full(row.pipeline.inv_c33), full(row.pipeline.inv_c1_33),
                       full(row.pipeline.inv_c2_33), row.flagged ? 1 : 0);
  }
  const auto& best = table.rows[table.argmax];
  fmt::print(out, "J1 = {}, J2 = {}, {} points\n", values[0], values[1], points);
  fmt::print(out, "x = 0: 1/c_33 = {:.6f}\n", table.rows.front().oracle.inv_c33);
  fmt::print(out, "x = 1: 1/c_33 = {:.6f}\n", table.rows.back().oracle.inv_c33);
  fmt::print(out, "argmax x = {:.4f} (1/c_33 = {:.6f})\n", best.x, best.oracle.inv_c33);
  fmt::print(out, "rows where closed form and pipeline disagree: {}\n", table.flagged_count);
  write_files(cfg, {{"sweep.csv", csv}}, out);
  return table.flagged_count == 0 ? kOk : kNumericalFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Nodal frequency performance of multi-machine power networks"};
  app.require_subcommand(1);

  auto add_input = [&](CLI::App* sub) {
    sub->add_option("--input,-i", cfg.input, "Network JSON file");
    sub->add_option("--out,-o", cfg.out_dir, "Directory for CSV outputs");
    sub->add_option("--tol", cfg.tol_overrides, "Tolerance override NAME=VALUE")->take_all();
  };

  auto* analyze_cmd = app.add_subcommand("analyze", "Per-bus metric 1/c_ii and its modal components");
  add_input(analyze_cmd);
  analyze_cmd->add_flag("--modes", cfg.modes, "Also emit eigenvalues and eigenvectors");

  auto* simulate_cmd = app.add_subcommand("simulate", "Linearized step-response simulation");
  add_input(simulate_cmd);
  simulate_cmd->add_option("--dt", cfg.dt, "Integration step (s)");
  simulate_cmd->add_option("--t-end", cfg.t_end, "Simulated horizon (s)");
  simulate_cmd->add_option("--onset", cfg.onset, "Disturbance onset (s)");
  simulate_cmd->add_option("--disturb", cfg.disturb, "Step BUS=PU at a load/passive bus (repeatable)")->take_all();
  simulate_cmd->add_option("--stride", cfg.stride, "Record every N-th sample");
  simulate_cmd->add_flag("--modal", cfg.modal, "Also run the modal superposition simulator");

  auto* sweep_cmd = app.add_subcommand("sweep", "Two-generator position sweep");
  sweep_cmd->add_option("--sweep", cfg.sweep_spec, "J1,J2[,N]");
  sweep_cmd->add_option("--out,-o", cfg.out_dir, "Directory for CSV outputs");
  sweep_cmd->add_option("--tol", cfg.tol_overrides, "Tolerance override NAME=VALUE")->take_all();

  auto* validate_cmd = app.add_subcommand("validate", "Check a network file");
  add_input(validate_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    apply_tolerances(cfg);
    if (analyze_cmd->parsed()) return cmd_analyze(cfg, out);
    if (simulate_cmd->parsed()) return cmd_simulate(cfg, out);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, out);
    if (validate_cmd->parsed()) return cmd_validate(cfg, out);
  } catch (const UsageError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsage;
  } catch (const NetworkError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kValidationFailure;
  } catch (const NumericalError& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kNumericalFailure;
  }
  return kUsage;
}

}  // namespace nodalfreq::cli
