// qmh: spectral-gap amplification lab for Metropolis-Hastings chains.
//
// Subcommands: build-kernel, gap-report, walk-spectrum, sample,
// reproduce-fig1, audit-qubits.  Every run writes CSV outputs with named
// column headers plus a JSON run manifest (config echo, seed, versions).

#include "qmh/experiment.hpp"
#include "qmh/io.hpp"
#include "qmh/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<long> shots;
  std::optional<std::string> mode;
  std::optional<int> ancilla_bits;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool sampling = false) {
  cmd->add_option("--config", opts.config_path,
                  "Experiment configuration (JSON); omit for the built-in "
                  "two-state heat-bath chain");
  cmd->add_option("--out", opts.out_dir, "Output directory")
      ->capture_default_str();
  if (sampling) {
    cmd->add_option("--seed", opts.seed, "Random seed (64-bit)");
    cmd->add_option("--shots", opts.shots, "Number of samples");
    cmd->add_option("--mode", opts.mode,
                    "Sampling mode: exact-projection or qpe");
    cmd->add_option("--ancilla-bits", opts.ancilla_bits,
                    "Phase-estimation register width (qpe mode)");
  }
}

/** Built-in family: two-state chain pi = (2/3, 1/3), flip proposal. */
qmh::ExperimentConfig builtin_config() {
  qmh::ExperimentConfig cfg;
  cfg.kernel.type = "explicit";
  cfg.kernel.pi = qmh::Vector(2);
  cfg.kernel.pi << 2.0 / 3.0, 1.0 / 3.0;
  cfg.kernel.T = qmh::Matrix(2, 2);
  cfg.kernel.T << 0.0, 1.0, 1.0, 0.0;
  cfg.rule = qmh::AcceptanceRule::Glauber;
  return cfg;
}

qmh::ExperimentConfig load_config(const CommonOpts& opts) {
  qmh::ExperimentConfig cfg =
      opts.config_path.empty()
          ? builtin_config()
          : qmh::experiment_config_from_json(
                qmh::read_text_file(opts.config_path));
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.shots) cfg.shots = *opts.shots;
  if (opts.mode) cfg.mode = *opts.mode;
  if (opts.ancilla_bits) cfg.ancilla_bits = *opts.ancilla_bits;
  return cfg;
}

/** Writes into the output directory, collecting paths for the manifest. */
class OutputWriter {
 public:
  explicit OutputWriter(const std::string& dir) : dir_(dir) {
    fs::create_directories(dir_);
  }

  std::string write(const std::string& name, const std::string& content) {
    const std::string path = (dir_ / name).string();
    qmh::write_text_file(path, content);
    outputs_.push_back(path);
    return path;
  }

  void manifest(const std::string& command, const qmh::ExperimentConfig& cfg) {
    write("manifest.json",
          qmh::run_manifest(command, qmh::experiment_config_to_json(cfg),
                            cfg.seed, outputs_));
  }

  void manifest(const std::string& command, const std::string& config_json,
                std::uint64_t seed) {
    write("manifest.json",
          qmh::run_manifest(command, config_json, seed, outputs_));
  }

 private:
  fs::path dir_;
  std::vector<std::string> outputs_;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json calls_to_json(const std::map<std::string, long>& calls) {
  json j = json::object();
  for (const auto& [k, v] : calls) j[k] = v;
  return j;
}

int run_build_kernel(const CommonOpts& opts) {
  const qmh::ExperimentConfig cfg = load_config(opts);
  const qmh::PreparedChain chain = qmh::prepare_chain(cfg);
  OutputWriter out(opts.out_dir);
  out.write("target.json", qmh::vector_to_json(chain.pi));
  out.write("proposal.json", qmh::kernel_to_json(chain.T));
  out.write("acceptance.json", qmh::kernel_to_json(chain.A_full));
  out.write("kernel.json", qmh::kernel_to_json(chain.P));
  out.write("edge_space.json", qmh::edge_space_to_json(chain.S, chain.nu));
  out.write("spectrum.csv", qmh::spectrum_to_csv(qmh::eigenvalues(chain.P)));
  out.manifest("build-kernel", cfg);

  json summary;
  summary["states"] = chain.pi.size();
  summary["edges"] = chain.S.size();
  summary["rule"] = qmh::to_string(cfg.rule);
  summary["reversible"] = qmh::is_reversible(chain.P, chain.pi);
  summary["spectral_gap"] = qmh::spectral_gap(chain.P, chain.pi);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_gap_report(const CommonOpts& opts, double epsilon) {
  const qmh::ExperimentConfig cfg = load_config(opts);
  const qmh::GapReport rep = qmh::gap_report(cfg, epsilon);

  json j;
  j["delta"] = rep.delta;
  j["delta_star"] = rep.delta_star;
  j["lambda"] = rep.lambda;
  j["angular_gap"] = rep.angular_gap;
  j["bound"] = rep.bound;
  j["bound_holds"] = rep.bound_holds;
  j["one_minus_lambda"] = 1.0 - rep.lambda;
  j["half_delta"] = rep.delta / 2.0;
  j["mixing_lower"] = rep.mixing_lower;
  j["mixing_upper"] = rep.mixing_upper;
  j["epsilon"] = rep.epsilon;
  j["qubits"] = {{"m", rep.qubits.m},
                 {"walk_total", rep.qubits.walk_total},
                 {"cswap_total", rep.qubits.cswap_total},
                 {"literature_rows", rep.qubits.literature_rows}};
  std::cout << j.dump(2) << "\n";

  OutputWriter out(opts.out_dir);
  out.write("gap_report.json", j.dump(2));
  out.manifest("gap-report", cfg);
  return 0;
}

int run_walk_spectrum(const CommonOpts& opts, bool force_dense) {
  const qmh::ExperimentConfig cfg = load_config(opts);
  const qmh::PreparedChain chain = qmh::prepare_chain(cfg);
  const qmh::Index s = chain.S.size();
  const bool materialize = force_dense || 2 * s * s <= 2048;
  const qmh::WalkSpectrumReport rep = qmh::walk_spectrum(
      chain.S, chain.T, chain.A, chain.nu, materialize, cfg.tolerances);

  OutputWriter out(opts.out_dir);
  if (!rep.phases.empty()) {
    std::string csv = "index,phase\n";
    for (size_t i = 0; i < rep.phases.size(); ++i)
      csv += std::to_string(i) + ',' + fmt(rep.phases[i]) + '\n';
    out.write("phases.csv", csv);
  }

  json j;
  j["edges"] = s;
  j["walk_dimension"] = 2 * s * s;
  j["materialized"] = materialize;
  j["lambda"] = rep.lambda;
  j["delta_star"] = rep.delta_star;
  j["angular_gap"] = rep.angular_gap;
  if (materialize) j["angular_gap_direct"] = rep.angular_gap_direct;
  std::cout << j.dump(2) << "\n";
  out.write("walk_spectrum.json", j.dump(2));
  out.manifest("walk-spectrum", cfg);
  return 0;
}

int run_sample(const CommonOpts& opts) {
  const qmh::ExperimentConfig cfg = load_config(opts);
  const qmh::SampleRun run = cfg.mode == "qpe" ? qmh::algorithm1_qpe(cfg)
                                               : qmh::algorithm1_exact(cfg);
  const qmh::PreparedChain chain = qmh::prepare_chain(cfg);

  OutputWriter out(opts.out_dir);
  std::string csv = "state,count,probability,target\n";
  for (qmh::Index x = 0; x < run.histogram.size(); ++x) {
    const double p =
        static_cast<double>(run.histogram[x]) / static_cast<double>(run.shots);
    csv += std::to_string(x) + ',' + std::to_string(run.histogram[x]) + ',' +
           fmt(p) + ',' + fmt(chain.pi[x]) + '\n';
  }
  out.write("histogram.csv", csv);

  json j;
  j["mode"] = cfg.mode;
  j["shots"] = run.shots;
  j["seed"] = run.seed;
  j["tv_to_target"] = run.tv_to_target;
  j["success_probability"] = run.success_probability;
  j["expected_repetitions"] = run.expected_repetitions;
  j["fidelity"] = run.fidelity;
  j["oracle_calls"] = calls_to_json(run.oracle_calls);
  if (cfg.mode == "qpe") j["ancilla_bits"] = cfg.ancilla_bits;
  std::cout << j.dump(2) << "\n";
  out.write("sample_summary.json", j.dump(2));
  out.manifest("sample", cfg);
  return 0;
}

int run_fig1(const CommonOpts& opts, qmh::SweepConfig sweep) {
  const std::vector<qmh::SweepPoint> points = qmh::two_well_sweep(sweep);

  std::string csv = "sweep_value,delta,delta_star,lambda,angular_gap,bound,bound_holds\n";
  bool all_hold = true;
  for (const qmh::SweepPoint& p : points) {
    csv += fmt(p.sweep_value) + ',' + fmt(p.delta) + ',' + fmt(p.delta_star) +
           ',' + fmt(p.lambda) + ',' + fmt(p.angular_gap) + ',' + fmt(p.bound) +
           ',' + (p.bound_holds ? "1" : "0") + '\n';
    all_hold = all_hold && p.bound_holds;
    std::cout << sweep.variable << "=" << fmt(p.sweep_value)
              << "  delta=" << fmt(p.delta)
              << "  angular_gap=" << fmt(p.angular_gap)
              << "  bound=" << fmt(p.bound)
              << (p.bound_holds ? "  ok" : "  VIOLATED") << "\n";
  }

  json config_echo;
  config_echo["grid"] = json::parse(qmh::mala_config_to_json(sweep.grid));
  config_echo["variable"] = sweep.variable;
  config_echo["from"] = sweep.from;
  config_echo["to"] = sweep.to;
  config_echo["points"] = sweep.points;
  config_echo["lazy"] = sweep.lazy;

  OutputWriter out(opts.out_dir);
  out.write("fig1.csv", csv);
  out.manifest("reproduce-fig1", config_echo.dump(2), 0);

  if (!all_hold) {
    std::cerr << "angular gap fell below acos(sqrt(1 - delta/2)) at some "
                 "sweep point\n";
    return 1;
  }
  return 0;
}

int run_audit_qubits(int m, qmh::Index states) {
  if (states > 0) {
    m = 0;
    while ((qmh::Index{1} << m) < states) ++m;
  }
  const qmh::QubitAudit audit = qmh::qubit_audit(m);
  json j;
  j["m"] = audit.m;
  j["states"] = (qmh::Index{1} << audit.m);
  j["walk_total"] = audit.walk_total;
  j["cswap_total"] = audit.cswap_total;
  j["literature_rows"] = audit.literature_rows;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qmh - edge-space quantum walks for Metropolis-Hastings chains: "
      "kernels, spectral gap reports, walk spectra, stationary-state "
      "sampling, and the two-well gap sweep"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qmh::kVersion));

  CommonOpts build_opts;
  CLI::App* build = app.add_subcommand(
      "build-kernel", "Assemble a chain (target, proposal, acceptance, "
                      "kernel, edge space) and write it as JSON/CSV");
  add_common(build, build_opts);

  CommonOpts gap_opts;
  double epsilon = 0.01;
  CLI::App* gap = app.add_subcommand(
      "gap-report", "Classical gap, dual-product gap, angular gap, bound "
                    "check, mixing-time bounds, qubit audit");
  add_common(gap, gap_opts);
  gap->add_option("--epsilon", epsilon, "Accuracy for mixing-time bounds")
      ->capture_default_str();

  CommonOpts walk_opts;
  bool force_dense = false;
  CLI::App* walk = app.add_subcommand(
      "walk-spectrum", "Angular spectral gap of the edge-space walk; dense "
                       "eigenphases for small edge sets");
  add_common(walk, walk_opts);
  walk->add_flag("--dense", force_dense,
                 "Materialize the walk operator even for large edge sets");

  CommonOpts sample_opts;
  CLI::App* sample = app.add_subcommand(
      "sample", "Sample the stationary distribution through the walk "
                "(exact-projection or qpe mode)");
  add_common(sample, sample_opts, /*sampling=*/true);

  CommonOpts fig1_opts;
  qmh::SweepConfig sweep;
  bool no_lazy = false;
  CLI::App* fig1 = app.add_subcommand(
      "reproduce-fig1",
      "Two-well drift-proposal sweep at a 64-point grid: classical gap delta "
      "versus walk angular gap, against the bound acos(sqrt(1 - delta/2))");
  add_common(fig1, fig1_opts);
  fig1->add_option("--sweep", sweep.variable, "Sweep variable: beta, tau, or scale")
      ->capture_default_str();
  fig1->add_option("--from", sweep.from, "Sweep start (log-spaced)")
      ->capture_default_str();
  fig1->add_option("--to", sweep.to, "Sweep end")->capture_default_str();
  fig1->add_option("--points", sweep.points, "Number of sweep points")
      ->capture_default_str();
  fig1->add_option("--bits", sweep.grid.bits, "Grid size exponent (n = 2^bits)")
      ->capture_default_str();
  fig1->add_option("--tau", sweep.grid.tau, "Langevin step size")
      ->capture_default_str();
  fig1->add_option("--beta", sweep.grid.beta, "Inverse temperature")
      ->capture_default_str();
  fig1->add_flag("--no-lazy", no_lazy,
                 "Use the plain (non-lazy) acceptance in the dual walk");

  int audit_m = 6;
  qmh::Index audit_states = 0;
  CLI::App* audit = app.add_subcommand(
      "audit-qubits", "Qubit budgets of the walk and coin constructions");
  audit->add_option("--m", audit_m, "Qubits per state register")
      ->capture_default_str();
  audit->add_option("--states", audit_states,
                    "State-space size (sets m = ceil(log2 n))");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) return run_build_kernel(build_opts);
    if (gap->parsed()) return run_gap_report(gap_opts, epsilon);
    if (walk->parsed()) return run_walk_spectrum(walk_opts, force_dense);
    if (sample->parsed()) return run_sample(sample_opts);
    if (fig1->parsed()) {
      sweep.lazy = !no_lazy;
      return run_fig1(fig1_opts, sweep);
    }
    if (audit->parsed()) return run_audit_qubits(audit_m, audit_states);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
