// Experiment front end: simulate processes, estimate covariances, test the
// Markov structure, krige, and reproduce the figure-class experiments with
// deterministic seeding and CSV/SVG outputs.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "markovcov/csv.hpp"
#include "markovcov/experiments.hpp"
#include "markovcov/version.hpp"

namespace {

using namespace markovcov;

constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;

struct CommonOptions {
  std::string process = "bm";
  double theta = 1.0;
  double sigma = 1.0;
  double h = 0.1;
  int quadrature = 200;
  int n = 200;
  int p = 20;
  int r = 10;
  double noise_sd = 0.0;
  double alpha = 0.05;
  int replicates = 0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string estimators = "markov,empirical";
  std::string calibration = "mc";
  std::string config_file;
  int threads = 0;
  bool serial = false;
  std::string n_list, p_list, h_list;
  std::string input_file;
  bool irregular_input = false;
  double t0 = -1.0;
  double bandwidth = 0.1;
  std::string t0_policy = "midpoints";
  int mc_draws = 10000;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->set_help_flag("--help", "print help");  // frees -h for the bandwidth flag
  cmd->add_option("--process", opt.process, "process kind: bm|ou|kebm");
  cmd->add_option("--theta", opt.theta, "OU mean-reversion rate");
  cmd->add_option("--sigma", opt.sigma, "OU diffusion scale");
  cmd->add_option("--h", opt.h, "embedding bandwidth for kebm");
  cmd->add_option("--quadrature", opt.quadrature, "quadrature nodes per axis for kebm");
  cmd->add_option("--n", opt.n, "number of curves");
  cmd->add_option("--p", opt.p, "grid size / bin count");
  cmd->add_option("--r", opt.r, "observations per curve (irregular regime)");
  cmd->add_option("--noise-sd", opt.noise_sd, "measurement noise standard deviation");
  cmd->add_option("--alpha", opt.alpha, "test level");
  cmd->add_option("--replicates", opt.replicates, "Monte Carlo replicates");
  cmd->add_option("--seed", opt.seed, "RNG seed");
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--estimators", opt.estimators,
                  "comma list: markov,empirical,smoothed,triangular");
  cmd->add_option("--calibration", opt.calibration, "mc|bonferroni");
  cmd->add_option("--mc-draws", opt.mc_draws, "calibration draws for mc");
  cmd->add_option("--config", opt.config_file, "key=value file overriding flags");
  cmd->add_option("--threads", opt.threads, "worker threads (0 = all)");
  cmd->add_flag("--serial", opt.serial, "run the serial reference path");
  cmd->add_option("--bandwidth", opt.bandwidth, "smoother bandwidth");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, sep))
    if (!field.empty()) out.push_back(field);
  return out;
}

// Flat key=value file; entries override the parsed flags.
void apply_config_file(CommonOptions& opt) {
  if (opt.config_file.empty()) return;
  std::ifstream in(opt.config_file);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + opt.config_file);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--config", "expected key=value: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "process") opt.process = value;
    else if (key == "theta") opt.theta = std::stod(value);
    else if (key == "sigma") opt.sigma = std::stod(value);
    else if (key == "h") opt.h = std::stod(value);
    else if (key == "quadrature") opt.quadrature = std::stoi(value);
    else if (key == "n") opt.n = std::stoi(value);
    else if (key == "p") opt.p = std::stoi(value);
    else if (key == "r") opt.r = std::stoi(value);
    else if (key == "noise-sd" || key == "noise_sd") opt.noise_sd = std::stod(value);
    else if (key == "alpha") opt.alpha = std::stod(value);
    else if (key == "replicates") opt.replicates = std::stoi(value);
    else if (key == "seed") opt.seed = std::stoull(value);
    else if (key == "out") opt.out_dir = value;
    else if (key == "estimators") opt.estimators = value;
    else if (key == "calibration") opt.calibration = value;
    else if (key == "mc-draws" || key == "mc_draws") opt.mc_draws = std::stoi(value);
    else if (key == "threads") opt.threads = std::stoi(value);
    else if (key == "serial") opt.serial = value == "1" || value == "true";
    else if (key == "bandwidth") opt.bandwidth = std::stod(value);
    else if (key == "n-list" || key == "n_list") opt.n_list = value;
    else if (key == "p-list" || key == "p_list") opt.p_list = value;
    else if (key == "h-list" || key == "h_list") opt.h_list = value;
    else if (key == "t0") opt.t0 = std::stod(value);
    else if (key == "t0-policy" || key == "t0_policy") opt.t0_policy = value;
    else throw CLI::ValidationError("--config", "unknown key: " + key);
  }
}

KernelSpec make_spec(const CommonOptions& opt) {
  if (opt.process == "bm") return BrownianMotion{};
  if (opt.process == "ou") return OrnsteinUhlenbeck{opt.theta, opt.sigma};
  if (opt.process == "kebm") return KernelEmbeddedBM{opt.h, opt.quadrature};
  throw CLI::ValidationError("--process", "expected bm|ou|kebm, got " + opt.process);
}

std::vector<EstimatorKind> make_estimators(const CommonOptions& opt) {
  std::vector<EstimatorKind> kinds;
  for (const auto& name : split(opt.estimators, ','))
    kinds.push_back(estimator_from_name(name));
  if (kinds.empty()) throw CLI::ValidationError("--estimators", "empty list");
  return kinds;
}

Calibration make_calibration(const CommonOptions& opt) {
  if (opt.calibration == "mc") return GaussianMC{opt.mc_draws};
  if (opt.calibration == "bonferroni") return Bonferroni{};
  throw CLI::ValidationError("--calibration", "expected mc|bonferroni");
}

ExperimentConfig make_experiment_config(const std::string& kind,
                                        const CommonOptions& opt) {
  ExperimentConfig config;
  config.kind = kind;
  config.process = make_spec(opt);
  if (kind == "convergence" && opt.irregular_input) config.per_curve = opt.r;
  config.n_values = {opt.n};
  config.p_values = {opt.p};
  if (!opt.n_list.empty()) {
    config.n_values.clear();
    for (const auto& s : split(opt.n_list, ',')) config.n_values.push_back(std::stoi(s));
  }
  if (!opt.p_list.empty()) {
    config.p_values.clear();
    for (const auto& s : split(opt.p_list, ',')) config.p_values.push_back(std::stoi(s));
  }
  if (!opt.h_list.empty())
    for (const auto& s : split(opt.h_list, ',')) config.h_values.push_back(std::stod(s));
  config.alpha = opt.alpha;
  config.replicates = opt.replicates;
  config.seed = opt.seed;
  config.out_dir = opt.out_dir;
  config.estimators = make_estimators(opt);
  config.calibration = make_calibration(opt);
  config.noise_sd = opt.noise_sd;
  config.smoother_bandwidth = opt.bandwidth;
  if (opt.t0_policy == "midpoints") config.kriging_policy = TargetPolicy::midpoints;
  else if (opt.t0_policy == "leave-node-out")
    config.kriging_policy = TargetPolicy::leave_node_out;
  else throw CLI::ValidationError("--t0-policy", "expected midpoints|leave-node-out");
  config.exec = opt.serial ? Exec::serial : Exec::parallel;
  return config;
}

ObservationSet load_or_simulate(const CommonOptions& opt, bool dense_required) {
  if (!opt.input_file.empty())
    return csv::curves_from_csv_file(opt.input_file, opt.irregular_input);
  const Exec exec = opt.serial ? Exec::serial : Exec::parallel;
  if (opt.irregular_input && !dense_required)
    return sample_curves(make_spec(opt), IrregularDesign{opt.r}, opt.n, opt.noise_sd,
                         opt.seed, exec);
  return sample_curves(make_spec(opt), DenseDesign{Grid::regular_midpoints(opt.p)},
                       opt.n, opt.noise_sd, opt.seed, exec);
}

int cmd_simulate(const CommonOptions& opt, bool irregular) {
  const Exec exec = opt.serial ? Exec::serial : Exec::parallel;
  ObservationSet obs;
  if (irregular)
    obs = sample_curves(make_spec(opt), IrregularDesign{opt.r}, opt.n, opt.noise_sd,
                        opt.seed, exec);
  else
    obs = sample_curves(make_spec(opt), DenseDesign{Grid::regular_midpoints(opt.p)},
                        opt.n, opt.noise_sd, opt.seed, exec);
  std::filesystem::create_directories(opt.out_dir);
  ExperimentConfig provenance_cfg = make_experiment_config("surfaces", opt);
  const std::string head = csv::provenance_block(provenance_cfg.canonical(), opt.seed);
  const auto path = std::filesystem::path(opt.out_dir) /
                    (irregular ? "curves_irregular.csv" : "curves.csv");
  csv::write_text(path, head + (irregular ? csv::irregular_curves_to_csv(obs)
                                          : csv::dense_curves_to_csv(obs)));
  std::cout << path.string() << "\n";
  return 0;
}

int cmd_estimate(const CommonOptions& opt) {
  ObservationSet obs = load_or_simulate(opt, false);
  std::filesystem::create_directories(opt.out_dir);
  ExperimentConfig provenance_cfg = make_experiment_config("surfaces", opt);
  const std::string head = csv::provenance_block(provenance_cfg.canonical(), opt.seed);
  for (EstimatorKind kind : make_estimators(opt)) {
    EstimatedKernel est;
    if (kind == EstimatorKind::markov) {
      std::optional<double> nu;
      if (obs.regime == Regime::dense && opt.noise_sd == 0.0) nu = 0.0;
      est = markov_estimate(bin_observations(obs, opt.p), nu);
    } else if (kind == EstimatorKind::empirical) {
      est = empirical_estimate(obs);
    } else if (kind == EstimatorKind::smoothed) {
      est = smoothed_estimate(obs, opt.bandwidth);
    } else {
      est = triangular_estimate(obs, opt.bandwidth);
    }
    const auto path = std::filesystem::path(opt.out_dir) /
                      ("estimate_" + estimator_name(kind) + ".csv");
    csv::write_text(path, head + csv::estimated_kernel_to_csv(est));
    std::cout << path.string() << "\n";
  }
  return 0;
}

int cmd_test(const CommonOptions& opt) {
  ObservationSet obs = load_or_simulate(opt, true);
  const TestReport report =
      markov_test(obs, opt.alpha, make_calibration(opt), opt.seed,
                  opt.serial ? Exec::serial : Exec::parallel);
  std::filesystem::create_directories(opt.out_dir);
  ExperimentConfig provenance_cfg = make_experiment_config("power", opt);
  const std::string head = csv::provenance_block(provenance_cfg.canonical(), opt.seed);
  const auto path = std::filesystem::path(opt.out_dir) / "test_report.csv";
  csv::write_text(path, head + csv::test_report_to_csv(report));
  std::cout << path.string() << "\n";
  std::cout << (report.reject ? "RejectMarkov" : "FailToReject")
            << " statistic=" << report.statistic
            << " critical=" << report.critical_value << " p_value=" << report.p_value
            << "\n";
  return 0;
}

int cmd_krige(const CommonOptions& opt) {
  if (opt.t0 < 0.0 || opt.t0 > 1.0)
    throw CLI::ValidationError("--t0", "prediction location in [0,1] required");
  const Grid nodes = Grid::regular_midpoints(opt.p);
  const Exec exec = opt.serial ? Exec::serial : Exec::parallel;
  const KernelSpec spec = make_spec(opt);
  std::ostringstream body;
  body << "estimator,node,weight\n";
  std::ostringstream summary;
  summary << "estimator,t0,multiplier,variance,ridge\n";

  auto emit = [&](const std::string& name, const KrigingSystem& system) {
    for (int j = 0; j < system.nodes.size(); ++j)
      body << name << "," << csv::format_double(system.nodes[j]) << ","
           << csv::format_double(system.weights(j)) << "\n";
    summary << name << "," << csv::format_double(system.target) << ","
            << csv::format_double(system.multiplier) << ","
            << csv::format_double(system.variance) << ","
            << csv::format_double(system.ridge) << "\n";
  };

  const KernelMatrix K = kernel_matrix(spec, nodes, exec);
  emit("oracle", solve_kriging(spec, nodes, opt.t0, default_ridge(K.values)));

  ObservationSet obs = load_or_simulate(opt, true);
  for (EstimatorKind kind : make_estimators(opt)) {
    EstimatedKernel est;
    if (kind == EstimatorKind::markov) {
      std::optional<double> nu;
      if (opt.noise_sd == 0.0) nu = 0.0;
      est = markov_estimate(bin_observations(obs, opt.p), nu);
    } else if (kind == EstimatorKind::empirical) {
      est = empirical_estimate(obs);
    } else if (kind == EstimatorKind::smoothed) {
      est = smoothed_estimate(obs, opt.bandwidth);
    } else {
      est = triangular_estimate(obs, opt.bandwidth);
    }
    emit(estimator_name(kind),
         solve_kriging(est, nodes, opt.t0, default_ridge(est.nodal())));
  }

  std::filesystem::create_directories(opt.out_dir);
  ExperimentConfig provenance_cfg = make_experiment_config("kriging", opt);
  const std::string head = csv::provenance_block(provenance_cfg.canonical(), opt.seed);
  const auto wpath = std::filesystem::path(opt.out_dir) / "kriging_weights.csv";
  const auto spath = std::filesystem::path(opt.out_dir) / "kriging_solution.csv";
  csv::write_text(wpath, head + body.str());
  csv::write_text(spath, head + summary.str());
  std::cout << wpath.string() << "\n" << spath.string() << "\n";
  return 0;
}

int cmd_experiment(const std::string& kind, const CommonOptions& opt) {
  std::string mapped = kind;
  if (kind == "test-one") return cmd_test(opt);
  if (kind == "estimate-one") return cmd_estimate(opt);
  const ExperimentConfig config = make_experiment_config(mapped, opt);
  for (const auto& path : run_experiment(config)) std::cout << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-constrained covariance estimation toolkit"};
  app.set_help_flag("--help", "print help");
  app.set_version_flag("--version", markovcov::kVersion);
  app.require_subcommand(1);

  CommonOptions opt;
  bool simulate_irregular = false;
  std::string experiment_kind;

  auto* simulate = app.add_subcommand("simulate", "sample curves to CSV");
  add_common(simulate, opt);
  simulate->add_flag("--irregular", simulate_irregular, "irregular design (r uniform times per curve)");

  auto* estimate = app.add_subcommand("estimate", "fit covariance estimators");
  add_common(estimate, opt);
  estimate->add_option("--in", opt.input_file, "input curve CSV");
  estimate->add_flag("--irregular", opt.irregular_input, "input is long-format (curve_id,t,y)");

  auto* test = app.add_subcommand("test", "run the endpoint conditional-independence test");
  add_common(test, opt);
  test->add_option("--in", opt.input_file, "input dense curve CSV");

  auto* krige = app.add_subcommand("krige", "solve one kriging prediction");
  add_common(krige, opt);
  krige->add_option("--t0", opt.t0, "prediction location")->required();
  krige->add_option("--in", opt.input_file, "input dense curve CSV");

  auto* experiment = app.add_subcommand("experiment", "run a figure-class experiment");
  add_common(experiment, opt);
  experiment
      ->add_option("kind", experiment_kind,
                   "convergence|surfaces|kriging|power|roc|test-one|estimate-one")
      ->required();
  experiment->add_option("--n-list", opt.n_list, "comma list of n levels");
  experiment->add_option("--p-list", opt.p_list, "comma list of p levels");
  experiment->add_option("--h-list", opt.h_list, "comma list of bandwidths");
  experiment->add_option("--t0-policy", opt.t0_policy, "midpoints|leave-node-out");
  experiment->add_flag("--irregular", opt.irregular_input,
                       "convergence: irregular design with --r observations per curve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    apply_config_file(opt);
    markovcov::set_threads(opt.threads);
    if (simulate->parsed()) return cmd_simulate(opt, simulate_irregular);
    if (estimate->parsed()) return cmd_estimate(opt);
    if (test->parsed()) return cmd_test(opt);
    if (krige->parsed()) return cmd_krige(opt);
    if (experiment->parsed()) return cmd_experiment(experiment_kind, opt);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
